#include "nashbo/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "nashbo/errors.hpp"

namespace nashbo {

namespace {
constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
}

Region Region::full(std::size_t domain_size) {
  Region r;
  r.ids_.resize(domain_size);
  for (std::size_t k = 0; k < domain_size; ++k) r.ids_[k] = k;
  r.mask_.assign(domain_size, 1);
  return r;
}

Region Region::of(std::vector<CandidateId> ids, std::size_t domain_size) {
  Region r;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  r.mask_.assign(domain_size, 0);
  for (CandidateId id : ids) {
    if (id >= domain_size) throw LogicError("region member outside the domain");
    r.mask_[id] = 1;
  }
  r.ids_ = std::move(ids);
  return r;
}

Interval u_bounds(const PosteriorBatch& posterior, double beta) {
  if (!(beta >= 0.0)) throw LogicError("beta must be non-negative");
  const double scale = std::sqrt(beta);
  const auto m = static_cast<std::size_t>(posterior.mean.size());
  Interval out;
  out.lcb.resize(m);
  out.ucb.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double half = scale * std::sqrt(posterior.variance(k));
    out.lcb[k] = posterior.mean(k) - half;
    out.ucb[k] = posterior.mean(k) + half;
  }
  return out;
}

Interval v_bounds(const Interval& u, const JointSpace& space, const Region& region, std::size_t agent) {
  const std::size_t m = space.size();
  if (u.size() != m || region.domain_size() != m) throw LogicError("bounds/region size mismatch");
  Interval out;
  out.lcb.assign(m, kUndefined);
  out.ucb.assign(m, kUndefined);
  const std::size_t stride = space.stride(agent);
  const std::size_t count = space.strategies(agent);
  for (CandidateId base : space.slice_bases(agent)) {
    double best_u = -std::numeric_limits<double>::infinity();
    double best_l = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t k = 0; k < count; ++k) {
      const CandidateId id = base + k * stride;
      if (!region.contains(id)) continue;
      any = true;
      best_u = std::max(best_u, u.ucb[id]);
      best_l = std::max(best_l, u.lcb[id]);
    }
    if (!any) continue;
    for (std::size_t k = 0; k < count; ++k) {
      const CandidateId id = base + k * stride;
      out.ucb[id] = best_u;
      out.lcb[id] = best_l;
    }
  }
  return out;
}

Interval f_bounds(std::span<const Interval> u, std::span<const Interval> v, std::span<const CandidateId> required) {
  if (u.size() != v.size() || u.empty()) throw LogicError("f bounds need matching u and v bounds per agent");
  const std::size_t m = u.front().size();
  Interval out;
  out.lcb.assign(m, 0.0);
  out.ucb.assign(m, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i].size() != m || v[i].size() != m) throw LogicError("bounds arrays differ in length");
    for (std::size_t k = 0; k < m; ++k) {
      out.ucb[k] += v[i].ucb[k] - u[i].lcb[k];
      out.lcb[k] += v[i].lcb[k] - u[i].ucb[k];
    }
  }
  for (CandidateId id : required) {
    if (std::isnan(out.lcb[id]) || std::isnan(out.ucb[id])) {
      throw LogicError(fmt::format("candidate {} has an undefined partial-maximum bound", id));
    }
  }
  return out;
}

Interval intersect(const Interval& previous, const Interval& current, std::size_t* conflicts) {
  if (previous.size() != current.size()) throw LogicError("envelope over mismatched domains");
  Interval out = current;
  for (std::size_t k = 0; k < current.size(); ++k) {
    const double lo = std::max(previous.lcb[k], current.lcb[k]);
    const double hi = std::min(previous.ucb[k], current.ucb[k]);
    if (lo <= hi) {
      out.lcb[k] = lo;
      out.ucb[k] = hi;
    } else {
      // Disjoint: keep the point of the historical interval nearest to the new one.
      const double anchor = current.lcb[k] > previous.ucb[k] ? previous.ucb[k] : previous.lcb[k];
      out.lcb[k] = anchor;
      out.ucb[k] = anchor;
      if (conflicts) ++*conflicts;
    }
  }
  return out;
}

std::vector<Interval> EnvelopeState::apply(std::vector<Interval> current) {
  last_conflicts_ = 0;
  if (!enabled_) return current;
  if (!previous_.empty()) {
    if (previous_.size() != current.size()) throw LogicError("envelope agent count changed");
    for (std::size_t i = 0; i < current.size(); ++i) {
      current[i] = intersect(previous_[i], current[i], &last_conflicts_);
    }
  }
  previous_ = current;
  return current;
}

BoundsTable compose_bounds(std::size_t round, double beta, std::vector<Interval> u, const JointSpace& space,
                           const Region& region) {
  BoundsTable table;
  table.round = round;
  table.beta = beta;
  table.u = std::move(u);
  table.region_used = region;
  table.v.reserve(table.u.size());
  for (std::size_t i = 0; i < table.u.size(); ++i) table.v.push_back(v_bounds(table.u[i], space, region, i));
  table.f = f_bounds(table.u, table.v, region.ids());
  return table;
}

std::vector<double> acquisition(const BoundsTable& bounds, const Region& region) {
  if (!(bounds.region_used == region)) throw LogicError("acquisition region differs from the bounds' region");
  std::vector<double> alpha(region.size());
  for (std::size_t k = 0; k < region.size(); ++k) {
    const CandidateId id = region.ids()[k];
    alpha[k] = bounds.f.ucb[id] - bounds.f.lcb[id];
  }
  return alpha;
}

}  // namespace nashbo
