#include "nashbo/space.hpp"

#include <limits>

#include <fmt/format.h>

#include "nashbo/errors.hpp"

namespace nashbo {

JointSpace::JointSpace(std::vector<Eigen::MatrixXd> per_agent, std::size_t cap)
    : per_agent_(std::move(per_agent)) {
  if (per_agent_.empty()) throw ConfigError("joint space needs at least one agent");
  const std::size_t n = per_agent_.size();
  strides_.assign(n, 1);
  offsets_.assign(n, 0);

  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto rows = static_cast<std::size_t>(per_agent_[i].rows());
    if (rows == 0) throw ConfigError(fmt::format("agent {} has an empty strategy set", i));
    if (total > cap / rows) {
      throw ConfigError(fmt::format("joint space exceeds the candidate cap of {}", cap));
    }
    total *= rows;
  }
  if (total > cap) throw ConfigError(fmt::format("joint space of {} exceeds the candidate cap of {}", total, cap));
  size_ = total;

  for (std::size_t i = n; i-- > 0;) {
    strides_[i] = (i + 1 < n) ? strides_[i + 1] * per_agent_[i + 1].rows() : 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    offsets_[i] = total_dim_;
    total_dim_ += per_agent_[i].cols();
  }

  features_.resize(static_cast<Eigen::Index>(size_), static_cast<Eigen::Index>(total_dim_));
  for (CandidateId id = 0; id < size_; ++id) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = static_cast<Eigen::Index>(strategy_index(id, i));
      features_.row(id).segment(offsets_[i], per_agent_[i].cols()) = per_agent_[i].row(s);
    }
  }
}

std::vector<std::size_t> JointSpace::profile(CandidateId id) const {
  std::vector<std::size_t> out(agents());
  for (std::size_t i = 0; i < agents(); ++i) out[i] = strategy_index(id, i);
  return out;
}

CandidateId JointSpace::id_of(std::span<const std::size_t> profile) const {
  if (profile.size() != agents()) throw LogicError("profile length does not match agent count");
  CandidateId id = 0;
  for (std::size_t i = 0; i < agents(); ++i) {
    if (profile[i] >= strategies(i)) throw LogicError("strategy index out of range");
    id += profile[i] * strides_[i];
  }
  return id;
}

std::vector<CandidateId> JointSpace::slice(std::size_t agent, CandidateId id) const {
  const CandidateId base = slice_base(agent, id);
  std::vector<CandidateId> out(strategies(agent));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = base + k * strides_[agent];
  return out;
}

std::vector<CandidateId> JointSpace::slice_bases(std::size_t agent) const {
  std::vector<CandidateId> bases;
  bases.reserve(size_ / strategies(agent));
  for (CandidateId id = 0; id < size_; ++id) {
    if (strategy_index(id, agent) == 0) bases.push_back(id);
  }
  return bases;
}

std::vector<std::vector<CandidateId>> JointSpace::slice_index(std::size_t agent) const {
  std::vector<std::vector<CandidateId>> out;
  for (CandidateId base : slice_bases(agent)) out.push_back(slice(agent, base));
  return out;
}

std::optional<CandidateId> JointSpace::find(const Eigen::VectorXd& x, double tol) const {
  if (static_cast<std::size_t>(x.size()) != total_dim_) return std::nullopt;
  std::vector<std::size_t> prof(agents());
  for (std::size_t i = 0; i < agents(); ++i) {
    const auto& strat = per_agent_[i];
    const auto seg = x.segment(offsets_[i], strat.cols());
    std::optional<std::size_t> hit;
    for (Eigen::Index r = 0; r < strat.rows(); ++r) {
      if ((strat.row(r).transpose() - seg).cwiseAbs().maxCoeff() <= tol) {
        hit = static_cast<std::size_t>(r);
        break;
      }
    }
    if (!hit) return std::nullopt;
    prof[i] = *hit;
  }
  return id_of(prof);
}

}  // namespace nashbo
