#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nashbo/gp.hpp"
#include "nashbo/space.hpp"

namespace nashbo {

/// A subset S of the joint candidates: sorted ids plus a membership mask.
class Region {
 public:
  Region() = default;
  static Region full(std::size_t domain_size);
  static Region of(std::vector<CandidateId> ids, std::size_t domain_size);

  const std::vector<CandidateId>& ids() const { return ids_; }
  bool contains(CandidateId id) const { return mask_[id] != 0; }
  std::size_t size() const { return ids_.size(); }
  std::size_t domain_size() const { return mask_.size(); }
  bool empty() const { return ids_.empty(); }
  bool operator==(const Region& other) const { return ids_ == other.ids_; }

 private:
  std::vector<CandidateId> ids_;
  std::vector<char> mask_;
};

/// Lower/upper confidence bounds of one quantity over every candidate.
/// Undefined entries hold NaN.
struct Interval {
  std::vector<double> lcb;
  std::vector<double> ucb;

  std::size_t size() const { return lcb.size(); }
};

/// mu +/- sqrt(beta) * sigma over every candidate.
Interval u_bounds(const PosteriorBatch& posterior, double beta);

/// Partial-maximum bounds of agent `agent`'s utility: for each candidate x,
/// the max of ucb_u (and of lcb_u) over {x' in slice(x) : x' in S}. Entries
/// whose slice misses S are NaN.
Interval v_bounds(const Interval& u, const JointSpace& space, const Region& region, std::size_t agent);

/// ucb_f = sum_i ucb_v_i - lcb_u_i, lcb_f = sum_i lcb_v_i - ucb_u_i.
/// Throws LogicError if any `required` candidate has an undefined input.
Interval f_bounds(std::span<const Interval> u, std::span<const Interval> v,
                  std::span<const CandidateId> required);

/// Intersection of the confidence intervals of every round seen so far,
/// applied at the utility level.
class EnvelopeState {
 public:
  explicit EnvelopeState(bool enabled = true) : enabled_(enabled) {}

  /// Returns the intersected bounds and remembers them. When the current and
  /// historical intervals are disjoint the result collapses onto the nearest
  /// end of the historical interval, so nesting with history is preserved.
  std::vector<Interval> apply(std::vector<Interval> current);

  /// Forget the history; the next apply() starts a new intersection.
  void reset() { previous_.clear(); }
  bool enabled() const { return enabled_; }
  bool has_history() const { return !previous_.empty(); }
  const std::vector<Interval>& previous() const { return previous_; }
  /// Candidates whose intervals were disjoint during the last apply().
  std::size_t last_conflicts() const { return last_conflicts_; }

 private:
  bool enabled_;
  std::vector<Interval> previous_;
  std::size_t last_conflicts_ = 0;
};

/// Single-pair form of the envelope for one quantity.
Interval intersect(const Interval& previous, const Interval& current, std::size_t* conflicts = nullptr);

struct BoundsTable {
  std::size_t round = 0;
  double beta = 0.0;
  std::vector<Interval> u;  // per agent
  std::vector<Interval> v;  // per agent, over region_used
  Interval f;
  Region region_used;
};

/// Recomposes v and f from (possibly enveloped) u-level bounds over `region`.
/// f entries are required to be defined for every member of `region`.
BoundsTable compose_bounds(std::size_t round, double beta, std::vector<Interval> u, const JointSpace& space,
                           const Region& region);

/// ucb_f - lcb_f for each member of `region`, in region order.
std::vector<double> acquisition(const BoundsTable& bounds, const Region& region);

}  // namespace nashbo
