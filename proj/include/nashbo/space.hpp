#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace nashbo {

using CandidateId = std::size_t;

inline constexpr std::size_t kDefaultCandidateCap = 200'000;

/// Finite discretization of a joint strategy set.
///
/// Agent i owns a matrix of strategies (one row per strategy, d_i columns).
/// Joint candidates are the Cartesian product, enumerated in mixed radix with
/// the last agent varying fastest, so ids are dense in [0, size()).
///
/// A *slice* for agent i is the set of joint candidates sharing the same
/// opponent profile x_{-i}; its members are `base + k * stride(i)` for
/// k in [0, strategies(i)).
class JointSpace {
 public:
  JointSpace() = default;
  explicit JointSpace(std::vector<Eigen::MatrixXd> per_agent,
                      std::size_t cap = kDefaultCandidateCap);

  std::size_t agents() const { return per_agent_.size(); }
  std::size_t size() const { return size_; }
  std::size_t strategies(std::size_t agent) const { return per_agent_[agent].rows(); }
  std::size_t dim(std::size_t agent) const { return per_agent_[agent].cols(); }
  std::size_t total_dim() const { return total_dim_; }
  std::size_t offset(std::size_t agent) const { return offsets_[agent]; }
  std::size_t stride(std::size_t agent) const { return strides_[agent]; }

  const Eigen::MatrixXd& agent_strategies(std::size_t agent) const { return per_agent_[agent]; }

  /// Row r holds the concatenated coordinates of candidate r.
  const Eigen::MatrixXd& features() const { return features_; }
  Eigen::VectorXd coords(CandidateId id) const { return features_.row(id).transpose(); }

  std::size_t strategy_index(CandidateId id, std::size_t agent) const {
    return (id / strides_[agent]) % per_agent_[agent].rows();
  }
  std::vector<std::size_t> profile(CandidateId id) const;
  CandidateId id_of(std::span<const std::size_t> profile) const;

  /// Candidate sharing x_{-i} with `id` whose own strategy index is zero.
  CandidateId slice_base(std::size_t agent, CandidateId id) const {
    return id - strategy_index(id, agent) * strides_[agent];
  }
  std::vector<CandidateId> slice(std::size_t agent, CandidateId id) const;
  /// All slices of one agent, each an ordered id list; they partition [0, size()).
  std::vector<std::vector<CandidateId>> slice_index(std::size_t agent) const;
  /// Every slice base of one agent, in increasing order.
  std::vector<CandidateId> slice_bases(std::size_t agent) const;

  /// Candidate whose coordinates match `x` to within `tol` (max-abs).
  std::optional<CandidateId> find(const Eigen::VectorXd& x, double tol = 1e-9) const;

 private:
  std::vector<Eigen::MatrixXd> per_agent_;
  std::vector<std::size_t> strides_;
  std::vector<std::size_t> offsets_;
  std::size_t size_ = 0;
  std::size_t total_dim_ = 0;
  Eigen::MatrixXd features_;
};

}  // namespace nashbo
