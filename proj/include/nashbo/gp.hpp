#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nashbo/kernel.hpp"

namespace nashbo {

struct PosteriorBatch {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// Exact GP regression with zero prior mean (optionally centred targets).
///
/// Holds the lower Cholesky factor L of K + (sigma^2 + jitter) I and the
/// forward-solved targets w = L^{-1} y. Observations are appended by bordering
/// the factor; earlier rows of L never change unless the jitter has to be
/// escalated, in which case the whole factor is rebuilt.
class SurrogateModel {
 public:
  SurrogateModel() = default;
  SurrogateModel(std::size_t dim, KernelParams params, bool center_targets = false);

  /// Builds the factor in one shot from a full dataset.
  static SurrogateModel build(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                              KernelParams params, bool center_targets = false);

  /// Same observations under new hyperparameters.
  SurrogateModel with_params(KernelParams params) const;

  /// Appends one observation. Throws ModelError when no jitter in the
  /// schedule makes the kernel matrix factorizable.
  void update(const Eigen::VectorXd& x, double y);

  std::pair<double, double> posterior(const Eigen::VectorXd& x) const;
  /// Row-wise posterior over a candidate matrix, one factor reuse.
  PosteriorBatch posterior_batch(const Eigen::MatrixXd& candidates) const;

  /// 0.5 log det(I + sigma^{-2} K) of the observed inputs. Requires sigma^2 > 0.
  double info_gain() const;

  std::size_t size() const { return static_cast<std::size_t>(targets_.size()); }
  std::size_t dim() const { return dim_; }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  const KernelParams& params() const { return params_; }
  bool centers_targets() const { return center_; }
  double target_offset() const { return offset_; }
  /// Lower-triangular factor, size() x size().
  Eigen::MatrixXd factor() const { return factor_.topLeftCorner(size(), size()); }
  /// L^{-1} (y - offset).
  Eigen::VectorXd solved_targets() const;
  double jitter() const { return jitter_; }
  /// Number of times the jitter had to be raised since construction.
  std::size_t jitter_escalations() const { return escalations_; }

 private:
  void refactor();
  void recompute_solved();
  void reserve(std::size_t rows);

  std::size_t dim_ = 0;
  KernelParams params_;
  bool center_ = false;
  double offset_ = 0.0;
  double jitter_ = 0.0;
  std::size_t escalations_ = 0;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  Eigen::MatrixXd factor_;  // capacity x capacity, top-left size() block valid
  Eigen::VectorXd solved_;  // forward-solved centred targets
};

/// Base jitter 1e-8 * signal_variance; escalations multiply by 10 up to 1e-4 * signal_variance.
inline constexpr double kJitterBase = 1e-8;
inline constexpr double kJitterCeiling = 1e-4;

/// Posterior over a fixed candidate set, extended incrementally as the model
/// grows and recomputed in full when the hyperparameters or jitter change.
/// Stores V = L^{-1} K(X, C)^T column-per-observation (|C| x t).
class CachedPosterior {
 public:
  explicit CachedPosterior(const Eigen::MatrixXd& candidates);

  /// Brings the cache in line with `model` and returns the posterior over
  /// every candidate.
  PosteriorBatch evaluate(const SurrogateModel& model);

  std::size_t full_recomputes() const { return full_recomputes_; }

 private:
  void recompute(const SurrogateModel& model);
  void extend(const SurrogateModel& model);

  const Eigen::MatrixXd* candidates_;
  Eigen::MatrixXd projected_;    // |C| x capacity
  Eigen::VectorXd sq_norms_;     // running row sums of squares of projected_
  std::size_t rows_ = 0;
  std::optional<KernelParams> params_;
  double jitter_ = -1.0;
  std::size_t full_recomputes_ = 0;
};

/// Negative log marginal likelihood of (centred) targets under `params`,
/// with the same jitter schedule as the model. +inf when unfactorizable.
double negative_log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                        const KernelParams& params, bool center_targets = false);

struct FitOptions {
  /// Maximum number of NLML evaluations across all starts.
  std::size_t search_budget = 120;
  bool fit_noise = false;
  /// One lengthscale per dimension instead of a shared one.
  bool ard = false;
  bool center_targets = false;
  double log_lengthscale_min = -4.605170185988091;  // log 0.01
  double log_lengthscale_max = 2.302585092994046;   // log 10
  double log_signal_min = -4.605170185988091;
  double log_signal_max = 2.302585092994046;
  double log_noise_min = -13.815510557964274;       // log 1e-6
  double log_noise_max = 0.0;
};

struct FitResult {
  KernelParams params;
  double nlml = 0.0;
  double incumbent_nlml = 0.0;
  std::size_t evaluations = 0;
  std::optional<std::string> warning;
};

/// Multi-start Nelder-Mead over log hyperparameters inside the configured
/// box. The incumbent is always a candidate, so the returned NLML never
/// exceeds the incumbent's.
FitResult fit_hyperparams(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                          const KernelParams& incumbent, const FitOptions& options);

}  // namespace nashbo
