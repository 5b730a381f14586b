#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nashbo/bounds.hpp"
#include "nashbo/games.hpp"
#include "nashbo/gp.hpp"

namespace nashbo {

enum class AlgorithmKind { Arise, AriseGlobal, Prediction, EpsilonGreedy, SurLite };

std::string_view to_string(AlgorithmKind kind);
AlgorithmKind parse_algorithm_kind(std::string_view name);

struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::Arise;
  double epsilon = 0.1;  // EpsilonGreedy exploration probability
  double tau = 1.0;      // Prediction/EpsilonGreedy spread weight

  /// Canonical name, e.g. "arise" or "epsilon-greedy"; used in file names.
  std::string label() const { return std::string(to_string(kind)); }
};

struct RefitSchedule {
  std::size_t every_round_until = 25;
  std::size_t period = 5;

  bool due(std::size_t round) const {
    if (round <= every_round_until) return true;
    return period > 0 && (round - every_round_until) % period == 0;
  }
};

struct GpSettings {
  KernelFamily family = KernelFamily::SquaredExponential;
  bool ard = false;
  double initial_lengthscale = 0.25;
  double initial_signal_variance = 1.0;
  std::size_t fit_budget = 120;
  bool fit_noise = false;
  bool center_targets = false;
  RefitSchedule refit;
};

/// How far back the confidence-interval intersection reaches.
enum class EnvelopeScope {
  SinceRefit,  // restart whenever the hyperparameters change
  WholeRun,    // every round since the start
};

std::string_view to_string(EnvelopeScope scope);
EnvelopeScope parse_envelope_scope(std::string_view name);

struct SolverConfig {
  AlgorithmSpec algorithm;
  double beta = 2.0;
  std::size_t horizon = 100;
  std::size_t init_count = 10;
  bool envelopes = true;
  EnvelopeScope envelope_scope = EnvelopeScope::SinceRefit;
  GpSettings gp;
  /// Fill wall_ms in trace records. Off by default so traces are reproducible byte for byte.
  bool record_timing = false;
  /// Retain every round's ROI membership in the result.
  bool keep_history = false;
};

/// 2 ln(n |D| T / delta).
double theoretical_beta(std::size_t agents, std::size_t domain_size, std::size_t horizon, double delta);

struct RoiState {
  Region active;
  std::vector<std::size_t> history;  // size after each update
  std::vector<double> thresholds;    // min(min ucb_f, 0) per update
  std::size_t fallbacks = 0;

  static RoiState initial(std::size_t domain_size);
};

/// Keeps the members of `previous` whose lcb_f is at most
/// min(min_x ucb_f(x), 0), with `full` computed over the whole domain.
/// An empty result falls back to the previous member with the smallest lcb_f.
RoiState update_roi(const BoundsTable& full, const RoiState& previous, bool* fell_back = nullptr);

struct Selection {
  CandidateId id = 0;
  /// Acquisition value at the choice (ARISE variants), NaN otherwise.
  double alpha = std::numeric_limits<double>::quiet_NaN();
  /// EpsilonGreedy uniform draw, NaN for other algorithms.
  double draw = std::numeric_limits<double>::quiet_NaN();
  bool explored = false;
  /// What the exploitation rule would have picked (EpsilonGreedy).
  CandidateId exploit_choice = 0;
};

struct SelectionContext {
  const JointSpace& space;
  const BoundsTable& full;  // bounds over the whole domain, this round
  std::span<const PosteriorBatch> posteriors;
  const Region& roi;
  const AlgorithmSpec& algorithm;
};

/// Picks the next query; ties go to the lowest candidate id.
Selection select_next(const SelectionContext& ctx, std::mt19937_64& rng);

/// Approximate loss from posterior means: max_i [slice mean + tau * slice std - mu_i(x)].
std::vector<double> prediction_scores(const JointSpace& space, std::span<const PosteriorBatch> posteriors,
                                      double tau);
/// Loss of the game whose utilities are the posterior means.
std::vector<double> plugin_loss(const JointSpace& space, std::span<const PosteriorBatch> posteriors);

struct TraceRecord {
  std::size_t iter = 0;
  CandidateId candidate = 0;
  std::vector<double> coords;
  double f_exact = 0.0;
  double min_f_exact = 0.0;
  std::size_t roi_size = 0;
  double ci_width = 0.0;
  double info_gain_total = 0.0;
  double beta = 0.0;
  double wall_ms = 0.0;
  std::vector<std::string> warnings;

  bool operator==(const TraceRecord&) const = default;
};

struct RoundDiagnostics {
  std::size_t iter = 0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  /// max_x alpha(x, X) this round.
  double alpha_global = 0.0;
  /// (n + 1) * sum_i (ucb_u_i - lcb_u_i) at the selected point.
  double width_chain = 0.0;
  /// sum_i 2 sqrt(beta) sigma_i at the selected point (raw posterior).
  double posterior_width = 0.0;
  /// Partial-max bounds over the ROI equal those over the domain for every ROI member.
  bool roi_slices_match = true;
  /// The envelope history was discarded this round (hyperparameters changed).
  bool envelope_reset = false;
  double draw = std::numeric_limits<double>::quiet_NaN();
  bool explored = false;
  CandidateId exploit_choice = 0;

  bool operator==(const RoundDiagnostics&) const = default;
};

struct RunResult {
  AlgorithmSpec algorithm;
  std::uint64_t seed = 0;
  std::size_t agents = 0;
  double noise_variance = 0.0;
  double beta = 0.0;
  bool envelopes = true;
  std::vector<CandidateId> initial_design;
  std::vector<TraceRecord> trace;
  std::vector<RoundDiagnostics> diagnostics;
  CandidateId reported = 0;
  double reported_loss = 0.0;
  Region final_roi;
  std::vector<std::vector<CandidateId>> roi_history;
  std::vector<std::string> warnings;
  double final_info_gain = 0.0;
};

/// Sequential learner for one (algorithm, seed) pair.
class Solver {
 public:
  Solver(const GameOracle& game, SolverConfig config, std::uint64_t seed);

  /// Queries the initial design D^0.
  void initialize();
  /// One round: refit, bounds, envelope, ROI, select, query, record.
  void step();
  /// Runs initialize() if needed and then steps until the horizon.
  RunResult run();

  std::size_t round() const { return round_; }
  const std::vector<SurrogateModel>& models() const { return models_; }
  const RoiState& roi() const { return roi_; }
  const BoundsTable& last_bounds() const { return last_full_; }
  const std::vector<PosteriorBatch>& last_posteriors() const { return posteriors_; }

  /// Final recommendation: ROI member minimizing lcb_f (ARISE variants),
  /// minimizer of the Prediction score (Prediction, EpsilonGreedy) or of the
  /// plug-in posterior-mean loss (SurLite).
  CandidateId report();

 private:
  void observe(CandidateId id, std::vector<std::string>* warnings);
  /// True when any model's hyperparameters changed.
  bool refit(std::vector<std::string>& warnings);

  const GameOracle& game_;
  SolverConfig config_;
  std::mt19937_64 rng_;
  std::vector<SurrogateModel> models_;
  std::vector<CachedPosterior> caches_;
  std::vector<PosteriorBatch> posteriors_;
  EnvelopeState envelope_;
  RoiState roi_;
  BoundsTable last_full_;
  std::size_t round_ = 0;
  bool initialized_ = false;
  double best_loss_ = std::numeric_limits<double>::infinity();
  RunResult result_;
};

RunResult run(const GameOracle& game, const SolverConfig& config, std::uint64_t seed);

/// Inputs of the per-run confidence-width certificates.
struct CertificateInputs {
  std::size_t agents = 0;
  double noise_variance = 0.0;
  double beta = 0.0;
  std::vector<double> alphas;  // alpha_t per round
  std::vector<double> losses;  // exact f(x^t) per round
  double final_ci_width = 0.0;
  double info_gain = 0.0;      // summed over agents, final round
};

struct CertificateReport {
  double c1 = 0.0;      // 8 / ln(1 + sigma^-2)
  double c1_hat = 0.0;  // (n + 1)^2 * c1
  double sum_alpha_sq = 0.0;
  double sum_bound = 0.0;
  bool sum_ok = false;
  double final_width = 0.0;
  double width_bound = 0.0;
  bool width_ok = false;
  double cumulative_regret = 0.0;
  double regret_bound = 0.0;
  bool regret_ok = false;

  bool passed() const { return sum_ok && width_ok && regret_ok; }
};

CertificateInputs certificate_inputs(const RunResult& result);

/// Checks (a) sum_t alpha_t^2 <= (n+1)^2 C1 beta Gamma, (b) final CI width
/// <= sqrt((n+1)^2 C1 beta Gamma / T), (c) sum_t f(x^t) <= sqrt(T beta Gamma C1_hat),
/// with Gamma the empirical information gain of the queried set.
CertificateReport verify_round_certificates(const CertificateInputs& inputs);

}  // namespace nashbo
