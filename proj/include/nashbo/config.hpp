#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nashbo/games.hpp"
#include "nashbo/solver.hpp"

namespace nashbo {

/// Environment variable that overrides the configured output directory
/// (the `--out` flag still wins).
inline constexpr const char* kOutDirEnv = "NASHBO_OUT_DIR";

enum class BetaMode { Practical, Theoretical };

struct BetaSetting {
  BetaMode mode = BetaMode::Practical;
  /// Practical value; unset means 1 for Hotelling and 2 otherwise.
  std::optional<double> value;
  double delta = 0.05;
};

struct ExperimentConfig {
  GameSpec game = GameSpec::defaults(GameKind::Saddle);
  std::vector<AlgorithmSpec> algorithms;
  BetaSetting beta;
  std::size_t horizon = 100;
  std::size_t init_count = 10;
  std::size_t trials = 10;
  std::uint64_t base_seed = 0;
  bool envelopes = true;
  EnvelopeScope envelope_scope = EnvelopeScope::SinceRefit;
  GpSettings gp;
  std::size_t workers = 1;
  bool record_timing = false;
  std::optional<std::filesystem::path> output_dir;
  std::string source = "<defaults>";

  /// The five algorithms in canonical order.
  static std::vector<AlgorithmSpec> all_algorithms();

  /// Every violated constraint, empty when valid.
  std::vector<std::string> violations() const;
  /// Throws ConfigError listing all violations.
  void validate() const;

  /// The scaling actually used, given the size of the candidate set.
  double resolved_beta(std::size_t domain_size) const;
  SolverConfig solver_config(const AlgorithmSpec& algorithm, double beta) const;
};

/// Parses the INI-style config; see README for the keys. Throws ConfigError
/// with line or key diagnostics.
ExperimentConfig parse_config(std::string_view text, std::string source = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Comma-separated `kind[:param=value[:param=value]]`, e.g.
/// `arise,epsilon-greedy:epsilon=0.2,prediction:tau=0.5`.
std::vector<AlgorithmSpec> parse_algorithm_list(std::string_view text);
std::string format_algorithm(const AlgorithmSpec& algorithm);

/// --out flag, then $NASHBO_OUT_DIR, then the config value, then "runs".
std::filesystem::path resolve_output_dir(const ExperimentConfig& config,
                                         const std::optional<std::filesystem::path>& flag);

}  // namespace nashbo
