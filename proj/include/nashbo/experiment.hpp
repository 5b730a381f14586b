#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nashbo/config.hpp"
#include "nashbo/solver.hpp"

namespace nashbo {

struct RunRecord {
  AlgorithmSpec algorithm;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::optional<RunResult> result;
  std::string error;  // set when the run threw

  bool ok() const { return result.has_value(); }
};

/// One trace table: what is written to and read back from a trace file.
struct TraceTable {
  std::string algo;
  std::size_t trial = 0;
  std::vector<TraceRecord> records;
  std::vector<RoundDiagnostics> rounds;  // empty if the side table is missing
};

struct TraceSet {
  ExperimentConfig config;
  double beta = 0.0;
  std::size_t domain_size = 0;
  std::size_t coord_dim = 0;
  /// Canonical order: algorithm order of the config, then trial index.
  std::vector<RunRecord> runs;

  bool any_failed() const;
  std::vector<TraceTable> tables() const;
};

/// Called after each finished run (from worker threads, serialized).
using RunProgress = std::function<void(const RunRecord&)>;

/// Runs every (algorithm, trial) pair with seed base_seed + trial on up to
/// config.workers threads. Failed runs keep their error message; the others
/// still complete.
TraceSet run_experiment(const ExperimentConfig& config, const RunProgress& progress = {});

}  // namespace nashbo
