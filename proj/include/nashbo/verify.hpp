#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nashbo/trace_io.hpp"

namespace nashbo {

struct CheckOutcome {
  std::string run;    // "<algo>_trial<k>"
  std::string check;  // e.g. "running_min", "certificate_sum"
  bool passed = true;
  /// High-probability statements are reported but do not fail verification.
  bool advisory = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckOutcome> checks;

  bool passed() const;
  std::size_t failures() const;
};

/// Invariants over recorded traces: iteration numbering, running-min
/// monotonicity, ROI nesting, selection logs of the baselines, and the
/// confidence-width certificates for ARISE-Global runs with envelopes.
VerifyReport verify_traces(const LoadedTraces& traces);
VerifyReport verify_trace_dir(const std::filesystem::path& dir);

}  // namespace nashbo
