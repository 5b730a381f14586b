#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nashbo/experiment.hpp"

namespace nashbo {

struct AlgorithmSummary {
  std::string algo;
  std::size_t trials = 0;
  std::vector<std::size_t> iters;
  std::vector<double> mean;         // mean f_exact per iteration
  std::vector<double> stderr_mean;  // sample std / sqrt(trials); 0 for one trial
  std::vector<double> best_mean;    // same for min_f_exact
  std::vector<double> best_stderr;
  double final_median = 0.0;        // median over trials of the last f_exact
  double final_best_median = 0.0;
};

struct Summary {
  /// Evaluations spent before round 1; the x axis is offset + iter.
  std::size_t init_count = 0;
  std::vector<AlgorithmSummary> algorithms;  // first-appearance order

  bool empty() const { return algorithms.empty(); }
};

/// Groups tables by algorithm. Throws ConfigError when the traces of one
/// algorithm differ in length or iteration numbering.
Summary summarize(const std::vector<TraceTable>& tables, std::size_t init_count = 0);

/// algo,iter,evaluations,mean_f,stderr_f,mean_best_f,stderr_best_f
void write_summary_csv(const Summary& summary, const std::filesystem::path& path);

struct PlotOptions {
  bool log_scale = false;
  bool best_so_far = false;
  std::string title;
  double width = 720.0;
  double height = 440.0;
};

/// SVG line plot: mean exact loss against function evaluations, one line and
/// one shaded +/- stderr band per algorithm. Empty summary: throws, writes nothing.
void emit_plot(const Summary& summary, const std::filesystem::path& path, const PlotOptions& options = {});
std::string render_plot(const Summary& summary, const PlotOptions& options = {});

}  // namespace nashbo
