#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nashbo/experiment.hpp"

namespace nashbo {

inline constexpr const char* kMetadataFile = "metadata.json";

/// trial,algo,iter,candidate_id,x0..x{d-1},f_exact,min_f_exact,roi_size,ci_width,info_gain_total,beta,wall_ms,warnings
std::string trace_header(std::size_t coord_dim);
/// iter,alpha,alpha_global,width_chain,posterior_width,roi_slices_match,envelope_reset,eg_draw,explored,exploit_choice
std::string rounds_header();

std::string trace_file_name(const std::string& algo, std::size_t trial);
std::string rounds_file_name(const std::string& algo, std::size_t trial);

struct RunMetadata {
  std::string algo;
  double epsilon = 0.1;
  double tau = 1.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string file;
  std::string rounds_file;
  bool ok = true;
  std::string error;
  CandidateId reported = 0;
  double reported_loss = 0.0;
  double final_info_gain = 0.0;
  std::size_t final_roi_size = 0;
  std::vector<CandidateId> initial_design;
  std::vector<std::string> warnings;
};

struct TraceMetadata {
  std::string version;
  std::string game;
  std::size_t agents = 0;
  double noise_variance = 0.0;
  double beta = 0.0;
  bool envelopes = true;
  std::string envelope_scope = "refit";
  std::size_t horizon = 0;
  std::size_t init_count = 0;
  std::size_t trials = 0;
  std::uint64_t base_seed = 0;
  std::uint64_t instance_seed = 0;
  std::size_t domain_size = 0;
  std::size_t coord_dim = 0;
  std::vector<RunMetadata> runs;
};

struct LoadedTraces {
  TraceMetadata meta;
  std::vector<TraceTable> tables;  // metadata run order
};

/// One trace file and one per-round side table per successful run, plus
/// metadata.json. Creates `dir` if needed; I/O errors name the path.
void write_traces(const TraceSet& traces, const std::filesystem::path& dir);

void write_trace_file(const TraceTable& table, std::size_t coord_dim, const std::filesystem::path& path);
TraceTable read_trace_file(const std::filesystem::path& path);
std::vector<RoundDiagnostics> read_rounds_file(const std::filesystem::path& path);

/// Reads metadata.json and every trace it lists.
LoadedTraces read_traces(const std::filesystem::path& dir);

}  // namespace nashbo
