#include "nashbo/experiment.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace nashbo {

bool TraceSet::any_failed() const {
  for (const auto& r : runs) {
    if (!r.ok()) return true;
  }
  return false;
}

std::vector<TraceTable> TraceSet::tables() const {
  std::vector<TraceTable> out;
  for (const auto& r : runs) {
    if (!r.ok()) continue;
    out.push_back({r.algorithm.label(), r.trial, r.result->trace, r.result->diagnostics});
  }
  return out;
}

TraceSet run_experiment(const ExperimentConfig& config, const RunProgress& progress) {
  config.validate();
  const GameOracle game(config.game);

  TraceSet set;
  set.config = config;
  set.domain_size = game.space().size();
  set.coord_dim = game.space().total_dim();
  set.beta = config.resolved_beta(set.domain_size);

  for (const auto& algo : config.algorithms) {
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      RunRecord rec;
      rec.algorithm = algo;
      rec.trial = trial;
      rec.seed = config.base_seed + trial;
      set.runs.push_back(std::move(rec));
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= set.runs.size()) return;
      RunRecord& rec = set.runs[k];
      try {
        rec.result = run(game, config.solver_config(rec.algorithm, set.beta), rec.seed);
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      if (progress) {
        std::lock_guard lock(report_mutex);
        progress(rec);
      }
    }
  };

  const std::size_t threads = std::min(config.workers, set.runs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return set;
}

}  // namespace nashbo
