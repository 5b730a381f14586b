#include "nashbo/summary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "nashbo/errors.hpp"

namespace nashbo {

namespace {

void mean_and_stderr(const std::vector<double>& xs, double& mean, double& se) {
  const double k = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  mean = sum / k;
  if (xs.size() < 2) {
    se = 0.0;
    return;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t k = xs.size();
  return k % 2 ? xs[k / 2] : 0.5 * (xs[k / 2 - 1] + xs[k / 2]);
}

}  // namespace

Summary summarize(const std::vector<TraceTable>& tables, std::size_t init_count) {
  Summary out;
  out.init_count = init_count;
  std::vector<std::string> order;
  std::map<std::string, std::vector<const TraceTable*>> groups;
  for (const auto& t : tables) {
    if (!groups.count(t.algo)) order.push_back(t.algo);
    groups[t.algo].push_back(&t);
  }
  for (const auto& algo : order) {
    const auto& group = groups[algo];
    const std::size_t T = group.front()->records.size();
    for (const auto* t : group) {
      if (t->records.size() != T) {
        throw ConfigError(fmt::format("traces of '{}' have different lengths ({} vs {})", algo, T,
                                      t->records.size()));
      }
      for (std::size_t k = 0; k < T; ++k) {
        if (t->records[k].iter != group.front()->records[k].iter) {
          throw ConfigError(fmt::format("traces of '{}' disagree on iteration numbering", algo));
        }
      }
    }
    if (T == 0) throw ConfigError(fmt::format("traces of '{}' are empty", algo));

    AlgorithmSummary s;
    s.algo = algo;
    s.trials = group.size();
    std::vector<double> f(group.size()), best(group.size());
    for (std::size_t k = 0; k < T; ++k) {
      for (std::size_t j = 0; j < group.size(); ++j) {
        f[j] = group[j]->records[k].f_exact;
        best[j] = group[j]->records[k].min_f_exact;
      }
      double m = 0, se = 0, bm = 0, bse = 0;
      mean_and_stderr(f, m, se);
      mean_and_stderr(best, bm, bse);
      s.iters.push_back(group.front()->records[k].iter);
      s.mean.push_back(m);
      s.stderr_mean.push_back(se);
      s.best_mean.push_back(bm);
      s.best_stderr.push_back(bse);
    }
    s.final_median = median(f);
    s.final_best_median = median(best);
    out.algorithms.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(const Summary& summary, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << "algo,iter,evaluations,mean_f,stderr_f,mean_best_f,stderr_best_f\n";
  for (const auto& s : summary.algorithms) {
    for (std::size_t k = 0; k < s.iters.size(); ++k) {
      out << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.algo, s.iters[k],
                         summary.init_count + s.iters[k], s.mean[k], s.stderr_mean[k], s.best_mean[k],
                         s.best_stderr[k]);
    }
  }
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace nashbo
