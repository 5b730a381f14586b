// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: nashbo_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "nashbo/config.hpp"
#include "nashbo/experiment.hpp"
#include "nashbo/games.hpp"
#include "nashbo/gp.hpp"
#include "nashbo/solver.hpp"
#include "nashbo/trace_io.hpp"

using namespace nashbo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_s;  // 0 means no runtime limit
  std::function<Outcome()> check;
};

// ROI membership per round of every envelope-enabled run, gathered for criterion 4.
struct NestingLog {
  std::size_t rounds = 0;
  std::size_t violations = 0;
  std::size_t runs = 0;

  void add(const RunResult& r) {
    if (!r.envelopes) return;
    ++runs;
    for (std::size_t k = 1; k < r.roi_history.size(); ++k) {
      ++rounds;
      const auto& prev = r.roi_history[k - 1];
      for (CandidateId id : r.roi_history[k]) {
        if (!std::binary_search(prev.begin(), prev.end(), id)) {
          ++violations;
          break;
        }
      }
    }
  }
};

NestingLog g_nesting;

RunResult tracked_run(const GameOracle& game, SolverConfig cfg, std::uint64_t seed) {
  cfg.keep_history = true;
  RunResult r = run(game, cfg, seed);
  g_nesting.add(r);
  return r;
}

SolverConfig solver(AlgorithmKind kind, double beta, std::size_t horizon = 100, std::size_t init = 10) {
  SolverConfig c;
  c.algorithm.kind = kind;
  c.beta = beta;
  c.horizon = horizon;
  c.init_count = init;
  return c;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

CandidateId locate(const GameOracle& g, std::vector<double> x) {
  const auto id = g.space().find(Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
  if (!id) throw std::runtime_error("grid point missing");
  return *id;
}

// Independent of the library's slice bookkeeping: enumerate deviations through profiles.
double slice_oracle_loss(const GameOracle& g, CandidateId id) {
  const auto& s = g.space();
  double f = 0.0;
  for (std::size_t i = 0; i < s.agents(); ++i) {
    auto prof = s.profile(id);
    double best = -INFINITY;
    for (std::size_t k = 0; k < s.strategies(i); ++k) {
      prof[i] = k;
      best = std::max(best, g.utility(s.id_of(prof), i));
    }
    f += best - g.utility(id, i);
  }
  return f;
}

Outcome gp_equivalence() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> tdist(1, 40), ddist(2, 6);
  double worst_mean = 0.0, worst_var = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int t = tdist(rng), d = ddist(rng);
    Eigen::MatrixXd X(t, d), C(60, d);
    Eigen::VectorXd y(t);
    for (int r = 0; r < t; ++r) {
      for (int c = 0; c < d; ++c) X(r, c) = u(rng);
      y(r) = std::cos(4 * X(r, 0)) * X(r, d - 1) + 0.1 * (u(rng) - 0.5);
    }
    for (int r = 0; r < C.rows(); ++r)
      for (int c = 0; c < d; ++c) C(r, c) = u(rng);

    KernelParams p;
    p.lengthscales = {0.15 + 0.05 * (rep % 7)};
    p.signal_variance = 0.5 + 0.25 * (rep % 4);
    p.noise_variance = 0.01;
    SurrogateModel m(d, p);
    for (int r = 0; r < t; ++r) m.update(X.row(r).transpose(), y(r));
    const PosteriorBatch got = m.posterior_batch(C);

    // Dense reference: mean = k^T (K + s I)^{-1} y, var = k(c,c) - k^T (K + s I)^{-1} k,
    // with s the noise plus whatever diagonal jitter the model actually used.
    const double ell2 = p.lengthscales[0] * p.lengthscales[0];
    auto kern = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      return p.signal_variance * std::exp(-0.5 * (a - b).squaredNorm() / ell2);
    };
    Eigen::MatrixXd K(t, t);
    for (int a = 0; a < t; ++a)
      for (int b = 0; b < t; ++b) K(a, b) = kern(X.row(a), X.row(b));
    K.diagonal().array() += p.noise_variance + m.jitter();
    const auto lu = K.fullPivLu();
    const Eigen::VectorXd w = lu.solve(y);
    for (int r = 0; r < C.rows(); ++r) {
      Eigen::VectorXd k(t);
      for (int a = 0; a < t; ++a) k(a) = kern(X.row(a), C.row(r));
      worst_mean = std::max(worst_mean, std::abs(k.dot(w) - got.mean(r)));
      worst_var = std::max(worst_var, std::abs(p.signal_variance - k.dot(lu.solve(k)) - got.variance(r)));
    }
  }
  return {worst_mean <= 1e-8 && worst_var <= 1e-8,
          fmt::format("50 datasets, max |dmean| = {:.2e}, max |dvar| = {:.2e} (tol 1e-8)", worst_mean, worst_var)};
}

Outcome spot_values() {
  const GameOracle saddle(GameSpec::defaults(GameKind::Saddle));
  const GameOracle rps(GameSpec::defaults(GameKind::RockPaperScissors));
  const GameOracle hot(GameSpec::defaults(GameKind::Hotelling));
  const CandidateId ne = locate(saddle, {0.5, 0.5}), corner = locate(saddle, {0.0, 0.0});
  const CandidateId rock = locate(rps, {1, 0, 0, 1, 0, 0});
  const double tol_h = 2.0 / hot.spec().hotelling_m;

  std::vector<std::string> bad;
  auto expect = [&](const std::string& what, double got, double want, double tol) {
    if (!(std::abs(got - want) <= tol)) bad.push_back(fmt::format("{} = {:.15g}, want {}", what, got, want));
  };
  expect("f_saddle(0.5,0.5)", saddle.exact_loss(ne), 0.0, 0.0);
  expect("f_saddle(0,0)", saddle.exact_loss(corner), 0.5, 1e-12);
  expect("f_rps(rock,rock)", rps.exact_loss(rock), 2.0, 1e-12);
  expect("oracle f_saddle(0.5,0.5)", slice_oracle_loss(saddle, ne), 0.0, 0.0);
  expect("oracle f_saddle(0,0)", slice_oracle_loss(saddle, corner), 0.5, 1e-12);
  expect("oracle f_rps(rock,rock)", slice_oracle_loss(rps, rock), 2.0, 1e-12);
  std::size_t symmetric = 0;
  for (std::size_t k = 0; k < hot.space().strategies(0); ++k) {
    const CandidateId id = hot.space().id_of(std::vector<std::size_t>{k, k});
    const auto u = hot.exact_utilities(id);
    expect(fmt::format("hotelling u1 at symmetric profile {}", k), u[0], 0.5, tol_h);
    expect(fmt::format("hotelling u2 at symmetric profile {}", k), u[1], 0.5, tol_h);
    ++symmetric;
  }
  std::string detail = fmt::format("saddle 0 / 0.5, rps 2, hotelling {} symmetric profiles within 2/m", symmetric);
  if (!bad.empty()) detail = bad.front() + (bad.size() > 1 ? fmt::format(" (+{} more)", bad.size() - 1) : "");
  return {bad.empty(), detail};
}

Outcome containment() {
  const GameOracle g(GameSpec::defaults(GameKind::Saddle));
  const CandidateId ne = locate(g, {0.5, 0.5});
  const double beta = theoretical_beta(2, g.space().size(), 60, 0.05);
  std::size_t covered = 0, fallbacks = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto r = tracked_run(g, solver(AlgorithmKind::Arise, beta, 60), seed);
    bool all = true;
    for (const auto& roi : r.roi_history) all = all && std::binary_search(roi.begin(), roi.end(), ne);
    covered += all;
    for (const auto& rec : r.trace)
      fallbacks += std::count(rec.warnings.begin(), rec.warnings.end(), "roi_fallback");
  }
  return {covered >= 95, fmt::format("beta = {:.4f}, NE in every R^t for {}/100 runs (need 95), {} ROI fallbacks",
                                     beta, covered, fallbacks)};
}

Outcome nesting() {
  return {g_nesting.runs > 0 && g_nesting.violations == 0,
          fmt::format("{} rounds over {} envelope runs, {} rounds with R^t not inside R^(t-1)", g_nesting.rounds,
                      g_nesting.runs, g_nesting.violations)};
}

Outcome certificates() {
  const GameOracle g(GameSpec::defaults(GameKind::Saddle));
  std::size_t ok_a = 0, ok_b = 0;
  double c1_hat = 0.0, worst_a = 0.0, worst_b = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = tracked_run(g, solver(AlgorithmKind::AriseGlobal, 2.0), seed);
    const auto rep = verify_round_certificates(certificate_inputs(r));
    ok_a += rep.sum_ok;
    ok_b += rep.width_ok;
    c1_hat = rep.c1_hat;
    worst_a = std::max(worst_a, rep.sum_alpha_sq / rep.sum_bound);
    worst_b = std::max(worst_b, rep.final_width / rep.width_bound);
  }
  const bool c1_ok = std::abs(c1_hat - 72.0 / std::log(101.0)) < 1e-12;
  return {ok_a == 10 && ok_b == 10 && c1_ok,
          fmt::format("C1_hat = {:.4f}; (a) held in {}/10 (max lhs/rhs {:.3g}), (b) held in {}/10 (max lhs/rhs {:.3g})",
                      c1_hat, ok_a, worst_a, ok_b, worst_b)};
}

struct GameRuns {
  std::map<std::string, std::vector<double>> reported;
  std::size_t arise_ne = 0;
};

GameRuns compare_on(GameKind kind, std::size_t trials) {
  const GameOracle g(GameSpec::defaults(kind));
  const double beta = kind == GameKind::Hotelling ? 1.0 : 2.0;
  const auto eq = g.equilibria();
  GameRuns out;
  for (const auto kindA : {AlgorithmKind::Arise, AlgorithmKind::Prediction, AlgorithmKind::SurLite}) {
    for (std::uint64_t seed = 0; seed < trials; ++seed) {
      const auto r = tracked_run(g, solver(kindA, beta), seed);
      out.reported[std::string(to_string(kindA))].push_back(r.reported_loss);
      if (kindA == AlgorithmKind::Arise && std::find(eq.begin(), eq.end(), r.reported) != eq.end()) ++out.arise_ne;
    }
  }
  return out;
}

Outcome convergence() {
  const std::size_t trials = 10;
  const auto s = compare_on(GameKind::Saddle, trials);
  const auto h = compare_on(GameKind::Hotelling, trials);
  auto med = [](const GameRuns& r, const char* a) { return median(r.reported.at(a)); };
  const double sa = med(s, "arise"), sp = med(s, "prediction"), ss = med(s, "sur-lite");
  const double ha = med(h, "arise"), hp = med(h, "prediction"), hs = med(h, "sur-lite");
  const bool order = sa <= sp && sa <= ss && ha <= hp && ha <= hs;
  const bool saddle_level = sa <= 0.01;
  const bool ne_rate = s.arise_ne * 10 >= trials * 8;
  std::string why;
  if (!order) why += " ordering";
  if (!saddle_level) why += " saddle-median";
  if (!ne_rate) why += " NE-rate";
  return {order && saddle_level && ne_rate,
          fmt::format("median reported f: saddle arise {:.4g} / prediction {:.4g} / sur-lite {:.4g}; hotelling "
                      "arise {:.4g} / prediction {:.4g} / sur-lite {:.4g}; saddle NE reported {}/{} (need 80%){}",
                      sa, sp, ss, ha, hp, hs, s.arise_ne, trials, why.empty() ? "" : ";  failing:" + why)};
}

Outcome terminal_behavior() {
  auto spec = GameSpec::defaults(GameKind::Bimatrix);
  spec.noise_variance = 1e-4;
  const GameOracle g(spec);
  const auto eq = g.equilibria();
  double gap = INFINITY;
  for (CandidateId id = 0; id < g.space().size(); ++id)
    if (id != eq.front()) gap = std::min(gap, g.exact_loss(id));
  std::size_t settled = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto c = solver(AlgorithmKind::Arise, 2.0, 60, 3);
    const auto r = tracked_run(g, c, seed);
    bool only_ne = true;
    for (std::size_t k = 40; k < 60; ++k) only_ne = only_ne && r.trace[k].candidate == eq.front();
    settled += only_ne;
  }
  return {eq.size() == 1 && gap > 0.3 && settled >= 18,
          fmt::format("unique NE, min non-NE loss {:.3g}; only the NE queried in rounds 41-60 for {}/20 runs (need 18)",
                      gap, settled)};
}

std::map<std::string, std::string> directory_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

Outcome determinism() {
  std::size_t compared = 0;
  std::vector<std::string> differing;
  const fs::path root = fs::temp_directory_path() / "nashbo_acceptance_determinism";
  for (const char* text : {"[game]\nkind = saddle\n[run]\nalgorithms = arise, arise-global, prediction, "
                           "epsilon-greedy, sur-lite\ntrials = 2\n",
                           "[game]\nkind = bimatrix\nnoise_variance = 1e-4\n[run]\nalgorithms = arise\n"
                           "horizon = 60\ninit_count = 3\ntrials = 3\n",
                           "[game]\nkind = hotelling\n[run]\nalgorithms = arise\ntrials = 1\n"}) {
    const auto cfg = parse_config(text, "acceptance");
    fs::remove_all(root);
    write_traces(run_experiment(cfg), root / "a");
    write_traces(run_experiment(cfg), root / "b");
    const auto a = directory_bytes(root / "a"), b = directory_bytes(root / "b");
    for (const auto& [name, bytes] : a) {
      ++compared;
      const auto it = b.find(name);
      if (it == b.end() || it->second != bytes) differing.push_back(name);
    }
    if (a.size() != b.size()) differing.push_back("(file sets differ)");
  }
  fs::remove_all(root);
  return {differing.empty() && compared > 0,
          fmt::format("{} files written twice, {} differ{}", compared, differing.size(),
                      differing.empty() ? "" : ": " + differing.front())};
}

Outcome baselines() {
  const GameOracle g(GameSpec::defaults(GameKind::Saddle));
  std::size_t rounds = 0, exploit_rounds = 0, violations = 0, explored = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto c = solver(AlgorithmKind::EpsilonGreedy, 2.0);
    c.algorithm.epsilon = 0.1;
    const auto r = tracked_run(g, c, seed);
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
      const auto& d = r.diagnostics[k];
      ++rounds;
      explored += d.explored;
      if (d.draw >= 0.1) {
        ++exploit_rounds;
        if (d.explored || r.trace[k].candidate != d.exploit_choice) ++violations;
      } else if (!d.explored) {
        ++violations;
      }
    }
  }

  // Prediction, tau = 0, near-noiseless, every candidate already observed.
  std::size_t pred_ok = 0, pred_rounds = 0;
  for (const auto kind : {GameKind::Saddle, GameKind::Bimatrix}) {
    auto spec = GameSpec::defaults(kind);
    if (kind == GameKind::Saddle) spec.resolution = 7;
    spec.noise_variance = 1e-6;
    const GameOracle small(spec);
    double fmin = INFINITY;
    for (CandidateId id = 0; id < small.space().size(); ++id) fmin = std::min(fmin, small.exact_loss(id));
    auto c = solver(AlgorithmKind::Prediction, 2.0, 5, small.space().size());
    c.algorithm.tau = 0.0;
    const auto r = run(small, c, 1);
    for (const auto& rec : r.trace) {
      ++pred_rounds;
      pred_ok += rec.f_exact == fmin;
    }
  }
  return {violations == 0 && pred_ok == pred_rounds,
          fmt::format("epsilon-greedy: {} rounds, {} with draw >= 0.1, {} explored, {} log violations; "
                      "prediction tau=0: {}/{} picks are global minimizers",
                      rounds, exploit_rounds, explored, violations, pred_ok, pred_rounds)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  // Criterion 4 aggregates the runs of the others, so it goes last.
  const std::vector<Criterion> all = {
      {1, "gp-oracle-equivalence", 10, gp_equivalence},
      {2, "exact-loss-spot-values", 0, spot_values},
      {3, "roi-contains-ne", 300, containment},
      {5, "width-certificates", 0, certificates},
      {6, "convergence-ordering", 900, convergence},
      {7, "terminal-ne-queries", 0, terminal_behavior},
      {8, "byte-determinism", 0, determinism},
      {9, "baseline-sanity", 0, baselines},
      {4, "roi-nesting", 0, nesting},
  };

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt::format("{:.1f} s", secs);
    if (c.limit_s > 0) {
      timing += fmt::format(" / limit {:.0f} s", c.limit_s);
      if (secs > c.limit_s) {
        o.passed = false;
        o.detail += "; over the runtime limit";
      }
    }
    failed += !o.passed;
    std::cout << fmt::format("[{}] {} {}: {} ({})\n", o.passed ? "PASS" : "FAIL", c.id, c.name, o.detail, timing)
              << std::flush;
  }
  return failed == 0 ? 0 : 1;
}
