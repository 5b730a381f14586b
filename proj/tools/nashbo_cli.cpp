// nashbo: run experiments, plot and verify traces, query exact game oracles.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nashbo/config.hpp"
#include "nashbo/errors.hpp"
#include "nashbo/experiment.hpp"
#include "nashbo/summary.hpp"
#include "nashbo/trace_io.hpp"
#include "nashbo/verify.hpp"

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;

struct RunArgs {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> beta;
  std::optional<std::size_t> horizon;
  std::optional<std::string> algo;
  std::optional<std::string> game;
  std::optional<std::size_t> workers;
  bool timing = false;
  bool quiet = false;
};

int cmd_run(const RunArgs& a) {
  using namespace nashbo;
  ExperimentConfig cfg;
  try {
    cfg = load_config(a.config);
    if (a.game) {
      const double noise = cfg.game.noise_variance;
      cfg.game = GameSpec::defaults(parse_game_kind(*a.game));
      cfg.game.noise_variance = noise;
    }
    if (a.seed) cfg.base_seed = *a.seed;
    if (a.trials) cfg.trials = *a.trials;
    if (a.horizon) cfg.horizon = *a.horizon;
    if (a.workers) cfg.workers = *a.workers;
    if (a.timing) cfg.record_timing = true;
    if (a.algo) cfg.algorithms = parse_algorithm_list(*a.algo);
    if (a.beta) {
      if (*a.beta == "theoretical") {
        cfg.beta.mode = BetaMode::Theoretical;
      } else {
        std::size_t used = 0;
        const double v = std::stod(*a.beta, &used);
        if (used != a.beta->size()) throw ConfigError("--beta expects a number or 'theoretical'");
        cfg.beta.mode = BetaMode::Practical;
        cfg.beta.value = v;
      }
    }
    cfg.validate();
  } catch (const std::invalid_argument&) {
    std::cerr << "error: --beta expects a number or 'theoretical'\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  const auto out_dir = resolve_output_dir(cfg, a.out ? std::optional<std::filesystem::path>(*a.out) : std::nullopt);
  const std::size_t total = cfg.algorithms.size() * cfg.trials;
  std::size_t done = 0;
  TraceSet set;
  try {
    set = run_experiment(cfg, [&](const RunRecord& r) {
      ++done;
      if (a.quiet) return;
      if (r.ok()) {
        std::cerr << fmt::format("[{}/{}] {} trial {} (seed {}): reported loss {:.6g}\n", done, total,
                                 r.algorithm.label(), r.trial, r.seed, r.result->reported_loss);
      } else {
        std::cerr << fmt::format("[{}/{}] {} trial {} FAILED: {}\n", done, total, r.algorithm.label(), r.trial,
                                 r.error);
      }
    });
    write_traces(set, out_dir);
    const auto tables = set.tables();
    if (!tables.empty()) {
      const Summary summary = summarize(tables, cfg.init_count);
      write_summary_csv(summary, out_dir / "summary.csv");
      std::cout << fmt::format("{:<16} {:>8} {:>16} {:>16} {:>18}\n", "algorithm", "trials", "median final f",
                               "median best f", "median reported f");
      for (const auto& s : summary.algorithms) {
        std::vector<double> reported;
        for (const auto& r : set.runs)
          if (r.ok() && r.algorithm.label() == s.algo) reported.push_back(r.result->reported_loss);
        std::cout << fmt::format("{:<16} {:>8} {:>16.6g} {:>16.6g} {:>18.6g}\n", s.algo, s.trials, s.final_median,
                                 s.final_best_median, median(reported));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunFailure;
  }
  std::cout << "traces written to " << out_dir.string() << '\n';
  return set.any_failed() ? kExitRunFailure : kExitOk;
}

int cmd_plot(const std::string& dir, const std::string& out, bool log_scale, bool best, const std::string& title) {
  using namespace nashbo;
  try {
    const LoadedTraces traces = read_traces(dir);
    const Summary summary = summarize(traces.tables, traces.meta.init_count);
    PlotOptions opt;
    opt.log_scale = log_scale;
    opt.best_so_far = best;
    opt.title = title.empty() ? traces.meta.game : title;
    emit_plot(summary, out, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunFailure;
  }
  return kExitOk;
}

int cmd_verify(const std::string& dir, bool verbose) {
  using namespace nashbo;
  VerifyReport rep;
  try {
    rep = verify_trace_dir(dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerify;
  }
  std::size_t advisory = 0;
  for (const auto& c : rep.checks) {
    if (!c.passed && c.advisory) ++advisory;
    if (c.passed && !verbose) continue;
    const char* tag = c.passed ? "ok  " : (c.advisory ? "note" : "FAIL");
    std::cout << fmt::format("{} {} {}{}{}\n", tag, c.run, c.check, c.detail.empty() ? "" : ": ", c.detail);
  }
  std::cout << fmt::format("{} checks, {} failed, {} advisory notes\n", rep.checks.size(), rep.failures(), advisory);
  return rep.passed() ? kExitOk : kExitVerify;
}

int cmd_oracle(const std::string& game_name, const std::optional<std::string>& x, const std::optional<std::size_t>& id) {
  using namespace nashbo;
  std::optional<GameOracle> oracle;
  try {
    oracle.emplace(GameSpec::defaults(parse_game_kind(game_name)));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  const JointSpace& space = oracle->space();
  std::optional<CandidateId> target = id;
  if (x) {
    std::vector<double> values;
    std::stringstream ss(*x);
    std::string item;
    try {
      while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
    } catch (const std::exception&) {
      std::cerr << "error: --x expects comma-separated numbers\n";
      return kExitConfig;
    }
    if (values.size() != space.total_dim()) {
      std::cerr << fmt::format("error: {} expects {} coordinates, got {}\n", game_name, space.total_dim(),
                               values.size());
      return kExitConfig;
    }
    target = space.find(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())),
                        1e-6);
    if (!target) {
      std::cerr << "error: no candidate at those coordinates (coordinates must lie on the game grid)\n";
      return kExitConfig;
    }
  }
  if (target && *target >= space.size()) {
    std::cerr << fmt::format("error: candidate id must be below {}\n", space.size());
    return kExitConfig;
  }

  if (!target) {
    const auto eq = oracle->equilibria();
    std::cout << fmt::format("game {}: {} agents, {} joint candidates, {} coordinates\n", game_name, space.agents(),
                             space.size(), space.total_dim());
    std::cout << fmt::format("{} pure equilibria on the grid\n", eq.size());
    for (std::size_t k = 0; k < eq.size() && k < 20; ++k) {
      const Eigen::VectorXd c = space.coords(eq[k]);
      std::cout << fmt::format("  id {}: x = ({:.6g})\n", eq[k], fmt::join(c.data(), c.data() + c.size(), ", "));
    }
    return kExitOk;
  }
  const Eigen::VectorXd c = space.coords(*target);
  std::cout << fmt::format("candidate {}: x = ({:.17g})\n", *target, fmt::join(c.data(), c.data() + c.size(), ", "));
  for (std::size_t i = 0; i < space.agents(); ++i) {
    std::cout << fmt::format("agent {}: utility {:.17g}, best-response gain {:.17g}\n", i,
                             oracle->utility(*target, i), oracle->best_response_gain(i, *target));
  }
  std::cout << fmt::format("exact loss {:.17g}\n", oracle->exact_loss(*target));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium search in black-box games with Gaussian-process surrogates"};
  app.set_version_flag("--version", std::string(NASHBO_VERSION));
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run every configured (algorithm, trial) pair and write traces");
  run->add_option("config", run_args.config, "Experiment config file (INI)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_args.out, "Output directory (overrides $NASHBO_OUT_DIR and the config)");
  run->add_option("--seed", run_args.seed, "Base seed; trial k uses seed + k");
  run->add_option("--trials", run_args.trials, "Number of trials per algorithm");
  run->add_option("--beta", run_args.beta, "Confidence scaling: a number, or 'theoretical'");
  run->add_option("--horizon", run_args.horizon, "Rounds after the initial design");
  run->add_option("--algo", run_args.algo, "Comma-separated algorithms, e.g. arise,prediction:tau=0.5");
  run->add_option("--game", run_args.game, "Replace the configured game with this kind's defaults");
  run->add_option("--workers", run_args.workers, "Concurrent trials");
  run->add_flag("--timing", run_args.timing, "Record per-round wall-clock time (traces stop being reproducible)");
  run->add_flag("--quiet", run_args.quiet, "No per-run progress lines");

  std::string plot_dir, plot_out, plot_title;
  bool plot_log = false, plot_best = false;
  auto* plot = app.add_subcommand("plot", "Plot mean exact loss with standard-error bands from a trace directory");
  plot->add_option("trace-dir", plot_dir, "Directory written by 'run'")->required()->check(CLI::ExistingDirectory);
  plot->add_option("--out", plot_out, "SVG file to write")->required();
  plot->add_flag("--log", plot_log, "Logarithmic y axis");
  plot->add_flag("--best-so-far", plot_best, "Plot the running minimum instead of f(x^t)");
  plot->add_option("--title", plot_title, "Plot title (default: game name)");

  std::string verify_dir;
  bool verify_verbose = false;
  auto* verify = app.add_subcommand("verify", "Check invariants and certificates over recorded traces");
  verify->add_option("trace-dir", verify_dir, "Directory written by 'run'")->required()->check(CLI::ExistingDirectory);
  verify->add_flag("-v,--verbose", verify_verbose, "Print passing checks too");

  std::string oracle_game;
  std::optional<std::string> oracle_x;
  std::optional<std::size_t> oracle_id;
  auto* oracle = app.add_subcommand("oracle", "Exact utilities, gains and loss of a game with default settings");
  oracle->add_option("game", oracle_game, "saddle, rps, hotelling, budget or bimatrix")->required();
  auto* xopt = oracle->add_option("--x", oracle_x, "Comma-separated joint coordinates");
  oracle->add_option("--id", oracle_id, "Candidate id")->excludes(xopt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return cmd_run(run_args);
  if (*plot) return cmd_plot(plot_dir, plot_out, plot_log, plot_best, plot_title);
  if (*verify) return cmd_verify(verify_dir, verify_verbose);
  if (*oracle) return cmd_oracle(oracle_game, oracle_x, oracle_id);
  return kExitConfig;
}
