#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nashbo/config.hpp"
#include "nashbo/errors.hpp"
#include "nashbo/experiment.hpp"
#include "nashbo/summary.hpp"
#include "nashbo/trace_io.hpp"
#include "nashbo/verify.hpp"

using namespace nashbo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nashbo_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmall = R"(
[game]
kind = saddle
resolution = 9   # coarse grid

[run]
algorithms = arise, arise-global, epsilon-greedy:epsilon=0.3, prediction, sur-lite
horizon = 12
init_count = 4
trials = 2

[gp]
fit_budget = 20
)";

TraceTable table(const std::string& algo, std::size_t trial, std::vector<double> f) {
  TraceTable t{algo, trial, {}, {}};
  double best = 1e300;
  for (std::size_t k = 0; k < f.size(); ++k) {
    best = std::min(best, f[k]);
    TraceRecord r;
    r.iter = k + 1;
    r.f_exact = f[k];
    r.min_f_exact = best;
    t.records.push_back(r);
  }
  return t;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config defaults") {
  const auto c = parse_config("[game]\nkind = saddle\n");
  CHECK(c.trials == 10);
  CHECK(c.horizon == 100);
  CHECK(c.init_count == 10);
  CHECK(c.envelopes);
  CHECK(c.algorithms.size() == 5);
  CHECK(c.resolved_beta(441) == 2.0);
  CHECK(parse_config("[game]\nkind = hotelling\n").resolved_beta(100) == 1.0);

  const auto th = parse_config("[game]\nkind = saddle\n[run]\nhorizon = 60\n[beta]\nmode = theoretical\n");
  CHECK(th.resolved_beta(441) == doctest::Approx(theoretical_beta(2, 441, 60, 0.05)));
  CHECK(th.resolved_beta(441) == doctest::Approx(27.745).epsilon(1e-4));
}

TEST_CASE("config errors are collected") {
  try {
    parse_config("[run]\ntrials = 0\nhorizon = 0\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("trials") != std::string::npos);
    CHECK(msg.find("horizon") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[run]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nonsense]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nhorizon = ten\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nalgorithms = arise, arise\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nalgorithms = epsilon-greedy:epsilon=2\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("algorithm lists round-trip") {
  const auto algos = parse_algorithm_list("arise, epsilon-greedy:epsilon=0.2, prediction:tau=0.5");
  REQUIRE(algos.size() == 3);
  CHECK(algos[1].epsilon == 0.2);
  CHECK(algos[2].tau == 0.5);
  for (const auto& a : algos) {
    const auto back = parse_algorithm_list(format_algorithm(a)).front();
    CHECK(back.kind == a.kind);
    CHECK(back.epsilon == a.epsilon);
    CHECK(back.tau == a.tau);
  }
  CHECK_THROWS_AS(parse_algorithm_list("gradient-descent"), ConfigError);
}

TEST_CASE("output directory precedence") {
  auto c = parse_config("[run]\noutput_dir = from_config\n");
  ::unsetenv(kOutDirEnv);
  CHECK(resolve_output_dir(c, std::nullopt) == "from_config");
  ::setenv(kOutDirEnv, "from_env", 1);
  CHECK(resolve_output_dir(c, std::nullopt) == "from_env");
  CHECK(resolve_output_dir(c, fs::path("from_flag")) == "from_flag");
  ::unsetenv(kOutDirEnv);
  c.output_dir.reset();
  CHECK(resolve_output_dir(c, std::nullopt) == "runs");
}

TEST_CASE("experiment output is deterministic and independent of workers") {
  auto cfg = parse_config(kSmall);
  const auto a_dir = scratch("det_a"), b_dir = scratch("det_b");
  write_traces(run_experiment(cfg), a_dir);
  cfg.workers = 3;
  const auto set = run_experiment(cfg);
  write_traces(set, b_dir);

  REQUIRE(set.runs.size() == 10);
  CHECK(set.runs[0].algorithm.kind == AlgorithmKind::Arise);
  CHECK(set.runs[1].trial == 1);
  CHECK(set.runs[1].seed == 1);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a_dir)) {
    CHECK(slurp(e.path()) == slurp(b_dir / e.path().filename()));
    ++files;
  }
  CHECK(files == 21);  // 10 traces, 10 round tables, metadata

  const auto head = slurp(a_dir / trace_file_name("arise", 0)).substr(0, trace_header(2).size());
  CHECK(head == trace_header(2));
  CHECK(trace_header(2) ==
        "trial,algo,iter,candidate_id,x0,x1,f_exact,min_f_exact,roi_size,ci_width,info_gain_total,beta,wall_ms,warnings");

  const auto loaded = read_traces(a_dir);
  const auto tables = set.tables();
  REQUIRE(loaded.tables.size() == tables.size());
  for (std::size_t k = 0; k < tables.size(); ++k) {
    CHECK(loaded.tables[k].records == tables[k].records);
    CHECK(loaded.tables[k].rounds.size() == tables[k].rounds.size());
  }
  CHECK(loaded.meta.domain_size == 81);
  CHECK(loaded.meta.runs.size() == 10);

  const auto rep = verify_traces(loaded);
  for (const auto& c : rep.checks) {
    CAPTURE(c.run);
    CAPTURE(c.check);
    CAPTURE(c.detail);
    CHECK((c.passed || c.advisory));
  }
  fs::remove_all(a_dir);
  fs::remove_all(b_dir);
}

TEST_CASE("verify flags tampered traces") {
  auto cfg = parse_config(kSmall);
  cfg.algorithms = parse_algorithm_list("arise");
  cfg.trials = 1;
  const auto dir = scratch("tamper");
  write_traces(run_experiment(cfg), dir);
  REQUIRE(verify_trace_dir(dir).passed());

  const fs::path file = dir / trace_file_name("arise", 0);
  auto t = read_trace_file(file);
  t.records[5].min_f_exact = t.records[4].min_f_exact + 1.0;
  t.records[7].roi_size = 1000;
  write_trace_file(t, 2, file);
  const auto rep = verify_trace_dir(dir);
  CHECK_FALSE(rep.passed());
  bool saw_min = false, saw_roi = false;
  for (const auto& c : rep.checks) {
    if (c.check == "running_min" && !c.passed) saw_min = true;
    if (c.check == "roi_nesting" && !c.passed) saw_roi = true;
  }
  CHECK(saw_min);
  CHECK(saw_roi);
  fs::remove_all(dir);
}

TEST_CASE("trace readers reject malformed input") {
  const auto dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "x.csv") << "not,a,trace\n";
  CHECK_THROWS_AS(read_trace_file(dir / "x.csv"), ConfigError);
  std::ofstream(dir / "y.csv") << trace_header(2) << "\n0,arise,1,3\n";
  CHECK_THROWS_AS(read_trace_file(dir / "y.csv"), ConfigError);
  CHECK_THROWS_AS(read_traces(dir), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("summaries") {
  const auto s = summarize({table("a", 0, {0, 5}), table("a", 1, {1, 5}), table("a", 2, {2, 5})}, 10);
  REQUIRE(s.algorithms.size() == 1);
  const auto& a = s.algorithms[0];
  CHECK(a.trials == 3);
  CHECK(a.mean[0] == 1.0);
  CHECK(a.stderr_mean[0] == doctest::Approx(0.5773502691896258));
  CHECK(a.stderr_mean[1] == 0.0);
  CHECK(a.final_median == 5.0);

  const auto one = summarize({table("b", 0, {0.3, 0.2, 0.7})});
  CHECK(one.algorithms[0].mean == std::vector<double>{0.3, 0.2, 0.7});
  CHECK(one.algorithms[0].stderr_mean == std::vector<double>{0, 0, 0});

  const auto same = summarize({table("c", 0, {4, 3, 1}), table("c", 1, {4, 3, 1}), table("c", 2, {4, 3, 1})});
  CHECK(same.algorithms[0].mean == std::vector<double>{4, 3, 1});
  CHECK(same.algorithms[0].best_mean == std::vector<double>{4, 3, 1});

  CHECK_THROWS_AS(summarize({table("d", 0, {1, 2}), table("d", 1, {1})}), ConfigError);

  const auto path = scratch("summary.csv");
  write_summary_csv(s, path);
  const auto text = slurp(path);
  CHECK(text.rfind("algo,iter,evaluations,mean_f,stderr_f,mean_best_f,stderr_best_f\n", 0) == 0);
  CHECK(text.find("\na,1,11,") != std::string::npos);
  fs::remove(path);
}

TEST_CASE("plots") {
  const auto s = summarize({table("arise", 0, {0.5, 0.1}), table("sur-lite", 0, {0.4, 0.3})});
  PlotOptions opt;
  opt.log_scale = true;
  const auto svg = render_plot(s, opt);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("data-algo=\"arise\"") != std::string::npos);
  CHECK(svg.find("data-algo=\"sur-lite\"") != std::string::npos);
  CHECK(svg.find("class=\"series\"") != std::string::npos);
  CHECK(svg.find("class=\"band\"") != std::string::npos);

  const auto path = scratch("empty.svg");
  CHECK_THROWS_AS(emit_plot(Summary{}, path), LogicError);
  CHECK_FALSE(fs::exists(path));
}

}
