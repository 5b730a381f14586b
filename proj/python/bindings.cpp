#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nashbo/config.hpp"
#include "nashbo/errors.hpp"
#include "nashbo/experiment.hpp"
#include "nashbo/games.hpp"
#include "nashbo/gp.hpp"
#include "nashbo/solver.hpp"
#include "nashbo/summary.hpp"
#include "nashbo/trace_io.hpp"
#include "nashbo/verify.hpp"

namespace py = pybind11;
using namespace nashbo;

namespace {

py::dict record_dict(const TraceRecord& r) {
  py::dict d;
  d["iter"] = r.iter;
  d["candidate_id"] = r.candidate;
  d["coords"] = r.coords;
  d["f_exact"] = r.f_exact;
  d["min_f_exact"] = r.min_f_exact;
  d["roi_size"] = r.roi_size;
  d["ci_width"] = r.ci_width;
  d["info_gain_total"] = r.info_gain_total;
  d["beta"] = r.beta;
  d["warnings"] = r.warnings;
  return d;
}

py::dict result_dict(const RunResult& res) {
  py::dict d;
  d["algorithm"] = res.algorithm.label();
  d["seed"] = res.seed;
  d["beta"] = res.beta;
  d["initial_design"] = res.initial_design;
  py::list trace;
  for (const auto& r : res.trace) trace.append(record_dict(r));
  d["trace"] = trace;
  py::list alphas;
  for (const auto& x : res.diagnostics) alphas.append(x.alpha);
  d["alphas"] = alphas;
  d["reported"] = res.reported;
  d["reported_loss"] = res.reported_loss;
  d["final_roi"] = res.final_roi.ids();
  d["final_info_gain"] = res.final_info_gain;
  d["warnings"] = res.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_nashbo, m) {
  m.doc() = "Equilibrium search in black-box games with Gaussian-process confidence bounds";
  m.attr("__version__") = NASHBO_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_RuntimeError);

  py::class_<GameOracle>(m, "Game")
      .def(py::init([](const std::string& kind, double noise_variance) {
             GameSpec spec = GameSpec::defaults(parse_game_kind(kind));
             spec.noise_variance = noise_variance;
             return GameOracle(spec);
           }),
           py::arg("kind"), py::arg("noise_variance") = 0.01)
      .def_property_readonly("agents", &GameOracle::agents)
      .def_property_readonly("size", [](const GameOracle& g) { return g.space().size(); })
      .def_property_readonly("features", [](const GameOracle& g) { return g.space().features(); })
      .def("coords", [](const GameOracle& g, CandidateId id) { return g.space().coords(id); })
      .def("find",
           [](const GameOracle& g, const Eigen::VectorXd& x, double tol) { return g.space().find(x, tol); },
           py::arg("x"), py::arg("tol") = 1e-9)
      .def("utilities", &GameOracle::exact_utilities)
      .def("best_response_gain", &GameOracle::best_response_gain)
      .def("exact_loss", &GameOracle::exact_loss)
      .def("equilibria", &GameOracle::equilibria, py::arg("tol") = 1e-12);

  m.def("theoretical_beta", &theoretical_beta, py::arg("agents"), py::arg("domain_size"), py::arg("horizon"),
        py::arg("delta"));

  m.def(
      "gp_posterior",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::MatrixXd& C, double lengthscale,
         double signal_variance, double noise_variance) {
        KernelParams p;
        p.lengthscales = {lengthscale};
        p.signal_variance = signal_variance;
        p.noise_variance = noise_variance;
        const PosteriorBatch b = SurrogateModel::build(X, y, p).posterior_batch(C);
        return py::make_tuple(b.mean, b.variance);
      },
      py::arg("X"), py::arg("y"), py::arg("candidates"), py::arg("lengthscale") = 0.25,
      py::arg("signal_variance") = 1.0, py::arg("noise_variance") = 0.01,
      "Posterior mean and variance of a zero-mean GP with a squared-exponential kernel.");

  m.def(
      "run",
      [](const std::string& game, const std::string& algorithm, double beta, std::size_t horizon,
         std::size_t init_count, std::uint64_t seed, bool envelopes, double noise_variance) {
        GameSpec spec = GameSpec::defaults(parse_game_kind(game));
        spec.noise_variance = noise_variance;
        const GameOracle oracle(spec);
        SolverConfig cfg;
        cfg.algorithm = parse_algorithm_list(algorithm).front();
        cfg.beta = beta;
        cfg.horizon = horizon;
        cfg.init_count = init_count;
        cfg.envelopes = envelopes;
        RunResult res;
        {
          py::gil_scoped_release release;
          res = nashbo::run(oracle, cfg, seed);
        }
        return result_dict(res);
      },
      py::arg("game") = "saddle", py::arg("algorithm") = "arise", py::arg("beta") = 2.0, py::arg("horizon") = 100,
      py::arg("init_count") = 10, py::arg("seed") = 0, py::arg("envelopes") = true,
      py::arg("noise_variance") = 0.01, "Run one seeded trial and return its trace as a dict.");

  m.def(
      "run_experiment",
      [](const std::filesystem::path& config, const std::filesystem::path& out) {
        const ExperimentConfig cfg = load_config(config);
        TraceSet set;
        {
          py::gil_scoped_release release;
          set = run_experiment(cfg);
        }
        write_traces(set, out);
        return !set.any_failed();
      },
      py::arg("config"), py::arg("out"), "Run a config file and write traces; returns False if any run failed.");

  m.def(
      "plot",
      [](const std::filesystem::path& trace_dir, const std::filesystem::path& out, bool log_scale, bool best) {
        const LoadedTraces traces = read_traces(trace_dir);
        PlotOptions opt;
        opt.log_scale = log_scale;
        opt.best_so_far = best;
        opt.title = traces.meta.game;
        emit_plot(summarize(traces.tables, traces.meta.init_count), out, opt);
      },
      py::arg("trace_dir"), py::arg("out"), py::arg("log_scale") = false, py::arg("best_so_far") = false);

  m.def(
      "summarize",
      [](const std::filesystem::path& trace_dir) {
        const LoadedTraces traces = read_traces(trace_dir);
        py::dict out;
        for (const auto& s : summarize(traces.tables, traces.meta.init_count).algorithms) {
          py::dict d;
          d["trials"] = s.trials;
          d["mean"] = s.mean;
          d["stderr"] = s.stderr_mean;
          d["best_mean"] = s.best_mean;
          d["final_median"] = s.final_median;
          out[py::str(s.algo)] = d;
        }
        return out;
      },
      py::arg("trace_dir"));

  m.def(
      "verify",
      [](const std::filesystem::path& trace_dir) {
        const VerifyReport rep = verify_trace_dir(trace_dir);
        py::list failures;
        for (const auto& c : rep.checks) {
          if (!c.passed && !c.advisory) failures.append(py::make_tuple(c.run, c.check, c.detail));
        }
        return py::make_tuple(rep.passed(), failures);
      },
      py::arg("trace_dir"), "Returns (passed, [(run, check, detail), ...]).");
}
