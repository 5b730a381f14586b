// Marginal-likelihood hyperparameter search (GSL Nelder-Mead simplex).

#include <algorithm>
#include <cmath>
#include <limits>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "nashbo/gp.hpp"

namespace nashbo {

namespace {

struct SearchProblem {
  const Eigen::MatrixXd* inputs;
  const Eigen::VectorXd* targets;
  const FitOptions* options;
  KernelFamily family;
  std::size_t n_lengthscales;
  double fixed_noise;

  std::size_t evaluations = 0;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> best_theta;

  std::size_t dims() const { return n_lengthscales + 1 + (options->fit_noise ? 1 : 0); }

  std::vector<double> clamp(std::vector<double> theta) const {
    for (std::size_t k = 0; k < theta.size(); ++k) {
      double lo = options->log_lengthscale_min, hi = options->log_lengthscale_max;
      if (k == n_lengthscales) {
        lo = options->log_signal_min;
        hi = options->log_signal_max;
      } else if (k == n_lengthscales + 1) {
        lo = options->log_noise_min;
        hi = options->log_noise_max;
      }
      theta[k] = std::clamp(theta[k], lo, hi);
    }
    return theta;
  }

  KernelParams decode(const std::vector<double>& theta) const {
    KernelParams p;
    p.family = family;
    p.lengthscales.resize(n_lengthscales);
    for (std::size_t k = 0; k < n_lengthscales; ++k) p.lengthscales[k] = std::exp(theta[k]);
    p.signal_variance = std::exp(theta[n_lengthscales]);
    p.noise_variance = options->fit_noise ? std::exp(theta[n_lengthscales + 1]) : fixed_noise;
    return p;
  }

  std::vector<double> encode(const KernelParams& p) const {
    std::vector<double> theta(dims());
    for (std::size_t k = 0; k < n_lengthscales; ++k) {
      theta[k] = std::log(p.lengthscales.size() == 1 ? p.lengthscales[0] : p.lengthscales[k]);
    }
    theta[n_lengthscales] = std::log(p.signal_variance);
    if (options->fit_noise) theta[n_lengthscales + 1] = std::log(std::max(p.noise_variance, 1e-6));
    return theta;
  }

  double evaluate(std::vector<double> theta) {
    theta = clamp(std::move(theta));
    ++evaluations;
    const double v = negative_log_marginal_likelihood(*inputs, *targets, decode(theta), options->center_targets);
    if (v < best_value) {
      best_value = v;
      best_theta = theta;
    }
    return std::isfinite(v) ? v : 1e300;
  }
};

double gsl_objective(const gsl_vector* v, void* params) {
  auto* problem = static_cast<SearchProblem*>(params);
  std::vector<double> theta(v->size);
  for (std::size_t k = 0; k < v->size; ++k) theta[k] = gsl_vector_get(v, k);
  return problem->evaluate(std::move(theta));
}

void local_search(SearchProblem& problem, const std::vector<double>& start, std::size_t budget) {
  const std::size_t d = problem.dims();
  if (budget < d + 2) return;
  gsl_set_error_handler_off();
  gsl_multimin_function fn{&gsl_objective, d, &problem};
  gsl_vector* x = gsl_vector_alloc(d);
  gsl_vector* step = gsl_vector_alloc(d);
  for (std::size_t k = 0; k < d; ++k) {
    gsl_vector_set(x, k, start[k]);
    gsl_vector_set(step, k, 0.7);
  }
  gsl_multimin_fminimizer* solver = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, d);
  const std::size_t stop_at = problem.evaluations + budget;
  if (gsl_multimin_fminimizer_set(solver, &fn, x, step) == GSL_SUCCESS) {
    // A shrink step costs d evaluations; stop before it could overrun.
    while (problem.evaluations + d + 1 <= stop_at) {
      if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), 1e-3) == GSL_SUCCESS) break;
    }
  }
  gsl_multimin_fminimizer_free(solver);
  gsl_vector_free(step);
  gsl_vector_free(x);
}

}  // namespace

FitResult fit_hyperparams(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                          const KernelParams& incumbent, const FitOptions& options) {
  FitResult result;
  result.params = incumbent;
  if (targets.size() < 2 || options.search_budget == 0) {
    result.nlml = negative_log_marginal_likelihood(inputs, targets, incumbent, options.center_targets);
    result.incumbent_nlml = result.nlml;
    return result;
  }

  const auto dim = static_cast<std::size_t>(inputs.cols());
  SearchProblem problem{&inputs, &targets, &options, incumbent.family,
                        options.ard ? dim : std::size_t{1}, incumbent.noise_variance, 0,
                        std::numeric_limits<double>::infinity(), {}};

  // The incumbent itself (clamped into the box) is the first candidate.
  KernelParams start_params = incumbent;
  if (options.ard && incumbent.lengthscales.size() != dim) {
    start_params.lengthscales.assign(dim, incumbent.lengthscales.front());
  } else if (!options.ard && incumbent.lengthscales.size() != 1) {
    start_params.lengthscales.assign(1, incumbent.lengthscales.front());
  }
  const double incumbent_value = negative_log_marginal_likelihood(inputs, targets, incumbent, options.center_targets);
  result.incumbent_nlml = incumbent_value;

  const double spread = std::max(1e-2, (targets.array() - targets.mean()).square().mean());
  std::vector<std::vector<double>> starts;
  starts.push_back(problem.encode(start_params));
  for (auto [l, s2] : {std::pair{0.1, spread}, std::pair{0.5, spread}, std::pair{2.0, 1.0}}) {
    KernelParams p = start_params;
    std::fill(p.lengthscales.begin(), p.lengthscales.end(), l);
    p.signal_variance = s2;
    starts.push_back(problem.encode(p));
  }

  const std::size_t per_start = options.search_budget / starts.size();
  if (per_start < problem.dims() + 2) {
    local_search(problem, starts.front(), options.search_budget);
  } else {
    for (const auto& s : starts) local_search(problem, s, per_start);
  }

  result.evaluations = problem.evaluations;
  if (!std::isfinite(problem.best_value)) {
    result.nlml = incumbent_value;
    result.warning = "hyperparameter search failed to factorize at every start; keeping incumbent";
    return result;
  }
  if (problem.best_value < incumbent_value) {
    result.params = problem.decode(problem.best_theta);
    result.nlml = problem.best_value;
  } else {
    result.nlml = incumbent_value;
  }
  return result;
}

}  // namespace nashbo
