#include <cmath>

#include "nashbo/errors.hpp"
#include "nashbo/solver.hpp"

namespace nashbo {

CertificateInputs certificate_inputs(const RunResult& result) {
  CertificateInputs in;
  in.agents = result.agents;
  in.noise_variance = result.noise_variance;
  in.beta = result.beta;
  for (const auto& d : result.diagnostics) in.alphas.push_back(d.alpha);
  for (const auto& r : result.trace) in.losses.push_back(r.f_exact);
  if (!result.trace.empty()) in.final_ci_width = result.trace.back().ci_width;
  in.info_gain = result.final_info_gain;
  return in;
}

CertificateReport verify_round_certificates(const CertificateInputs& in) {
  if (in.alphas.empty() || in.alphas.size() != in.losses.size()) {
    throw LogicError("certificate check needs one acquisition value and one loss per round");
  }
  if (in.agents == 0) throw LogicError("certificate check needs the number of agents");
  if (!(in.noise_variance > 0.0)) throw LogicError("certificate constants need a positive noise variance");
  for (double a : in.alphas) {
    if (std::isnan(a)) throw LogicError("acquisition history has missing rounds");
  }

  CertificateReport r;
  const double T = static_cast<double>(in.alphas.size());
  const double n1 = static_cast<double>(in.agents + 1);
  r.c1 = 8.0 / std::log1p(1.0 / in.noise_variance);
  r.c1_hat = n1 * n1 * r.c1;
  const double budget = r.c1_hat * in.beta * in.info_gain;

  for (double a : in.alphas) r.sum_alpha_sq += a * a;
  r.sum_bound = budget;
  r.sum_ok = r.sum_alpha_sq <= r.sum_bound;

  r.final_width = in.final_ci_width;
  r.width_bound = std::sqrt(budget / T);
  r.width_ok = r.final_width <= r.width_bound;

  for (double f : in.losses) r.cumulative_regret += f;
  r.regret_bound = std::sqrt(T * in.beta * in.info_gain * r.c1_hat);
  r.regret_ok = r.cumulative_regret <= r.regret_bound;
  return r;
}

}  // namespace nashbo
