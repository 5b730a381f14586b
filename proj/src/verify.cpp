#include "nashbo/verify.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace nashbo {

bool VerifyReport::passed() const { return failures() == 0; }

std::size_t VerifyReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const CheckOutcome& c) { return !c.passed && !c.advisory; }));
}

namespace {

void add(VerifyReport& rep, const std::string& run, std::string check, bool ok, std::string detail = {},
         bool advisory = false) {
  rep.checks.push_back({run, std::move(check), ok, advisory, std::move(detail)});
}

void check_run(VerifyReport& rep, const TraceMetadata& meta, const RunMetadata& rm, const TraceTable& t) {
  const std::string run = fmt::format("{}_trial{}", rm.algo, rm.trial);
  const auto& rs = t.records;

  bool seq = rs.size() == meta.horizon;
  for (std::size_t k = 0; k < rs.size() && seq; ++k) seq = rs[k].iter == k + 1;
  add(rep, run, "iterations", seq, seq ? "" : fmt::format("expected rounds 1..{}", meta.horizon));

  bool mono = true, matches = true, in_domain = true, beta_ok = true;
  double running = std::numeric_limits<double>::infinity();
  std::size_t first_bad = 0;
  for (std::size_t k = 0; k < rs.size(); ++k) {
    running = std::min(running, rs[k].f_exact);
    if (k > 0 && rs[k].min_f_exact > rs[k - 1].min_f_exact && mono) {
      mono = false;
      first_bad = rs[k].iter;
    }
    if (rs[k].min_f_exact != running) matches = false;
    if (rs[k].candidate >= meta.domain_size) in_domain = false;
    if (rs[k].beta != meta.beta) beta_ok = false;
  }
  add(rep, run, "running_min", mono && matches,
      mono ? (matches ? "" : "min_f_exact differs from the running minimum of f_exact")
           : fmt::format("min_f_exact increases at round {}", first_bad));
  add(rep, run, "candidates_in_domain", in_domain);
  add(rep, run, "beta_constant", beta_ok);

  if (meta.envelopes) {
    bool nested = true;
    for (std::size_t k = 1; k < rs.size() && nested; ++k) {
      if (rs[k].roi_size > rs[k - 1].roi_size) {
        nested = false;
        first_bad = rs[k].iter;
      }
    }
    add(rep, run, "roi_nesting", nested, nested ? "" : fmt::format("ROI grows at round {}", first_bad));
  }

  const auto& rounds = t.rounds;
  const bool have_rounds = rounds.size() == rs.size() && !rs.empty();

  if (rm.algo == "epsilon-greedy" || rm.algo == "prediction") {
    if (!have_rounds) {
      add(rep, run, "selection_log", false, "per-round side table missing");
    } else {
      bool ok = true;
      std::string detail;
      for (std::size_t k = 0; k < rs.size() && ok; ++k) {
        const auto& d = rounds[k];
        if (rm.algo == "prediction") {
          ok = rs[k].candidate == d.exploit_choice;
        } else {
          const bool should_explore = d.draw < rm.epsilon;
          ok = d.explored == should_explore && (should_explore || rs[k].candidate == d.exploit_choice);
        }
        if (!ok) detail = fmt::format("round {} does not follow the logged rule", rs[k].iter);
      }
      add(rep, run, "selection_log", ok, detail);
    }
  }

  const bool arise = rm.algo == "arise" || rm.algo == "arise-global";
  if (!arise || rs.empty()) return;

  CertificateInputs in;
  in.agents = meta.agents;
  in.noise_variance = meta.noise_variance;
  in.beta = meta.beta;
  in.info_gain = rm.final_info_gain;
  in.final_ci_width = rs.back().ci_width;
  for (const auto& r : rs) in.losses.push_back(r.f_exact);
  for (const auto& d : rounds) in.alphas.push_back(d.alpha);

  const bool hard = rm.algo == "arise-global" && meta.envelopes;
  CertificateReport cert;
  try {
    cert = verify_round_certificates(in);
  } catch (const std::exception& e) {
    add(rep, run, "certificates", false, e.what(), !hard);
    return;
  }
  if (hard) {
    add(rep, run, "certificate_sum", cert.sum_ok,
        fmt::format("sum alpha^2 = {:.6g} <= {:.6g}", cert.sum_alpha_sq, cert.sum_bound));
    add(rep, run, "certificate_width", cert.width_ok,
        fmt::format("final width = {:.6g} <= {:.6g}", cert.final_width, cert.width_bound));
    bool nonincreasing = true;
    for (std::size_t k = 1; k < rounds.size(); ++k) {
      if (!rounds[k].envelope_reset && rounds[k].alpha > rounds[k - 1].alpha) nonincreasing = false;
    }
    add(rep, run, "alpha_nonincreasing", nonincreasing);
  }
  add(rep, run, "certificate_regret", cert.regret_ok,
      fmt::format("sum f = {:.6g} <= {:.6g}", cert.cumulative_regret, cert.regret_bound), true);
}

}  // namespace

VerifyReport verify_traces(const LoadedTraces& traces) {
  VerifyReport rep;
  std::size_t table = 0;
  for (const auto& rm : traces.meta.runs) {
    if (!rm.ok) {
      add(rep, fmt::format("{}_trial{}", rm.algo, rm.trial), "run_completed", false, rm.error);
      continue;
    }
    check_run(rep, traces.meta, rm, traces.tables.at(table++));
  }
  return rep;
}

VerifyReport verify_trace_dir(const std::filesystem::path& dir) { return verify_traces(read_traces(dir)); }

}  // namespace nashbo
