#include "nashbo/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "nashbo/errors.hpp"

namespace nashbo {

namespace {

struct NamedAlgorithm {
  std::string_view name;
  AlgorithmKind kind;
};

constexpr NamedAlgorithm kAlgorithmNames[] = {
    {"arise", AlgorithmKind::Arise},
    {"arise-global", AlgorithmKind::AriseGlobal},
    {"prediction", AlgorithmKind::Prediction},
    {"epsilon-greedy", AlgorithmKind::EpsilonGreedy},
    {"sur-lite", AlgorithmKind::SurLite},
};

bool is_arise(AlgorithmKind k) { return k == AlgorithmKind::Arise || k == AlgorithmKind::AriseGlobal; }

// First index holding the maximum; NaN entries never win.
std::size_t argmax_first(const std::vector<double>& values) {
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  bool seen = false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (std::isnan(values[k])) continue;
    if (!seen || values[k] > best_v) {
      best = k;
      best_v = values[k];
      seen = true;
    }
  }
  return best;
}

std::size_t argmin_first(const std::vector<double>& values) {
  std::size_t best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  bool seen = false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (std::isnan(values[k])) continue;
    if (!seen || values[k] < best_v) {
      best = k;
      best_v = values[k];
      seen = true;
    }
  }
  return best;
}

std::vector<double> total_sigma(std::span<const PosteriorBatch> posteriors, bool squared) {
  const auto m = static_cast<std::size_t>(posteriors.front().variance.size());
  std::vector<double> out(m, 0.0);
  for (const auto& p : posteriors) {
    for (std::size_t k = 0; k < m; ++k) out[k] += squared ? p.variance(k) : std::sqrt(p.variance(k));
  }
  return out;
}

KernelParams initial_params(const GpSettings& gp, std::size_t dim, double noise) {
  KernelParams p;
  p.family = gp.family;
  p.lengthscales.assign(gp.ard ? dim : 1, gp.initial_lengthscale);
  p.signal_variance = gp.initial_signal_variance;
  p.noise_variance = noise;
  return p;
}

std::string join_warnings(const std::vector<std::string>& w) {
  std::string out;
  for (const auto& s : w) {
    if (!out.empty()) out += ';';
    out += s;
  }
  return out;
}

}  // namespace

std::string_view to_string(AlgorithmKind kind) {
  for (const auto& entry : kAlgorithmNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

AlgorithmKind parse_algorithm_kind(std::string_view name) {
  for (const auto& entry : kAlgorithmNames) {
    if (entry.name == name) return entry.kind;
  }
  if (name == "global" || name == "arise_global") return AlgorithmKind::AriseGlobal;
  if (name == "eps-greedy" || name == "epsgreedy" || name == "epsilon_greedy") return AlgorithmKind::EpsilonGreedy;
  if (name == "surlite" || name == "sur" || name == "sur_lite") return AlgorithmKind::SurLite;
  throw ConfigError(fmt::format("unknown algorithm '{}' (expected arise, arise-global, prediction, "
                                "epsilon-greedy or sur-lite)",
                                name));
}

std::string_view to_string(EnvelopeScope scope) {
  return scope == EnvelopeScope::WholeRun ? "run" : "refit";
}

EnvelopeScope parse_envelope_scope(std::string_view name) {
  if (name == "run") return EnvelopeScope::WholeRun;
  if (name == "refit") return EnvelopeScope::SinceRefit;
  throw ConfigError(fmt::format("unknown envelope scope '{}' (expected refit or run)", name));
}

double theoretical_beta(std::size_t agents, std::size_t domain_size, std::size_t horizon, double delta) {
  if (agents == 0 || domain_size == 0 || horizon == 0) {
    throw std::domain_error("theoretical beta needs positive n, |D| and T");
  }
  if (!(delta > 0.0 && delta <= 1.0)) throw std::domain_error("theoretical beta needs delta in (0, 1]");
  const double product = static_cast<double>(agents) * static_cast<double>(domain_size) *
                         static_cast<double>(horizon) / delta;
  return 2.0 * std::log(product);
}

RoiState RoiState::initial(std::size_t domain_size) {
  RoiState s;
  s.active = Region::full(domain_size);
  return s;
}

RoiState update_roi(const BoundsTable& full, const RoiState& previous, bool* fell_back) {
  const std::size_t m = full.f.size();
  if (full.region_used.size() != m) throw LogicError("ROI update needs bounds over the whole domain");
  if (previous.active.domain_size() != m) throw LogicError("ROI and bounds cover different domains");

  double min_ucb = std::numeric_limits<double>::infinity();
  for (double v : full.f.ucb) min_ucb = std::min(min_ucb, v);
  const double threshold = std::min(min_ucb, 0.0);

  std::vector<CandidateId> kept;
  for (CandidateId id : previous.active.ids()) {
    if (full.f.lcb[id] <= threshold) kept.push_back(id);
  }
  RoiState next = previous;
  next.thresholds.push_back(threshold);
  const bool empty = kept.empty();
  if (empty) {
    CandidateId best = previous.active.ids().front();
    for (CandidateId id : previous.active.ids()) {
      if (full.f.lcb[id] < full.f.lcb[best]) best = id;
    }
    kept.push_back(best);
    ++next.fallbacks;
  }
  if (fell_back) *fell_back = empty;
  next.active = Region::of(std::move(kept), m);
  next.history.push_back(next.active.size());
  return next;
}

std::vector<double> prediction_scores(const JointSpace& space, std::span<const PosteriorBatch> posteriors,
                                      double tau) {
  const std::size_t m = space.size();
  std::vector<double> score(m, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < space.agents(); ++i) {
    const Eigen::VectorXd& mu = posteriors[i].mean;
    const std::size_t stride = space.stride(i);
    const std::size_t count = space.strategies(i);
    for (CandidateId base : space.slice_bases(i)) {
      double sum = 0.0;
      for (std::size_t k = 0; k < count; ++k) sum += mu(base + k * stride);
      const double mean = sum / static_cast<double>(count);
      double ss = 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        const double d = mu(base + k * stride) - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(count));
      for (std::size_t k = 0; k < count; ++k) {
        const CandidateId id = base + k * stride;
        score[id] = std::max(score[id], mean + tau * sd - mu(id));
      }
    }
  }
  return score;
}

std::vector<double> plugin_loss(const JointSpace& space, std::span<const PosteriorBatch> posteriors) {
  const std::size_t m = space.size();
  std::vector<double> loss(m, 0.0);
  for (std::size_t i = 0; i < space.agents(); ++i) {
    const Eigen::VectorXd& mu = posteriors[i].mean;
    const std::size_t stride = space.stride(i);
    const std::size_t count = space.strategies(i);
    for (CandidateId base : space.slice_bases(i)) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < count; ++k) best = std::max(best, mu(base + k * stride));
      for (std::size_t k = 0; k < count; ++k) loss[base + k * stride] += best - mu(base + k * stride);
    }
  }
  return loss;
}

Selection select_next(const SelectionContext& ctx, std::mt19937_64& rng) {
  Selection sel;
  const AlgorithmSpec& algo = ctx.algorithm;
  switch (algo.kind) {
    case AlgorithmKind::Arise: {
      if (ctx.roi.empty()) throw LogicError("selection over an empty ROI");
      BoundsTable local = compose_bounds(ctx.full.round, ctx.full.beta, ctx.full.u, ctx.space, ctx.roi);
      const std::vector<double> alpha = acquisition(local, ctx.roi);
      const std::size_t k = argmax_first(alpha);
      sel.id = ctx.roi.ids()[k];
      sel.alpha = alpha[k];
      break;
    }
    case AlgorithmKind::AriseGlobal: {
      const std::vector<double> alpha = acquisition(ctx.full, ctx.full.region_used);
      const std::size_t k = argmax_first(alpha);
      sel.id = ctx.full.region_used.ids()[k];
      sel.alpha = alpha[k];
      break;
    }
    case AlgorithmKind::Prediction:
      sel.id = argmin_first(prediction_scores(ctx.space, ctx.posteriors, algo.tau));
      sel.exploit_choice = sel.id;
      break;
    case AlgorithmKind::EpsilonGreedy: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      sel.draw = unit(rng);
      sel.exploit_choice = argmin_first(prediction_scores(ctx.space, ctx.posteriors, algo.tau));
      sel.explored = sel.draw < algo.epsilon;
      sel.id = sel.explored ? argmax_first(total_sigma(ctx.posteriors, false)) : sel.exploit_choice;
      break;
    }
    case AlgorithmKind::SurLite:
      sel.id = argmax_first(total_sigma(ctx.posteriors, true));
      break;
  }
  return sel;
}

Solver::Solver(const GameOracle& game, SolverConfig config, std::uint64_t seed)
    : game_(game), config_(std::move(config)), rng_(seed), envelope_(config_.envelopes) {
  if (config_.horizon == 0) throw ConfigError("horizon must be at least 1");
  if (config_.init_count == 0) throw ConfigError("init_count must be at least 1");
  if (!(config_.beta >= 0.0) || !std::isfinite(config_.beta)) throw ConfigError("beta must be finite and >= 0");
  const JointSpace& space = game_.space();
  const double noise = game_.spec().noise_variance;
  const KernelParams p = initial_params(config_.gp, space.total_dim(), noise);
  for (std::size_t i = 0; i < space.agents(); ++i) {
    models_.emplace_back(space.total_dim(), p, config_.gp.center_targets);
    caches_.emplace_back(space.features());
  }
  roi_ = RoiState::initial(space.size());
  result_.algorithm = config_.algorithm;
  result_.seed = seed;
  result_.agents = space.agents();
  result_.noise_variance = noise;
  result_.beta = config_.beta;
  result_.envelopes = config_.envelopes;
}

void Solver::observe(CandidateId id, std::vector<std::string>* warnings) {
  const Eigen::VectorXd x = game_.space().coords(id);
  const UtilityVector y = game_.query(id, rng_);
  std::size_t before = 0, after = 0;
  for (std::size_t i = 0; i < models_.size(); ++i) {
    before += models_[i].jitter_escalations();
    models_[i].update(x, y[i]);
    after += models_[i].jitter_escalations();
  }
  if (after > before && warnings) warnings->push_back("jitter_escalated");
}

void Solver::initialize() {
  if (initialized_) return;
  const std::size_t m = game_.space().size();
  const std::size_t count = std::min(config_.init_count, m);
  std::vector<CandidateId> ids(m);
  std::iota(ids.begin(), ids.end(), CandidateId{0});
  for (std::size_t k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, m - 1);
    std::swap(ids[k], ids[pick(rng_)]);
  }
  ids.resize(count);
  result_.initial_design = ids;
  std::vector<std::string> warnings;
  for (CandidateId id : ids) observe(id, &warnings);
  if (!warnings.empty()) result_.warnings.push_back("init: jitter_escalated");
  initialized_ = true;
}

bool Solver::refit(std::vector<std::string>& warnings) {
  FitOptions opts;
  opts.search_budget = config_.gp.fit_budget;
  opts.fit_noise = config_.gp.fit_noise;
  opts.ard = config_.gp.ard;
  opts.center_targets = config_.gp.center_targets;
  bool failed = false;
  bool changed = false;
  for (auto& model : models_) {
    const FitResult fit = fit_hyperparams(model.inputs(), model.targets(), model.params(), opts);
    if (fit.warning) failed = true;
    if (fit.params == model.params()) continue;
    try {
      SurrogateModel next = model.with_params(fit.params);
      model = std::move(next);
      changed = true;
    } catch (const ModelError&) {
      failed = true;
    }
  }
  if (failed) warnings.push_back("fit_failed");
  return changed;
}

void Solver::step() {
  if (!initialized_) initialize();
  const auto started = std::chrono::steady_clock::now();
  ++round_;
  std::vector<std::string> warnings;
  const JointSpace& space = game_.space();
  const std::size_t n = space.agents();

  std::size_t escalations_before = 0;
  for (const auto& m : models_) escalations_before += m.jitter_escalations();
  RoundDiagnostics diag;
  diag.iter = round_;
  if (config_.gp.refit.due(round_) && refit(warnings) && config_.envelope_scope == EnvelopeScope::SinceRefit) {
    diag.envelope_reset = envelope_.has_history();
    envelope_.reset();
  }
  std::size_t escalations_after = 0;
  for (const auto& m : models_) escalations_after += m.jitter_escalations();
  if (escalations_after > escalations_before) warnings.push_back("jitter_escalated");

  posteriors_.resize(n);
  std::vector<Interval> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    posteriors_[i] = caches_[i].evaluate(models_[i]);
    u[i] = u_bounds(posteriors_[i], config_.beta);
  }
  u = envelope_.apply(std::move(u));
  if (envelope_.last_conflicts() > 0) {
    warnings.push_back(fmt::format("envelope_conflict:{}", envelope_.last_conflicts()));
  }

  const Region everything = Region::full(space.size());
  last_full_ = compose_bounds(round_, config_.beta, std::move(u), space, everything);

  bool fell_back = false;
  roi_ = update_roi(last_full_, roi_, &fell_back);
  if (fell_back) warnings.push_back("roi_fallback");

  {
    const std::vector<double> alpha_all = acquisition(last_full_, everything);
    diag.alpha_global = alpha_all[argmax_first(alpha_all)];
    for (std::size_t i = 0; i < n && diag.roi_slices_match; ++i) {
      const Interval local = v_bounds(last_full_.u[i], space, roi_.active, i);
      for (CandidateId id : roi_.active.ids()) {
        if (local.ucb[id] != last_full_.v[i].ucb[id] || local.lcb[id] != last_full_.v[i].lcb[id]) {
          diag.roi_slices_match = false;
          break;
        }
      }
    }
  }

  const SelectionContext ctx{space, last_full_, posteriors_, roi_.active, config_.algorithm};
  const Selection sel = select_next(ctx, rng_);
  const CandidateId x = sel.id;

  diag.alpha = sel.alpha;
  diag.draw = sel.draw;
  diag.explored = sel.explored;
  diag.exploit_choice = sel.exploit_choice;
  for (std::size_t i = 0; i < n; ++i) {
    diag.width_chain += last_full_.u[i].ucb[x] - last_full_.u[i].lcb[x];
    diag.posterior_width += 2.0 * std::sqrt(config_.beta * posteriors_[i].variance(x));
  }
  diag.width_chain *= static_cast<double>(n + 1);

  double min_ucb = std::numeric_limits<double>::infinity();
  double min_lcb = std::numeric_limits<double>::infinity();
  for (CandidateId id : roi_.active.ids()) {
    min_ucb = std::min(min_ucb, last_full_.f.ucb[id]);
    min_lcb = std::min(min_lcb, last_full_.f.lcb[id]);
  }

  observe(x, &warnings);

  TraceRecord rec;
  rec.iter = round_;
  rec.candidate = x;
  const Eigen::VectorXd c = space.coords(x);
  rec.coords.assign(c.data(), c.data() + c.size());
  rec.f_exact = game_.exact_loss(x);
  best_loss_ = std::min(best_loss_, rec.f_exact);
  rec.min_f_exact = best_loss_;
  rec.roi_size = roi_.active.size();
  rec.ci_width = min_ucb - min_lcb;
  rec.info_gain_total = 0.0;
  if (game_.spec().noise_variance > 0.0) {
    for (const auto& m : models_) rec.info_gain_total += m.info_gain();
  } else {
    rec.info_gain_total = std::numeric_limits<double>::quiet_NaN();
  }
  rec.beta = config_.beta;
  if (config_.record_timing) {
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  }
  rec.warnings = std::move(warnings);
  if (!rec.warnings.empty()) {
    result_.warnings.push_back(fmt::format("round {}: {}", round_, join_warnings(rec.warnings)));
  }
  if (config_.keep_history) result_.roi_history.push_back(roi_.active.ids());
  result_.trace.push_back(std::move(rec));
  result_.diagnostics.push_back(diag);
}

CandidateId Solver::report() {
  const JointSpace& space = game_.space();
  const std::size_t n = space.agents();
  std::vector<PosteriorBatch> post(n);
  for (std::size_t i = 0; i < n; ++i) post[i] = caches_[i].evaluate(models_[i]);

  if (is_arise(config_.algorithm.kind)) {
    std::vector<Interval> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = u_bounds(post[i], config_.beta);
    // Intersect with history without recording it, so report() stays repeatable.
    if (envelope_.enabled() && envelope_.has_history()) {
      for (std::size_t i = 0; i < n; ++i) u[i] = intersect(envelope_.previous()[i], u[i]);
    }
    const BoundsTable final_bounds =
        compose_bounds(round_ + 1, config_.beta, std::move(u), space, Region::full(space.size()));
    CandidateId best = roi_.active.ids().front();
    for (CandidateId id : roi_.active.ids()) {
      if (final_bounds.f.lcb[id] < final_bounds.f.lcb[best]) best = id;
    }
    return best;
  }
  if (config_.algorithm.kind == AlgorithmKind::SurLite) return argmin_first(plugin_loss(space, post));
  return argmin_first(prediction_scores(space, post, config_.algorithm.tau));
}

RunResult Solver::run() {
  initialize();
  while (round_ < config_.horizon) step();
  result_.reported = report();
  result_.reported_loss = game_.exact_loss(result_.reported);
  result_.final_roi = roi_.active;
  result_.final_info_gain = 0.0;
  if (game_.spec().noise_variance > 0.0) {
    for (const auto& m : models_) result_.final_info_gain += m.info_gain();
  }
  return result_;
}

RunResult run(const GameOracle& game, const SolverConfig& config, std::uint64_t seed) {
  Solver solver(game, config, seed);
  return solver.run();
}

}  // namespace nashbo
