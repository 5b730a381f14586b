#include "nashbo/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "nashbo/errors.hpp"

namespace nashbo {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

// Values may carry a trailing " # comment" or " ; comment".
std::string strip_comment(const std::string& raw) {
  std::size_t cut = raw.size();
  for (std::size_t k = 1; k < raw.size(); ++k) {
    if ((raw[k] == '#' || raw[k] == ';') && std::isspace(static_cast<unsigned char>(raw[k - 1]))) {
      cut = k;
      break;
    }
  }
  return trim(std::string_view(raw).substr(0, cut));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(fmt::format("expected a number, got '{}'", s));
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError(fmt::format("expected a non-negative integer, got '{}'", s));
  }
  return v;
}

std::size_t to_size(const std::string& s) { return static_cast<std::size_t>(to_u64(s)); }

bool to_bool(const std::string& s) {
  const std::string v = lower(s);
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw ConfigError(fmt::format("expected a boolean (true/false/on/off), got '{}'", s));
}

struct BudgetKeys {
  std::optional<std::size_t> channels, customers;
  std::optional<std::uint64_t> seed;
  std::optional<double> total;
};

using Setter = std::function<void(const std::string&)>;

}  // namespace

std::vector<AlgorithmSpec> ExperimentConfig::all_algorithms() {
  std::vector<AlgorithmSpec> out;
  for (AlgorithmKind k : {AlgorithmKind::Arise, AlgorithmKind::AriseGlobal, AlgorithmKind::Prediction,
                          AlgorithmKind::EpsilonGreedy, AlgorithmKind::SurLite}) {
    AlgorithmSpec a;
    a.kind = k;
    out.push_back(a);
  }
  return out;
}

std::vector<std::string> ExperimentConfig::violations() const {
  std::vector<std::string> errs;
  try {
    game.validate();
  } catch (const ConfigError& e) {
    errs.emplace_back(e.what());
  }
  if (trials < 1) errs.emplace_back("run.trials must be >= 1");
  if (horizon < 1) errs.emplace_back("run.horizon must be >= 1");
  if (init_count < 1) errs.emplace_back("run.init_count must be >= 1");
  if (workers < 1) errs.emplace_back("run.workers must be >= 1");
  if (algorithms.empty()) errs.emplace_back("run.algorithms must name at least one algorithm");
  for (const auto& a : algorithms) {
    if (!(a.epsilon >= 0.0 && a.epsilon <= 1.0)) {
      errs.push_back(fmt::format("{}: epsilon must lie in [0, 1]", a.label()));
    }
    if (!(a.tau >= 0.0) || !std::isfinite(a.tau)) errs.push_back(fmt::format("{}: tau must be >= 0", a.label()));
  }
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (algorithms[i].kind == algorithms[j].kind) {
        errs.push_back(fmt::format("algorithm '{}' listed twice", algorithms[i].label()));
      }
    }
  }
  if (beta.mode == BetaMode::Theoretical && !(beta.delta > 0.0 && beta.delta <= 1.0)) {
    errs.emplace_back("beta.delta must lie in (0, 1] for theoretical mode");
  }
  if (beta.value && (!(*beta.value >= 0.0) || !std::isfinite(*beta.value))) {
    errs.emplace_back("beta.value must be finite and >= 0");
  }
  if (!(gp.initial_lengthscale > 0.0)) errs.emplace_back("gp.lengthscale must be > 0");
  if (!(gp.initial_signal_variance > 0.0)) errs.emplace_back("gp.signal_variance must be > 0");
  if (game.noise_variance == 0.0) errs.emplace_back("game.noise_variance must be > 0 for the GP surrogates");
  return errs;
}

void ExperimentConfig::validate() const {
  const auto errs = violations();
  if (errs.empty()) return;
  std::string msg = fmt::format("invalid configuration ({}):", source);
  for (const auto& e : errs) msg += "\n  - " + e;
  throw ConfigError(msg);
}

double ExperimentConfig::resolved_beta(std::size_t domain_size) const {
  if (beta.mode == BetaMode::Theoretical) return theoretical_beta(game.n, domain_size, horizon, beta.delta);
  if (beta.value) return *beta.value;
  return game.kind == GameKind::Hotelling ? 1.0 : 2.0;
}

SolverConfig ExperimentConfig::solver_config(const AlgorithmSpec& algorithm, double b) const {
  SolverConfig c;
  c.algorithm = algorithm;
  c.beta = b;
  c.horizon = horizon;
  c.init_count = init_count;
  c.envelopes = envelopes;
  c.envelope_scope = envelope_scope;
  c.gp = gp;
  c.record_timing = record_timing;
  return c;
}

std::vector<AlgorithmSpec> parse_algorithm_list(std::string_view text) {
  std::vector<AlgorithmSpec> out;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::stringstream parts(item);
    std::string piece;
    std::getline(parts, piece, ':');
    AlgorithmSpec a;
    a.kind = parse_algorithm_kind(lower(trim(piece)));
    while (std::getline(parts, piece, ':')) {
      const auto eq = piece.find('=');
      if (eq == std::string::npos) throw ConfigError(fmt::format("algorithm option '{}' needs name=value", piece));
      const std::string key = lower(trim(piece.substr(0, eq)));
      const std::string value = trim(piece.substr(eq + 1));
      if (key == "epsilon" || key == "eps") a.epsilon = to_double(value);
      else if (key == "tau") a.tau = to_double(value);
      else throw ConfigError(fmt::format("unknown algorithm option '{}' (expected epsilon or tau)", key));
    }
    out.push_back(a);
  }
  if (out.empty()) throw ConfigError("empty algorithm list");
  return out;
}

std::string format_algorithm(const AlgorithmSpec& a) {
  switch (a.kind) {
    case AlgorithmKind::Prediction: return fmt::format("{}:tau={}", a.label(), a.tau);
    case AlgorithmKind::EpsilonGreedy: return fmt::format("{}:epsilon={}:tau={}", a.label(), a.epsilon, a.tau);
    default: return a.label();
  }
}

ExperimentConfig parse_config(std::string_view text, std::string source) {
  boost::property_tree::ptree tree;
  {
    std::istringstream in{std::string(text)};
    try {
      boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(fmt::format("{}:{}: {}", source, e.line(), e.message()));
    }
  }

  ExperimentConfig cfg;
  cfg.source = source;
  std::vector<std::string> errs;

  // The game kind decides the defaults the other game keys refine.
  if (auto game = tree.get_child_optional("game")) {
    if (auto kind = game->get_optional<std::string>("kind")) {
      try {
        cfg.game = GameSpec::defaults(parse_game_kind(lower(strip_comment(*kind))));
      } catch (const std::exception& e) {
        errs.push_back(fmt::format("game.kind: {}", e.what()));
      }
    }
  }

  BudgetKeys budget;
  std::optional<std::string> algorithms_text;
  std::map<std::string, std::map<std::string, Setter>> setters;
  auto& g = setters["game"];
  g["kind"] = [](const std::string&) {};
  g["n"] = [&](const std::string& v) { cfg.game.n = to_size(v); };
  g["noise_variance"] = [&](const std::string& v) { cfg.game.noise_variance = to_double(v); };
  g["resolution"] = [&](const std::string& v) { cfg.game.resolution = to_size(v); };
  g["lattice"] = [&](const std::string& v) { cfg.game.lattice = to_size(v); };
  g["hotelling_m"] = [&](const std::string& v) { cfg.game.hotelling_m = to_size(v); };
  g["channels"] = [&](const std::string& v) { budget.channels = to_size(v); };
  g["customers"] = [&](const std::string& v) { budget.customers = to_size(v); };
  g["instance_seed"] = [&](const std::string& v) { budget.seed = to_u64(v); };
  g["budget"] = [&](const std::string& v) { budget.total = to_double(v); };
  g["max_candidates"] = [&](const std::string& v) { cfg.game.max_candidates = to_size(v); };

  auto& r = setters["run"];
  r["algorithms"] = [&](const std::string& v) { algorithms_text = v; };
  r["horizon"] = [&](const std::string& v) { cfg.horizon = to_size(v); };
  r["init_count"] = [&](const std::string& v) { cfg.init_count = to_size(v); };
  r["trials"] = [&](const std::string& v) { cfg.trials = to_size(v); };
  r["base_seed"] = [&](const std::string& v) { cfg.base_seed = to_u64(v); };
  r["envelopes"] = [&](const std::string& v) { cfg.envelopes = to_bool(v); };
  r["envelope_scope"] = [&](const std::string& v) { cfg.envelope_scope = parse_envelope_scope(lower(v)); };
  r["workers"] = [&](const std::string& v) { cfg.workers = to_size(v); };
  r["record_timing"] = [&](const std::string& v) { cfg.record_timing = to_bool(v); };
  r["output_dir"] = [&](const std::string& v) { cfg.output_dir = v; };

  auto& b = setters["beta"];
  b["mode"] = [&](const std::string& v) {
    const std::string m = lower(v);
    if (m == "practical") cfg.beta.mode = BetaMode::Practical;
    else if (m == "theoretical") cfg.beta.mode = BetaMode::Theoretical;
    else throw ConfigError(fmt::format("expected practical or theoretical, got '{}'", v));
  };
  b["value"] = [&](const std::string& v) { cfg.beta.value = to_double(v); };
  b["delta"] = [&](const std::string& v) { cfg.beta.delta = to_double(v); };

  auto& gp = setters["gp"];
  gp["kernel"] = [&](const std::string& v) { cfg.gp.family = parse_kernel_family(lower(v)); };
  gp["ard"] = [&](const std::string& v) { cfg.gp.ard = to_bool(v); };
  gp["lengthscale"] = [&](const std::string& v) { cfg.gp.initial_lengthscale = to_double(v); };
  gp["signal_variance"] = [&](const std::string& v) { cfg.gp.initial_signal_variance = to_double(v); };
  gp["fit_budget"] = [&](const std::string& v) { cfg.gp.fit_budget = to_size(v); };
  gp["fit_noise"] = [&](const std::string& v) { cfg.gp.fit_noise = to_bool(v); };
  gp["center_targets"] = [&](const std::string& v) { cfg.gp.center_targets = to_bool(v); };
  gp["refit_every_until"] = [&](const std::string& v) { cfg.gp.refit.every_round_until = to_size(v); };
  gp["refit_period"] = [&](const std::string& v) { cfg.gp.refit.period = to_size(v); };

  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      errs.push_back(fmt::format("key '{}' appears outside a section", section));
      continue;
    }
    const auto sec = setters.find(section);
    if (sec == setters.end()) {
      errs.push_back(fmt::format("unknown section [{}] (expected game, run, beta, gp)", section));
      continue;
    }
    for (const auto& [key, node] : body) {
      const auto it = sec->second.find(key);
      if (it == sec->second.end()) {
        errs.push_back(fmt::format("unknown key '{}' in [{}]", key, section));
        continue;
      }
      try {
        it->second(strip_comment(node.data()));
      } catch (const std::exception& e) {
        errs.push_back(fmt::format("{}.{}: {}", section, key, e.what()));
      }
    }
  }

  if (budget.channels || budget.customers || budget.seed) {
    cfg.game.budget = BudgetInstance::generate(budget.channels.value_or(cfg.game.budget.channels),
                                               budget.customers.value_or(cfg.game.budget.customers),
                                               budget.seed.value_or(cfg.game.budget.seed));
  }
  if (budget.total) cfg.game.budget.budget = *budget.total;

  if (algorithms_text) {
    try {
      cfg.algorithms = parse_algorithm_list(*algorithms_text);
    } catch (const std::exception& e) {
      errs.push_back(fmt::format("run.algorithms: {}", e.what()));
    }
  } else {
    cfg.algorithms = ExperimentConfig::all_algorithms();
  }

  for (auto& e : cfg.violations()) errs.push_back(std::move(e));
  if (!errs.empty()) {
    std::string msg = fmt::format("invalid configuration ({}):", source);
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config,
                                         const std::optional<std::filesystem::path>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  if (config.output_dir) return *config.output_dir;
  return "runs";
}

}  // namespace nashbo
