#include "nashbo/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "nashbo/errors.hpp"

namespace nashbo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_num(const std::string& s, const fs::path& path, std::size_t line) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError(fmt::format("{}:{}: bad number '{}'", path.string(), line, s));
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s, const fs::path& path, std::size_t line) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError(fmt::format("{}:{}: bad integer '{}'", path.string(), line, s));
  }
  return v;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void check_written(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

json config_echo(const ExperimentConfig& c) {
  json algos = json::array();
  for (const auto& a : c.algorithms) {
    algos.push_back({{"kind", a.label()}, {"epsilon", a.epsilon}, {"tau", a.tau}});
  }
  const auto& b = c.game.budget;
  return {
      {"source", c.source},
      {"game",
       {{"kind", std::string(to_string(c.game.kind))},
        {"n", c.game.n},
        {"noise_variance", c.game.noise_variance},
        {"resolution", c.game.resolution},
        {"lattice", c.game.lattice},
        {"hotelling_m", c.game.hotelling_m},
        {"channels", b.channels},
        {"customers", b.customers},
        {"instance_seed", b.seed},
        {"budget", b.budget},
        {"max_candidates", c.game.max_candidates}}},
      {"run",
       {{"algorithms", algos},
        {"horizon", c.horizon},
        {"init_count", c.init_count},
        {"trials", c.trials},
        {"base_seed", c.base_seed},
        {"envelopes", c.envelopes},
        {"envelope_scope", std::string(to_string(c.envelope_scope))},
        {"record_timing", c.record_timing}}},
      {"beta",
       {{"mode", c.beta.mode == BetaMode::Theoretical ? "theoretical" : "practical"},
        {"value", c.beta.value ? json(*c.beta.value) : json(nullptr)},
        {"delta", c.beta.delta}}},
      {"gp",
       {{"kernel", std::string(to_string(c.gp.family))},
        {"ard", c.gp.ard},
        {"lengthscale", c.gp.initial_lengthscale},
        {"signal_variance", c.gp.initial_signal_variance},
        {"fit_budget", c.gp.fit_budget},
        {"fit_noise", c.gp.fit_noise},
        {"center_targets", c.gp.center_targets},
        {"refit_every_until", c.gp.refit.every_round_until},
        {"refit_period", c.gp.refit.period}}},
  };
}

}  // namespace

std::string trace_header(std::size_t coord_dim) {
  std::string h = "trial,algo,iter,candidate_id";
  for (std::size_t k = 0; k < coord_dim; ++k) h += fmt::format(",x{}", k);
  h += ",f_exact,min_f_exact,roi_size,ci_width,info_gain_total,beta,wall_ms,warnings";
  return h;
}

std::string rounds_header() {
  return "iter,alpha,alpha_global,width_chain,posterior_width,roi_slices_match,envelope_reset,eg_draw,explored,"
         "exploit_choice";
}

std::string trace_file_name(const std::string& algo, std::size_t trial) {
  return fmt::format("{}_trial{}.csv", algo, trial);
}

std::string rounds_file_name(const std::string& algo, std::size_t trial) {
  return fmt::format("{}_trial{}.rounds.csv", algo, trial);
}

void write_trace_file(const TraceTable& table, std::size_t coord_dim, const fs::path& path) {
  auto out = open_out(path);
  out << trace_header(coord_dim) << '\n';
  for (const auto& r : table.records) {
    if (r.coords.size() != coord_dim) throw LogicError("trace record has the wrong coordinate count");
    out << table.trial << ',' << table.algo << ',' << r.iter << ',' << r.candidate;
    for (double x : r.coords) out << ',' << num(x);
    out << ',' << num(r.f_exact) << ',' << num(r.min_f_exact) << ',' << r.roi_size << ',' << num(r.ci_width) << ','
        << num(r.info_gain_total) << ',' << num(r.beta) << ',' << num(r.wall_ms) << ',';
    for (std::size_t k = 0; k < r.warnings.size(); ++k) out << (k ? ";" : "") << r.warnings[k];
    out << '\n';
  }
  check_written(out, path);
}

namespace {

void write_rounds_file(const std::vector<RoundDiagnostics>& rounds, const fs::path& path) {
  auto out = open_out(path);
  out << rounds_header() << '\n';
  for (const auto& d : rounds) {
    out << d.iter << ',' << num(d.alpha) << ',' << num(d.alpha_global) << ',' << num(d.width_chain) << ','
        << num(d.posterior_width) << ',' << (d.roi_slices_match ? 1 : 0) << ',' << (d.envelope_reset ? 1 : 0) << ',' << num(d.draw) << ','
        << (d.explored ? 1 : 0) << ',' << d.exploit_choice << '\n';
  }
  check_written(out, path);
}

}  // namespace

TraceTable read_trace_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(fmt::format("{}: empty trace file", path.string()));
  const auto head = split(line, ',');
  if (head.size() < 12) throw ConfigError(fmt::format("{}: header too short", path.string()));
  const std::size_t dim = head.size() - 12;
  if (line != trace_header(dim) && line != trace_header(dim) + "\r") {
    throw ConfigError(fmt::format("{}: header does not match the trace schema", path.string()));
  }
  TraceTable table;
  std::size_t lineno = 1;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != head.size()) {
      throw ConfigError(fmt::format("{}:{}: expected {} fields, got {}", path.string(), lineno, head.size(), f.size()));
    }
    const std::size_t trial = parse_uint(f[0], path, lineno);
    if (first) {
      table.trial = trial;
      table.algo = f[1];
      first = false;
    } else if (trial != table.trial || f[1] != table.algo) {
      throw ConfigError(fmt::format("{}:{}: mixed runs in one trace file", path.string(), lineno));
    }
    TraceRecord r;
    r.iter = parse_uint(f[2], path, lineno);
    r.candidate = parse_uint(f[3], path, lineno);
    for (std::size_t k = 0; k < dim; ++k) r.coords.push_back(parse_num(f[4 + k], path, lineno));
    std::size_t c = 4 + dim;
    r.f_exact = parse_num(f[c++], path, lineno);
    r.min_f_exact = parse_num(f[c++], path, lineno);
    r.roi_size = parse_uint(f[c++], path, lineno);
    r.ci_width = parse_num(f[c++], path, lineno);
    r.info_gain_total = parse_num(f[c++], path, lineno);
    r.beta = parse_num(f[c++], path, lineno);
    r.wall_ms = parse_num(f[c++], path, lineno);
    if (!f[c].empty()) r.warnings = split(f[c], ';');
    table.records.push_back(std::move(r));
  }
  return table;
}

std::vector<RoundDiagnostics> read_rounds_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line) || split(line, ',') != split(rounds_header(), ',')) {
    throw ConfigError(fmt::format("{}: header does not match the round table schema", path.string()));
  }
  std::vector<RoundDiagnostics> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 10) throw ConfigError(fmt::format("{}:{}: expected 10 fields", path.string(), lineno));
    RoundDiagnostics d;
    d.iter = parse_uint(f[0], path, lineno);
    d.alpha = parse_num(f[1], path, lineno);
    d.alpha_global = parse_num(f[2], path, lineno);
    d.width_chain = parse_num(f[3], path, lineno);
    d.posterior_width = parse_num(f[4], path, lineno);
    d.roi_slices_match = parse_uint(f[5], path, lineno) != 0;
    d.envelope_reset = parse_uint(f[6], path, lineno) != 0;
    d.draw = parse_num(f[7], path, lineno);
    d.explored = parse_uint(f[8], path, lineno) != 0;
    d.exploit_choice = parse_uint(f[9], path, lineno);
    out.push_back(d);
  }
  return out;
}

void write_traces(const TraceSet& traces, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

  const ExperimentConfig& c = traces.config;
  json runs = json::array();
  for (const auto& rec : traces.runs) {
    const std::string algo = rec.algorithm.label();
    json r = {{"algo", algo},        {"epsilon", rec.algorithm.epsilon}, {"tau", rec.algorithm.tau},
              {"trial", rec.trial},  {"seed", rec.seed},                 {"ok", rec.ok()}};
    if (rec.ok()) {
      const RunResult& res = *rec.result;
      const std::string file = trace_file_name(algo, rec.trial);
      const std::string rounds = rounds_file_name(algo, rec.trial);
      write_trace_file({algo, rec.trial, res.trace, res.diagnostics}, traces.coord_dim, dir / file);
      write_rounds_file(res.diagnostics, dir / rounds);
      r["file"] = file;
      r["rounds_file"] = rounds;
      r["reported"] = res.reported;
      r["reported_loss"] = res.reported_loss;
      r["final_info_gain"] = res.final_info_gain;
      r["final_roi_size"] = res.final_roi.size();
      r["initial_design"] = res.initial_design;
      r["warnings"] = res.warnings;
    } else {
      r["error"] = rec.error;
    }
    runs.push_back(std::move(r));
  }

  const json meta = {
      {"version", NASHBO_VERSION},
      {"game", std::string(to_string(c.game.kind))},
      {"agents", c.game.n},
      {"noise_variance", c.game.noise_variance},
      {"beta", traces.beta},
      {"envelopes", c.envelopes},
      {"envelope_scope", std::string(to_string(c.envelope_scope))},
      {"horizon", c.horizon},
      {"init_count", c.init_count},
      {"trials", c.trials},
      {"base_seed", c.base_seed},
      {"instance_seed", c.game.budget.seed},
      {"domain_size", traces.domain_size},
      {"coord_dim", traces.coord_dim},
      {"config", config_echo(c)},
      {"runs", runs},
  };
  const fs::path path = dir / kMetadataFile;
  auto out = open_out(path);
  out << meta.dump(2) << '\n';
  check_written(out, path);
}

LoadedTraces read_traces(const fs::path& dir) {
  const fs::path path = dir / kMetadataFile;
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read '{}'", path.string()));
  json meta;
  try {
    in >> meta;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }

  LoadedTraces out;
  TraceMetadata& m = out.meta;
  try {
    m.version = meta.at("version").get<std::string>();
    m.game = meta.at("game").get<std::string>();
    m.agents = meta.at("agents").get<std::size_t>();
    m.noise_variance = meta.at("noise_variance").get<double>();
    m.beta = meta.at("beta").get<double>();
    m.envelopes = meta.at("envelopes").get<bool>();
    m.envelope_scope = meta.value("envelope_scope", std::string("refit"));
    m.horizon = meta.at("horizon").get<std::size_t>();
    m.init_count = meta.at("init_count").get<std::size_t>();
    m.trials = meta.at("trials").get<std::size_t>();
    m.base_seed = meta.at("base_seed").get<std::uint64_t>();
    m.instance_seed = meta.at("instance_seed").get<std::uint64_t>();
    m.domain_size = meta.at("domain_size").get<std::size_t>();
    m.coord_dim = meta.at("coord_dim").get<std::size_t>();
    for (const auto& r : meta.at("runs")) {
      RunMetadata rm;
      rm.algo = r.at("algo").get<std::string>();
      rm.epsilon = r.at("epsilon").get<double>();
      rm.tau = r.at("tau").get<double>();
      rm.trial = r.at("trial").get<std::size_t>();
      rm.seed = r.at("seed").get<std::uint64_t>();
      rm.ok = r.at("ok").get<bool>();
      if (rm.ok) {
        rm.file = r.at("file").get<std::string>();
        rm.rounds_file = r.value("rounds_file", std::string());
        rm.reported = r.at("reported").get<CandidateId>();
        rm.reported_loss = r.at("reported_loss").get<double>();
        rm.final_info_gain = r.at("final_info_gain").get<double>();
        rm.final_roi_size = r.value("final_roi_size", std::size_t{0});
        rm.initial_design = r.value("initial_design", std::vector<CandidateId>{});
        rm.warnings = r.value("warnings", std::vector<std::string>{});
      } else {
        rm.error = r.value("error", std::string());
      }
      m.runs.push_back(std::move(rm));
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: malformed metadata: {}", path.string(), e.what()));
  }

  for (const auto& rm : m.runs) {
    if (!rm.ok) continue;
    TraceTable t = read_trace_file(dir / rm.file);
    if (t.records.empty()) {
      t.algo = rm.algo;
      t.trial = rm.trial;
    }
    if (!rm.rounds_file.empty() && fs::exists(dir / rm.rounds_file)) t.rounds = read_rounds_file(dir / rm.rounds_file);
    out.tables.push_back(std::move(t));
  }
  return out;
}

}  // namespace nashbo
