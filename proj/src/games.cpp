#include "nashbo/games.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "nashbo/errors.hpp"

namespace nashbo {

namespace {

Eigen::MatrixXd unit_grid(std::size_t per_axis, std::size_t dims) {
  std::size_t count = 1;
  for (std::size_t d = 0; d < dims; ++d) count *= per_axis;
  Eigen::MatrixXd out(count, dims);
  for (std::size_t r = 0; r < count; ++r) {
    std::size_t rem = r;
    for (std::size_t d = dims; d-- > 0;) {
      const std::size_t k = rem % per_axis;
      rem /= per_axis;
      out(r, d) = per_axis == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(per_axis - 1);
    }
  }
  return out;
}

Eigen::MatrixXd simplex_lattice(std::size_t k) {
  std::vector<Eigen::Vector3d> pts;
  const double denom = static_cast<double>(k);
  for (std::size_t a = 0; a <= k; ++a) {
    for (std::size_t b = 0; a + b <= k; ++b) {
      const std::size_t c = k - a - b;
      pts.emplace_back(a / denom, b / denom, c / denom);
    }
  }
  Eigen::MatrixXd out(pts.size(), 3);
  for (std::size_t r = 0; r < pts.size(); ++r) out.row(r) = pts[r].transpose();
  return out;
}

Eigen::MatrixXd budget_strategies(const BudgetInstance& inst) {
  std::vector<std::vector<int>> rows;
  std::vector<int> cur(inst.channels, 0);
  // Odometer over the capacity box, keeping allocations within budget.
  while (true) {
    double cost = 0.0;
    for (std::size_t s = 0; s < inst.channels; ++s) cost += inst.unit_cost[s] * cur[s];
    if (cost <= inst.budget + 1e-12) rows.push_back(cur);
    std::size_t s = inst.channels;
    while (s-- > 0) {
      if (cur[s] < inst.capacity[s]) {
        ++cur[s];
        break;
      }
      cur[s] = 0;
    }
    if (s == static_cast<std::size_t>(-1)) break;
  }
  Eigen::MatrixXd out(rows.size(), inst.channels);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t s = 0; s < inst.channels; ++s) out(r, s) = rows[r][s];
  }
  return out;
}

double hotelling_share(const JointSpace& space, CandidateId id, std::size_t agent, std::size_t m,
                       std::vector<double>& xs, std::vector<double>& ys) {
  const std::size_t n = space.agents();
  const auto row = space.features().row(id);
  for (std::size_t j = 0; j < n; ++j) {
    xs[j] = row(space.offset(j));
    ys[j] = row(space.offset(j) + 1);
  }
  const double h = 1.0 / static_cast<double>(m);
  double share = 0.0;
  std::vector<double> dy2(n);
  for (std::size_t b = 0; b < m; ++b) {
    const double cy = (b + 0.5) * h;
    for (std::size_t j = 0; j < n; ++j) dy2[j] = (cy - ys[j]) * (cy - ys[j]);
    for (std::size_t a = 0; a < m; ++a) {
      const double cx = (a + 0.5) * h;
      const double mine = (cx - xs[agent]) * (cx - xs[agent]) + dy2[agent];
      bool beaten = false;
      int ties = 1;
      for (std::size_t j = 0; j < n && !beaten; ++j) {
        if (j == agent) continue;
        const double d = (cx - xs[j]) * (cx - xs[j]) + dy2[j];
        if (d < mine - 1e-12) beaten = true;
        else if (std::abs(d - mine) <= 1e-12) ++ties;
      }
      if (!beaten) share += 1.0 / ties;
    }
  }
  return share * h * h;
}

double budget_utility(const GameSpec& spec, const JointSpace& space, CandidateId id, std::size_t agent) {
  const auto& inst = spec.budget;
  const std::size_t n = space.agents();
  // P_j(x_j, z) for every advertiser and customer.
  Eigen::MatrixXd reach(n, inst.customers);
  for (std::size_t j = 0; j < n; ++j) {
    const auto alloc = space.agent_strategies(j).row(space.strategy_index(id, j));
    for (std::size_t z = 0; z < inst.customers; ++z) {
      double miss = 1.0;
      for (std::size_t s = 0; s < inst.channels; ++s) miss *= std::pow(1.0 - inst.activation(s, z), alloc(s));
      reach(j, z) = 1.0 - miss;
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double total = 0.0;
  std::size_t perms = 0;
  do {
    ++perms;
    for (std::size_t z = 0; z < inst.customers; ++z) {
      double untouched = 1.0;
      for (std::size_t j : order) {
        if (j == agent) break;
        untouched *= 1.0 - reach(j, z);
      }
      total += reach(agent, z) * untouched;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return total / static_cast<double>(perms);
}

}  // namespace

std::string_view to_string(GameKind kind) {
  switch (kind) {
    case GameKind::Saddle: return "saddle";
    case GameKind::RockPaperScissors: return "rps";
    case GameKind::Hotelling: return "hotelling";
    case GameKind::BudgetAllocation: return "budget";
    case GameKind::Bimatrix: return "bimatrix";
  }
  return "unknown";
}

GameKind parse_game_kind(std::string_view name) {
  if (name == "saddle") return GameKind::Saddle;
  if (name == "rps" || name == "rock-paper-scissors") return GameKind::RockPaperScissors;
  if (name == "hotelling") return GameKind::Hotelling;
  if (name == "budget" || name == "budget-allocation") return GameKind::BudgetAllocation;
  if (name == "bimatrix" || name == "toy") return GameKind::Bimatrix;
  throw ConfigError(fmt::format("unknown game kind '{}'", name));
}

BudgetInstance BudgetInstance::generate(std::size_t channels, std::size_t customers, std::uint64_t seed) {
  BudgetInstance inst;
  inst.channels = channels;
  inst.customers = customers;
  inst.capacity.assign(channels, 2);
  inst.unit_cost.assign(channels, 1.0);
  inst.budget = 3.0;
  inst.seed = seed;
  inst.activation.resize(channels, customers);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 0.2);
  for (std::size_t s = 0; s < channels; ++s) {
    for (std::size_t z = 0; z < customers; ++z) inst.activation(s, z) = unif(rng);
  }
  return inst;
}

void set_toy_bimatrix(GameSpec& spec) {
  Eigen::MatrixXd u1(3, 3);
  u1 << 0.1, 0.2, 0.0,
        0.7, 0.8, 0.6,
        0.2, 0.3, 0.1;
  spec.payoff_row = u1;
  spec.payoff_col = u1.transpose();
}

GameSpec GameSpec::defaults(GameKind kind) {
  GameSpec spec;
  spec.kind = kind;
  switch (kind) {
    case GameKind::Saddle: spec.resolution = 21; break;
    case GameKind::RockPaperScissors: spec.lattice = 6; break;
    case GameKind::Hotelling: spec.resolution = 11; break;
    case GameKind::BudgetAllocation: spec.budget = BudgetInstance::generate(4, 12, 1); break;
    case GameKind::Bimatrix: set_toy_bimatrix(spec); break;
  }
  return spec;
}

void GameSpec::validate() const {
  std::vector<std::string> errs;
  if (!(noise_variance >= 0.0)) errs.push_back("noise_variance must be >= 0");
  if (n < 1) errs.push_back("n must be >= 1");
  switch (kind) {
    case GameKind::Saddle:
      if (n != 2) errs.push_back("saddle is a two-player game");
      if (resolution < 1) errs.push_back("resolution must be >= 1");
      break;
    case GameKind::RockPaperScissors:
      if (n != 2) errs.push_back("rps is a two-player game");
      if (lattice < 3 || lattice % 3 != 0) errs.push_back("rps lattice denominator must be a positive multiple of 3");
      break;
    case GameKind::Hotelling:
      if (n < 2) errs.push_back("hotelling needs at least two firms");
      if (resolution < 1) errs.push_back("resolution must be >= 1");
      if (hotelling_m < 1) errs.push_back("hotelling_m must be >= 1");
      break;
    case GameKind::BudgetAllocation: {
      if (n < 1 || n > 4) errs.push_back("budget game supports 1 <= n <= 4 (exact permutation average)");
      const auto& b = budget;
      if (b.channels < 1 || b.customers < 1) errs.push_back("budget game needs channels and customers");
      if (b.capacity.size() != b.channels) errs.push_back("capacity must have one entry per channel");
      if (b.unit_cost.size() != b.channels) errs.push_back("unit_cost must have one entry per channel");
      for (int c : b.capacity) {
        if (c < 0) { errs.push_back("capacities must be >= 0"); break; }
      }
      for (double w : b.unit_cost) {
        if (!(w > 0.0)) { errs.push_back("unit costs must be > 0"); break; }
      }
      if (b.budget < 0.0) errs.push_back("budget B is too small: no feasible allocation");
      if (static_cast<std::size_t>(b.activation.rows()) != b.channels ||
          static_cast<std::size_t>(b.activation.cols()) != b.customers) {
        errs.push_back("activation matrix must be channels x customers");
      } else if (b.activation.size() > 0 &&
                 (b.activation.minCoeff() < 0.0 || b.activation.maxCoeff() > 1.0)) {
        errs.push_back("activation probabilities must lie in [0, 1]");
      }
      break;
    }
    case GameKind::Bimatrix:
      if (n != 2) errs.push_back("bimatrix is a two-player game");
      if (payoff_row.size() == 0 || payoff_row.rows() != payoff_col.rows() ||
          payoff_row.cols() != payoff_col.cols()) {
        errs.push_back("bimatrix payoff tables must be non-empty and equally shaped");
      }
      break;
  }
  if (!errs.empty()) {
    std::string msg = "invalid game specification:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
}

JointSpace build_space(const GameSpec& spec) {
  spec.validate();
  std::vector<Eigen::MatrixXd> per_agent;
  switch (spec.kind) {
    case GameKind::Saddle:
      per_agent.assign(2, unit_grid(spec.resolution, 1));
      break;
    case GameKind::RockPaperScissors:
      per_agent.assign(2, simplex_lattice(spec.lattice));
      break;
    case GameKind::Hotelling:
      per_agent.assign(spec.n, unit_grid(spec.resolution, 2));
      break;
    case GameKind::BudgetAllocation: {
      auto strategies = budget_strategies(spec.budget);
      if (strategies.rows() == 0) throw ConfigError("budget game has an empty feasible set");
      per_agent.assign(spec.n, strategies);
      break;
    }
    case GameKind::Bimatrix: {
      const auto actions = [](Eigen::Index count) {
        Eigen::MatrixXd out(count, 1);
        for (Eigen::Index a = 0; a < count; ++a) out(a, 0) = count == 1 ? 0.0 : double(a) / double(count - 1);
        return out;
      };
      per_agent.push_back(actions(spec.payoff_row.rows()));
      per_agent.push_back(actions(spec.payoff_row.cols()));
      break;
    }
  }
  return JointSpace(std::move(per_agent), spec.max_candidates);
}

UtilityVector exact_utilities(const GameSpec& spec, const JointSpace& space, CandidateId id) {
  const std::size_t n = space.agents();
  UtilityVector u(n, 0.0);
  const auto x = space.features().row(id);
  switch (spec.kind) {
    case GameKind::Saddle: {
      const double d1 = (x(0) - 0.5) * (x(0) - 0.5);
      const double d2 = (x(1) - 0.5) * (x(1) - 0.5);
      u[0] = d2 - d1;
      u[1] = d1 - d2;
      break;
    }
    case GameKind::RockPaperScissors: {
      const double r1 = x(0), p1 = x(1), s1 = x(2);
      const double r2 = x(3), p2 = x(4), s2 = x(5);
      u[0] = (p1 - s1) * r2 + (s1 - r1) * p2 + (r1 - p1) * s2;
      u[1] = (p2 - s2) * r1 + (s2 - r2) * p1 + (r2 - p2) * s1;
      break;
    }
    case GameKind::Hotelling: {
      std::vector<double> xs(n), ys(n);
      for (std::size_t i = 0; i < n; ++i) u[i] = hotelling_share(space, id, i, spec.hotelling_m, xs, ys);
      break;
    }
    case GameKind::BudgetAllocation:
      for (std::size_t i = 0; i < n; ++i) u[i] = budget_utility(spec, space, id, i);
      break;
    case GameKind::Bimatrix: {
      const auto a = static_cast<Eigen::Index>(space.strategy_index(id, 0));
      const auto b = static_cast<Eigen::Index>(space.strategy_index(id, 1));
      u[0] = spec.payoff_row(a, b);
      u[1] = spec.payoff_col(a, b);
      break;
    }
  }
  return u;
}

GameOracle::GameOracle(GameSpec spec) : spec_(std::move(spec)), space_(build_space(spec_)) {
  const std::size_t n = space_.agents();
  table_.resize(static_cast<Eigen::Index>(space_.size()), static_cast<Eigen::Index>(n));
  for (CandidateId id = 0; id < space_.size(); ++id) {
    const auto u = nashbo::exact_utilities(spec_, space_, id);
    for (std::size_t i = 0; i < n; ++i) table_(id, i) = u[i];
  }
}

UtilityVector GameOracle::exact_utilities(CandidateId id) const {
  UtilityVector u(agents());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = table_(id, i);
  return u;
}

UtilityVector GameOracle::query(CandidateId id, std::mt19937_64& rng) const {
  UtilityVector y = exact_utilities(id);
  if (spec_.noise_variance > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(spec_.noise_variance));
    for (double& v : y) v += noise(rng);
  }
  return y;
}

double GameOracle::best_response_gain(std::size_t agent, CandidateId id) const {
  const CandidateId base = space_.slice_base(agent, id);
  const std::size_t stride = space_.stride(agent);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < space_.strategies(agent); ++k) {
    best = std::max(best, table_(base + k * stride, agent));
  }
  return std::max(0.0, best - table_(id, agent));
}

double GameOracle::exact_loss(CandidateId id) const {
  double f = 0.0;
  for (std::size_t i = 0; i < agents(); ++i) f += best_response_gain(i, id);
  return f;
}

bool GameOracle::is_eps_ne(CandidateId id, double eps) const {
  for (std::size_t i = 0; i < agents(); ++i) {
    if (best_response_gain(i, id) > eps) return false;
  }
  return true;
}

std::vector<CandidateId> GameOracle::equilibria(double tol) const {
  std::vector<CandidateId> out;
  for (CandidateId id = 0; id < space_.size(); ++id) {
    if (exact_loss(id) <= tol) out.push_back(id);
  }
  return out;
}

}  // namespace nashbo
