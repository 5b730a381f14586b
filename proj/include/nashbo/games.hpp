#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "nashbo/space.hpp"

namespace nashbo {

enum class GameKind { Saddle, RockPaperScissors, Hotelling, BudgetAllocation, Bimatrix };

std::string_view to_string(GameKind kind);
GameKind parse_game_kind(std::string_view name);

using UtilityVector = std::vector<double>;

/// Bipartite channel/customer instance of the budget allocation game.
struct BudgetInstance {
  std::size_t channels = 4;
  std::size_t customers = 12;
  std::vector<int> capacity;       // c(s), one per channel
  std::vector<double> unit_cost;   // w(s), one per channel
  double budget = 3.0;             // B
  Eigen::MatrixXd activation;      // p(s, z), channels x customers
  std::uint64_t seed = 1;

  /// c(s) = 2, w(s) = 1, B = 3, p(s, z) ~ U[0, 0.2] drawn from `seed`.
  static BudgetInstance generate(std::size_t channels, std::size_t customers, std::uint64_t seed);
};

struct GameSpec {
  GameKind kind = GameKind::Saddle;
  std::size_t n = 2;
  double noise_variance = 0.01;
  /// Grid points per axis (Saddle, Hotelling).
  std::size_t resolution = 21;
  /// Simplex lattice denominator k (RPS).
  std::size_t lattice = 6;
  /// Integration grid per axis for Hotelling market shares.
  std::size_t hotelling_m = 201;
  BudgetInstance budget;
  /// Bimatrix payoffs: rows index agent 1's action, columns agent 2's.
  Eigen::MatrixXd payoff_row;
  Eigen::MatrixXd payoff_col;
  std::size_t max_candidates = kDefaultCandidateCap;

  /// Defaults per kind: Saddle 21 per axis, RPS k = 6, Hotelling 11x11 per
  /// firm with m = 201, Budget |S| = 4 |Z| = 12, Bimatrix the 3x3 toy game.
  static GameSpec defaults(GameKind kind);

  /// Throws ConfigError listing every violated constraint.
  void validate() const;
};

/// 3x3 game with unique pure equilibrium at (middle, middle); every other
/// profile has exact loss >= 0.5.
void set_toy_bimatrix(GameSpec& spec);

JointSpace build_space(const GameSpec& spec);

/// Noise-free utilities computed directly from the game definition.
UtilityVector exact_utilities(const GameSpec& spec, const JointSpace& space, CandidateId id);

/// Immutable game instance: spec, discretization and a precomputed table of
/// exact utilities. Safe to share between concurrent trials.
class GameOracle {
 public:
  explicit GameOracle(GameSpec spec);

  const GameSpec& spec() const { return spec_; }
  const JointSpace& space() const { return space_; }
  std::size_t agents() const { return space_.agents(); }

  UtilityVector exact_utilities(CandidateId id) const;
  double utility(CandidateId id, std::size_t agent) const { return table_(id, agent); }

  /// Exact utilities plus i.i.d. N(0, noise_variance) per agent.
  UtilityVector query(CandidateId id, std::mt19937_64& rng) const;

  /// max over agent i's slice of u_i minus u_i(x); never negative.
  double best_response_gain(std::size_t agent, CandidateId id) const;
  /// Sum of best-response gains (zero exactly at equilibria).
  double exact_loss(CandidateId id) const;
  bool is_eps_ne(CandidateId id, double eps) const;

  /// Candidates whose exact loss is at most `tol`.
  std::vector<CandidateId> equilibria(double tol = 1e-12) const;

 private:
  GameSpec spec_;
  JointSpace space_;
  Eigen::MatrixXd table_;  // |D| x n
};

}  // namespace nashbo
