#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nashbo/bounds.hpp"
#include "nashbo/errors.hpp"
#include "nashbo/games.hpp"

using namespace nashbo;

namespace {

JointSpace grid(std::size_t per_axis) {
  Eigen::MatrixXd s(per_axis, 1);
  for (std::size_t k = 0; k < per_axis; ++k) s(k, 0) = double(k) / double(per_axis - 1);
  return JointSpace({s, s});
}

PosteriorBatch constant(std::size_t m, double mean, double var) {
  return {Eigen::VectorXd::Constant(m, mean), Eigen::VectorXd::Constant(m, var)};
}

PosteriorBatch random_posterior(std::mt19937_64& rng, std::size_t m) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.001, 0.5);
  PosteriorBatch p{Eigen::VectorXd(m), Eigen::VectorXd(m)};
  for (std::size_t k = 0; k < m; ++k) {
    p.mean(k) = z(rng);
    p.variance(k) = u(rng);
  }
  return p;
}

std::vector<CandidateId> random_subset(std::mt19937_64& rng, std::size_t m) {
  std::bernoulli_distribution keep(0.5);
  std::vector<CandidateId> ids;
  for (CandidateId id = 0; id < m; ++id)
    if (keep(rng)) ids.push_back(id);
  if (ids.empty()) ids.push_back(0);
  return ids;
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("u bounds at the prior") {
  const auto b = u_bounds(constant(4, 0.0, 1.0), 4.0);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(b.ucb[k] == 2.0);
    CHECK(b.lcb[k] == -2.0);
  }
  const auto z = u_bounds(constant(4, 0.3, 1.0), 0.0);
  CHECK(z.ucb == z.lcb);
}

TEST_CASE("v bounds reduce to slice maxima") {
  Eigen::MatrixXd s(2, 1);
  s << 0.0, 1.0;
  const JointSpace space({s, s});
  PosteriorBatch p{Eigen::VectorXd(4), Eigen::VectorXd::Zero(4)};
  p.mean << 0.1, 0.7, 0.4, 0.2;  // agent 0 slices: {0, 2} and {1, 3}
  const auto u = u_bounds(p, 0.0);
  const auto v = v_bounds(u, space, Region::full(4), 0);
  CHECK(v.ucb[0] == 0.4);
  CHECK(v.ucb[2] == 0.4);
  CHECK(v.lcb[0] == 0.4);
  CHECK(v.ucb[1] == 0.7);

  const auto single = v_bounds(u, space, Region::of({1}, 4), 0);
  CHECK(single.ucb[1] == u.ucb[1]);
  CHECK(single.lcb[1] == u.lcb[1]);
  CHECK(std::isnan(single.ucb[0]));
}

TEST_CASE("prior-only f bounds and acquisition") {
  const auto space = grid(5);
  const std::size_t m = space.size();
  std::vector<Interval> u(2, u_bounds(constant(m, 0.0, 1.0), 4.0));
  const auto t = compose_bounds(1, 4.0, u, space, Region::full(m));
  for (std::size_t k = 0; k < m; ++k) {
    CHECK(t.f.ucb[k] == 8.0);
    CHECK(t.f.lcb[k] == -8.0);
  }
  for (double a : acquisition(t, Region::full(m))) CHECK(a == 16.0);

  std::vector<Interval> flat(2, u_bounds(constant(m, 0.0, 1.0), 0.0));
  for (double a : acquisition(compose_bounds(1, 0.0, flat, space, Region::full(m)), Region::full(m)))
    CHECK(a == 0.0);
}

TEST_CASE("f bounds collapse to the exact loss at beta zero") {
  const GameOracle g(GameSpec::defaults(GameKind::Saddle));
  const std::size_t m = g.space().size();
  std::vector<Interval> u;
  for (std::size_t i = 0; i < 2; ++i) {
    PosteriorBatch p{Eigen::VectorXd(m), Eigen::VectorXd::Zero(m)};
    for (CandidateId id = 0; id < m; ++id) p.mean(id) = g.utility(id, i);
    u.push_back(u_bounds(p, 0.0));
  }
  const auto t = compose_bounds(1, 0.0, u, g.space(), Region::full(m));
  for (CandidateId id = 0; id < m; ++id) {
    REQUIRE(t.f.ucb[id] == doctest::Approx(g.exact_loss(id)).epsilon(1e-12));
    REQUIRE(t.f.lcb[id] == doctest::Approx(g.exact_loss(id)).epsilon(1e-12));
  }
}

TEST_CASE("ordering, slice constancy, region monotonicity, width chain") {
  std::mt19937_64 rng(99);
  const auto space = grid(6);
  const std::size_t m = space.size();
  for (int rep = 0; rep < 40; ++rep) {
    const double beta = 0.5 + rep % 4;
    std::vector<Interval> u;
    std::vector<PosteriorBatch> post;
    for (int i = 0; i < 2; ++i) {
      post.push_back(random_posterior(rng, m));
      u.push_back(u_bounds(post.back(), beta));
    }
    const Region S = Region::of(random_subset(rng, m), m);
    const auto t = compose_bounds(1, beta, u, space, S);
    const auto full = compose_bounds(1, beta, u, space, Region::full(m));
    for (std::size_t i = 0; i < 2; ++i) {
      for (CandidateId id = 0; id < m; ++id) {
        REQUIRE(u[i].lcb[id] <= u[i].ucb[id]);
        REQUIRE(full.v[i].lcb[id] <= full.v[i].ucb[id]);
        const CandidateId base = space.slice_base(i, id);
        REQUIRE(full.v[i].ucb[id] == full.v[i].ucb[base]);
        REQUIRE(full.v[i].lcb[id] == full.v[i].lcb[base]);
        if (!std::isnan(t.v[i].ucb[id])) {
          REQUIRE(t.v[i].ucb[id] <= full.v[i].ucb[id]);
          REQUIRE(t.v[i].lcb[id] <= full.v[i].lcb[id]);
        }
      }
    }
    for (CandidateId id : S.ids()) REQUIRE(t.f.lcb[id] <= t.f.ucb[id]);
    // At the acquisition maximizer the f width is bounded by (n + 1) times the summed u widths.
    const auto alpha = acquisition(t, S);
    const CandidateId x = S.ids()[std::max_element(alpha.begin(), alpha.end()) - alpha.begin()];
    double chain = 0.0;
    for (int i = 0; i < 2; ++i) chain += 2.0 * std::sqrt(beta * post[i].variance(x));
    REQUIRE(t.f.ucb[x] - t.f.lcb[x] <= 3.0 * chain + 1e-12);
  }
}

TEST_CASE("f bounds refuse undefined required entries") {
  const auto space = grid(3);
  std::vector<Interval> u(2, u_bounds(constant(9, 0.0, 1.0), 1.0));
  const Region one = Region::of({0}, 9);
  std::vector<Interval> v;
  for (std::size_t i = 0; i < 2; ++i) v.push_back(v_bounds(u[i], space, one, i));
  const std::vector<CandidateId> need{4};
  CHECK_THROWS_AS(f_bounds(u, v, need), LogicError);
}

TEST_CASE("envelope intersection") {
  Interval a{{-1.0, 0.0, 2.0}, {1.0, 3.0, 4.0}};
  CHECK(intersect(a, a).lcb == a.lcb);
  CHECK(intersect(a, a).ucb == a.ucb);

  Interval wide{{-5.0, -5.0, -5.0}, {5.0, 5.0, 5.0}};
  CHECK(intersect(a, wide).lcb == a.lcb);
  CHECK(intersect(a, wide).ucb == a.ucb);

  // Disjoint: the result sits on the nearest end of the previous interval.
  Interval far{{5.0, -9.0, 2.5}, {6.0, -8.0, 3.0}};
  std::size_t conflicts = 0;
  const auto c = intersect(a, far, &conflicts);
  CHECK(conflicts == 2);
  CHECK(c.lcb[0] == 1.0);
  CHECK(c.ucb[0] == 1.0);
  CHECK(c.lcb[1] == 0.0);
  CHECK(c.ucb[1] == 0.0);
  CHECK(c.lcb[2] == 2.5);
  CHECK(c.ucb[2] == 3.0);
}

TEST_CASE("envelope sequences stay nested") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> w(0.0, 2.0);
  EnvelopeState env;
  std::vector<Interval> prev;
  for (int round = 0; round < 30; ++round) {
    std::vector<Interval> cur(2);
    for (auto& iv : cur) {
      for (int k = 0; k < 12; ++k) {
        const double c = z(rng), h = w(rng);
        iv.lcb.push_back(c - h);
        iv.ucb.push_back(c + h);
      }
    }
    const auto raw = cur;
    const auto out = env.apply(cur);
    for (std::size_t i = 0; i < 2; ++i) {
      for (int k = 0; k < 12; ++k) {
        REQUIRE(out[i].lcb[k] <= out[i].ucb[k]);
        if (!prev.empty()) {
          REQUIRE(out[i].lcb[k] >= prev[i].lcb[k]);
          REQUIRE(out[i].ucb[k] <= prev[i].ucb[k]);
        }
        if (raw[i].lcb[k] <= (prev.empty() ? raw[i].ucb[k] : prev[i].ucb[k]) &&
            raw[i].ucb[k] >= (prev.empty() ? raw[i].lcb[k] : prev[i].lcb[k])) {
          REQUIRE(out[i].lcb[k] >= raw[i].lcb[k]);
          REQUIRE(out[i].ucb[k] <= raw[i].ucb[k]);
        }
      }
    }
    prev = out;
  }
  env.reset();
  CHECK_FALSE(env.has_history());

  EnvelopeState off(false);
  std::vector<Interval> one(1, Interval{{0.0}, {1.0}});
  off.apply(one);
  std::vector<Interval> two(1, Interval{{-3.0}, {3.0}});
  CHECK(off.apply(two)[0].ucb[0] == 3.0);
}

}
