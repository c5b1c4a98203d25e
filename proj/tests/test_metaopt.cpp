#include <doctest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"

using namespace mixbo;

namespace {

Box cube(std::size_t d, double lo, double hi) {
  return {Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), lo),
          Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), hi)};
}

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

double rastrigin(const Eigen::VectorXd& x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (Eigen::Index d = 0; d < x.size(); ++d) s += x[d] * x[d] - 10.0 * std::cos(2.0 * std::numbers::pi * x[d]);
  return s;
}

MinimizeResult run_de(const Objective& f, const Box& box, const DEParams& p, std::uint64_t seed,
                      const Budget& budget = {}) {
  std::mt19937_64 rng(seed);
  auto pop = uniform_population(box, p.resolved_population(box.dim()), rng);
  return de_minimize(f, box, p, std::move(pop), seed + 1, budget);
}

}  // namespace

TEST_CASE("mutation arithmetic") {
  const auto box = cube(2, -10.0, 10.0);
  const auto v = de_mutant(Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4), Eigen::Vector2d(2, 1), 0.5, box);
  CHECK(v[0] == 1.5);
  CHECK(v[1] == 3.5);
  const auto clipped = de_mutant(Eigen::Vector2d(9, 2), Eigen::Vector2d(9, 4), Eigen::Vector2d(0, 1), 0.5, box);
  CHECK(clipped[0] == 10.0);
}

TEST_CASE("default population size") {
  CHECK(DEParams::default_population(1) == 20);
  CHECK(DEParams::default_population(3) == 45);
  CHECK(DEParams::default_population(10) == 100);
}

TEST_CASE("invalid parameters are rejected") {
  DEParams p;
  p.F = 2.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.CR = 1.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.population_size = 3;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  QuasiParams q;
  q.fraction_local = 1.2;
  CHECK_THROWS_AS(q.validate(), ValidationError);
  std::mt19937_64 rng(0);
  const auto box = cube(2, 0, 1);
  DEParams ok;
  ok.population_size = 10;
  CHECK_THROWS_AS(de_minimize(sphere, box, ok, uniform_population(box, 9, rng), 0), ValidationError);
  auto outside = uniform_population(box, 10, rng);
  outside[3][0] = 2.0;
  CHECK_THROWS_AS(de_minimize(sphere, box, ok, outside, 0), ValidationError);
}

TEST_CASE("DE converges on the 5-D sphere") {
  DEParams p;
  p.population_size = 50;
  p.max_generations = 100;
  std::vector<double> best;
  for (std::uint64_t seed = 0; seed < 10; ++seed) best.push_back(run_de(sphere, cube(5, -5, 5), p, seed).best_value);
  CHECK(testutil::median(best) < 1e-3);
}

TEST_CASE("DE properties: bounds, elitism trace, determinism") {
  const auto box = cube(3, -2.0, 3.0);
  DEParams p;
  p.max_generations = 30;
  const auto a = run_de(rastrigin, box, p, 5);
  const auto b = run_de(rastrigin, box, p, 5);
  CHECK(a.best_point == b.best_point);
  CHECK(a.best_value == b.best_value);
  CHECK(a.trace == b.trace);
  CHECK(box.contains(a.best_point));
  for (const auto& c : a.candidates) CHECK(box.contains(c.point));
  for (std::size_t i = 1; i < a.trace.size(); ++i) CHECK(a.trace[i] <= a.trace[i - 1]);
  CHECK(a.trace.size() == p.max_generations + 1);
  CHECK(a.best_value == a.candidates.front().value);
}

TEST_CASE("DE keeps a population member that already holds the optimum") {
  const auto box = cube(4, -5, 5);
  DEParams p;
  p.population_size = 20;
  p.max_generations = 5;
  std::mt19937_64 rng(3);
  auto pop = uniform_population(box, 20, rng);
  pop[7].setZero();
  const auto r = de_minimize(sphere, box, p, pop, 9);
  CHECK(r.best_value <= 0.0);
}

TEST_CASE("both meta-optimizers respect the evaluation budget exactly") {
  const auto box = cube(3, -1, 1);
  for (std::size_t limit : {1u, 7u, 37u, 500u}) {
    std::size_t calls = 0;
    const Objective f = [&](const Eigen::VectorXd& x) { ++calls; return sphere(x); };
    DEParams p;
    p.population_size = 10;
    run_de(f, box, p, 1, {limit, std::numeric_limits<double>::infinity()});
    CHECK(calls == limit);
    calls = 0;
    const auto r = local_search_minimize(f, box, 50, 2, {limit, std::numeric_limits<double>::infinity()});
    CHECK(calls <= limit);
    CHECK(r.evaluations == calls);
  }
}

TEST_CASE("NaN objective values are never selected") {
  const auto box = cube(2, -1, 1);
  const Objective f = [](const Eigen::VectorXd& x) { return x[0] > 0.0 ? std::nan("") : sphere(x); };
  DEParams p;
  p.max_generations = 40;
  const auto r = run_de(f, box, p, 4);
  CHECK(std::isfinite(r.best_value));
  CHECK(r.best_point[0] <= 0.0);
  const auto l = local_search_minimize(f, box, 5, 4);
  CHECK(std::isfinite(l.best_value));
}

TEST_CASE("quasi-random init without promising points is uniform init") {
  const auto s = testutil::mixed_space();
  const auto init = quasi_random_init(s, Discretization::Naive, 30, {}, {}, 42);
  std::mt19937_64 rng(42);
  const auto uniform = uniform_population(Box::of(s), 30, rng);
  REQUIRE(init.size() == 30);
  for (std::size_t i = 0; i < 30; ++i) CHECK(init[i] == uniform[i]);
}

TEST_CASE("quasi-random init with zero sigma cycles the top points") {
  const auto s = testutil::real_space(2, -1.0, 1.0);
  std::vector<Candidate> promising;
  for (int i = 0; i < 4; ++i) promising.push_back({Eigen::Vector2d(0.1 * i, -0.1 * i), static_cast<double>(i)});
  QuasiParams q;
  q.top_k = 3;
  q.sigma_frac = 0.0;
  q.fraction_local = 0.5;
  const auto init = quasi_random_init(s, Discretization::Naive, 11, promising, q, 1);
  REQUIRE(init.size() == 11);
  for (std::size_t i = 0; i < 6; ++i) CHECK(init[i] == promising[i % 3].point);  // ceil(5.5) = 6
  for (std::size_t i = 6; i < 11; ++i) {
    bool is_anchor = false;
    for (const auto& c : promising) is_anchor |= init[i] == c.point;
    CHECK_FALSE(is_anchor);
  }
}

TEST_CASE("quasi-random members are in bounds and canonical in complex mode") {
  const auto s = testutil::mixed_space();
  std::mt19937_64 rng(10);
  std::vector<Candidate> promising;
  for (int i = 0; i < 8; ++i) promising.push_back({s.coerce(testutil::uniform_point(s, rng)), static_cast<double>(i)});
  QuasiParams q;
  q.sigma_frac = 0.5;
  const auto box = Box::of(s);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto init = quasi_random_init(s, Discretization::Complex, 40, promising, q, seed);
    for (const auto& x : init) {
      CHECK(box.contains(x));
      CHECK(s.coerce(x) == x);
    }
    CHECK(quasi_random_init(s, Discretization::Complex, 40, promising, q, seed) == init);
  }
}

TEST_CASE("quasi-random init near the optimum helps DE on Rastrigin") {
  const auto s = testutil::real_space(4, -5.12, 5.12);
  const std::vector<Candidate> promising{{Eigen::VectorXd::Zero(4), 0.0}};
  DEParams p;
  p.max_generations = 20;
  std::vector<double> quasi, random;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto box = Box::of(s);
    auto qi = quasi_random_init(s, Discretization::Naive, p.resolved_population(4), promising, {}, seed);
    auto ri = quasi_random_init(s, Discretization::Naive, p.resolved_population(4), {}, {}, seed);
    quasi.push_back(de_minimize(rastrigin, box, p, qi, seed).best_value);
    random.push_back(de_minimize(rastrigin, box, p, ri, seed).best_value);
  }
  CHECK(testutil::median(quasi) <= testutil::median(random));
}

TEST_CASE("local search converges on a 1-D quadratic") {
  const auto box = cube(1, -1.0, 1.0);
  const Objective f = [](const Eigen::VectorXd& x) { return (x[0] - 0.3) * (x[0] - 0.3); };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = local_search_minimize(f, box, 1, seed);
    CHECK(std::abs(r.best_point[0] - 0.3) < 1e-4);
  }
}

TEST_CASE("local search on a constant objective returns a start point") {
  const auto box = cube(3, 0.0, 2.0);
  const Objective f = [](const Eigen::VectorXd&) { return 4.5; };
  const auto r = local_search_minimize(f, box, 3, 7);
  CHECK(r.best_value == 4.5);
  CHECK(box.contains(r.best_point));
  CHECK(r.candidates.size() == 3);
  CHECK_THROWS_AS(local_search_minimize(f, box, 0, 7), ValidationError);
}

TEST_CASE("local search stalls on complex-mode EI plateaus where DE does not") {
  const auto& problem = bench::find_problem("mixed");
  const auto& s = problem.space;
  std::vector<double> local, de;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto prime = random_init(s, 2, 8, seed);
    Dataset data;
    data.y.resize(static_cast<Eigen::Index>(prime.size()));
    for (std::size_t i = 0; i < prime.size(); ++i) {
      data.X.push_back(s.warp(prime[i]));
      data.y[static_cast<Eigen::Index>(i)] = problem.evaluate(prime[i]);
    }
    const auto ctx = AcquisitionContext::make(
        fit(s, data, KernelConfig::defaults(s.warped_dim()), seed), data.y.minCoeff());
    const Objective neg_ei = [&](const Eigen::VectorXd& x) { return -expected_improvement(ctx, x); };
    MetaOptimizer meta;
    meta.meta_init = MetaInit::Random;
    meta.de.max_generations = 30;
    de.push_back(meta_minimize(meta, neg_ei, s, Discretization::Complex, {}, seed).best_value);
    meta.kind = MetaKind::BoundedLocalSearch;
    local.push_back(meta_minimize(meta, neg_ei, s, Discretization::Complex, {}, seed).best_value);
  }
  CHECK(testutil::median(local) >= testutil::median(de));
}
