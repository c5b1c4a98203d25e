#include "mixbo/metaopt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "mixbo/random.hpp"

namespace mixbo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Wraps an objective with NaN -> +inf and an exact evaluation counter.
class CountedObjective {
 public:
  CountedObjective(const Objective& f, std::size_t limit) : f_(f), limit_(limit) {}

  bool exhausted() const { return count_ >= limit_; }
  std::size_t count() const { return count_; }

  double operator()(const Eigen::VectorXd& x) {
    ++count_;
    const double v = f_(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  }

 private:
  const Objective& f_;
  std::size_t limit_;
  std::size_t count_ = 0;
};

void sort_candidates(std::vector<Candidate>& c) {
  std::stable_sort(c.begin(), c.end(),
                   [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
}

}  // namespace

bool Box::contains(const Eigen::VectorXd& x) const {
  return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
         (x.array() <= upper.array()).all();
}

std::size_t DEParams::default_population(std::size_t dim) {
  return std::max<std::size_t>(20, std::min<std::size_t>(15 * dim, 100));
}

void DEParams::validate() const {
  if (population_size != 0 && population_size < 4)
    throw ValidationError("DE population_size must be >= 4");
  if (!(F > 0.0 && F < 2.0)) throw ValidationError("DE F must lie in (0, 2)");
  if (!(CR >= 0.0 && CR <= 1.0)) throw ValidationError("DE CR must lie in [0, 1]");
}

void QuasiParams::validate() const {
  if (top_k < 1) throw ValidationError("quasi top_k must be >= 1");
  if (!(sigma_frac >= 0.0)) throw ValidationError("quasi sigma_frac must be >= 0");
  if (!(fraction_local >= 0.0 && fraction_local <= 1.0))
    throw ValidationError("quasi fraction_local must lie in [0, 1]");
}

void MetaOptimizer::validate() const {
  de.validate();
  quasi.validate();
  if (local_restarts < 1) throw ValidationError("local search needs at least one restart");
  if (budget.max_evaluations < 1) throw ValidationError("meta-optimizer budget must be >= 1");
}

std::string to_string(MetaKind kind) {
  return kind == MetaKind::DifferentialEvolution ? "de" : "local";
}

std::string to_string(MetaInit init) {
  return init == MetaInit::QuasiRandom ? "quasi_random" : "random";
}

MetaKind meta_kind_from_string(const std::string& s) {
  if (s == "de") return MetaKind::DifferentialEvolution;
  if (s == "local") return MetaKind::BoundedLocalSearch;
  throw ValidationError("unknown meta_optimizer '" + s + "'");
}

MetaInit meta_init_from_string(const std::string& s) {
  if (s == "random") return MetaInit::Random;
  if (s == "quasi_random" || s == "quasi") return MetaInit::QuasiRandom;
  throw ValidationError("unknown meta_init '" + s + "'");
}

Eigen::VectorXd de_mutant(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& c, double F, const Box& bounds) {
  Eigen::VectorXd v = a + F * (b - c);
  return v.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
}

std::vector<Eigen::VectorXd> uniform_population(const Box& bounds, std::size_t count,
                                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Eigen::VectorXd x(bounds.lower.size());
    for (Eigen::Index d = 0; d < x.size(); ++d)
      x[d] = bounds.lower[d] + u(rng) * (bounds.upper[d] - bounds.lower[d]);
    out.push_back(std::move(x));
  }
  return out;
}

MinimizeResult de_minimize(const Objective& objective, const Box& bounds, const DEParams& params,
                           std::vector<Eigen::VectorXd> population, std::uint64_t seed,
                           const Budget& budget) {
  params.validate();
  const std::size_t np = params.resolved_population(bounds.dim());
  if (population.size() != np)
    throw ValidationError("DE initial population size " + std::to_string(population.size()) +
                          " != population_size " + std::to_string(np));
  for (const auto& x : population)
    if (!bounds.contains(x)) throw ValidationError("DE initial member outside bounds");

  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, np - 1);
  std::uniform_int_distribution<Eigen::Index> pick_dim(0, static_cast<Eigen::Index>(bounds.dim()) - 1);
  CountedObjective f(objective, budget.max_evaluations);

  MinimizeResult result;
  std::vector<double> fitness(np, std::numeric_limits<double>::infinity());
  auto note_best = [&](const Eigen::VectorXd& x, double v) {
    if (v < result.best_value || result.best_point.size() == 0) {
      result.best_value = v;
      result.best_point = x;
    }
  };
  for (std::size_t i = 0; i < np && !f.exhausted(); ++i) {
    fitness[i] = f(population[i]);
    note_best(population[i], fitness[i]);
  }
  if (result.best_point.size() == 0) result.best_point = population.front();
  result.trace.push_back(result.best_value);

  std::vector<Eigen::VectorXd> trials(np);
  for (std::size_t gen = 0; gen < params.max_generations; ++gen) {
    if (f.exhausted() || seconds_since(start) > budget.wall_clock_s) break;
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t a, b, c;
      do a = pick(rng); while (a == i);
      do b = pick(rng); while (b == i || b == a);
      do c = pick(rng); while (c == i || c == a || c == b);
      const Eigen::VectorXd v = de_mutant(population[a], population[b], population[c], params.F, bounds);
      Eigen::VectorXd trial = population[i];
      const Eigen::Index forced = pick_dim(rng);
      for (Eigen::Index d = 0; d < trial.size(); ++d)
        if (d == forced || u01(rng) < params.CR) trial[d] = v[d];
      trials[i] = std::move(trial);
    }
    // Evaluate, then select: the outcome does not depend on evaluation order.
    std::size_t evaluated = 0;
    std::vector<double> trial_fitness(np, std::numeric_limits<double>::infinity());
    for (; evaluated < np && !f.exhausted(); ++evaluated) trial_fitness[evaluated] = f(trials[evaluated]);
    for (std::size_t i = 0; i < evaluated; ++i) {
      if (trial_fitness[i] <= fitness[i]) {
        population[i] = trials[i];
        fitness[i] = trial_fitness[i];
        note_best(population[i], fitness[i]);
      }
    }
    result.trace.push_back(result.best_value);
  }

  result.candidates.reserve(np);
  for (std::size_t i = 0; i < np; ++i) result.candidates.push_back({population[i], fitness[i]});
  sort_candidates(result.candidates);
  result.evaluations = f.count();
  return result;
}

std::vector<Eigen::VectorXd> quasi_random_init(const SearchSpace& space, Discretization mode,
                                               std::size_t population_size,
                                               std::span<const Candidate> promising,
                                               const QuasiParams& params, std::uint64_t seed) {
  params.validate();
  const Box box = Box::of(space);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t anchors = std::min(params.top_k, promising.size());
  const std::size_t n_local =
      anchors == 0 ? 0
                   : std::min(population_size, static_cast<std::size_t>(std::ceil(
                                                   params.fraction_local *
                                                   static_cast<double>(population_size) - 1e-12)));
  std::vector<Eigen::VectorXd> out;
  out.reserve(population_size);
  const Eigen::VectorXd sigma = params.sigma_frac * (box.upper - box.lower);
  for (std::size_t i = 0; i < n_local; ++i) {
    Eigen::VectorXd x = promising[i % anchors].point;
    if (params.sigma_frac > 0.0)
      for (Eigen::Index d = 0; d < x.size(); ++d) x[d] += sigma[d] * normal(rng);
    out.push_back(x.cwiseMax(box.lower).cwiseMin(box.upper));
  }
  auto rest = uniform_population(box, population_size - n_local, rng);
  for (auto& x : rest) out.push_back(std::move(x));
  if (mode == Discretization::Complex)
    for (auto& x : out) space.coerce_inplace(x);
  return out;
}

MinimizeResult local_search_minimize(const Objective& objective, const Box& bounds,
                                     std::size_t restarts, std::uint64_t seed,
                                     const Budget& budget) {
  if (restarts < 1) throw ValidationError("local search needs at least one restart");
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  CountedObjective f(objective, budget.max_evaluations);
  const Eigen::VectorXd range = bounds.upper - bounds.lower;

  MinimizeResult result;
  for (std::size_t r = 0; r < restarts; ++r) {
    if (f.exhausted() || (r > 0 && seconds_since(start) > budget.wall_clock_s)) break;
    Eigen::VectorXd x = uniform_population(bounds, 1, rng).front();
    double fx = f(x);
    Eigen::VectorXd step = 0.1 * range;
    const Eigen::VectorXd min_step = 1e-6 * range;
    bool active = true;
    while (active && !f.exhausted()) {
      bool improved = false;
      for (Eigen::Index d = 0; d < x.size() && !improved && !f.exhausted(); ++d) {
        if (range[d] <= 0.0) continue;
        for (double sign : {1.0, -1.0}) {
          if (f.exhausted()) break;
          Eigen::VectorXd y = x;
          y[d] = std::clamp(x[d] + sign * step[d], bounds.lower[d], bounds.upper[d]);
          if (y[d] == x[d]) continue;
          const double fy = f(y);
          if (fy < fx) {
            x = std::move(y);
            fx = fy;
            improved = true;
            break;
          }
        }
      }
      if (!improved) {
        step *= 0.5;
        active = false;
        for (Eigen::Index d = 0; d < x.size(); ++d)
          if (range[d] > 0.0 && step[d] >= min_step[d]) active = true;
      }
    }
    result.candidates.push_back({x, fx});
    if (fx < result.best_value || result.best_point.size() == 0) {
      result.best_value = fx;
      result.best_point = x;
    }
    result.trace.push_back(result.best_value);
  }
  sort_candidates(result.candidates);
  result.evaluations = f.count();
  return result;
}

MinimizeResult meta_minimize(const MetaOptimizer& meta, const Objective& objective,
                             const SearchSpace& space, Discretization mode,
                             std::span<const Candidate> promising, std::uint64_t seed) {
  meta.validate();
  const Box box = Box::of(space);
  const std::size_t np = meta.de.resolved_population(box.dim());
  if (meta.kind == MetaKind::BoundedLocalSearch) {
    Budget budget = meta.budget;
    if (budget.max_evaluations == std::numeric_limits<std::size_t>::max())
      budget.max_evaluations = np * (meta.de.max_generations + 1);
    return local_search_minimize(objective, box, meta.local_restarts, derive_seed(seed, {1}), budget);
  }
  const auto seeds = meta.meta_init == MetaInit::QuasiRandom ? promising
                                                              : std::span<const Candidate>{};
  auto init = quasi_random_init(space, mode, np, seeds, meta.quasi, derive_seed(seed, {2}));
  return de_minimize(objective, box, meta.de, std::move(init), derive_seed(seed, {3}), meta.budget);
}

}  // namespace mixbo
