#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mixbo/kernels.hpp"
#include "mixbo/space.hpp"

namespace mixbo {

/// Axis-aligned box in warped coordinates.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Box of(const SearchSpace& space) { return {space.warped_lower(), space.warped_upper()}; }
  std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }
  bool contains(const Eigen::VectorXd& x) const;
};

/// Scalar objective to minimize. NaN results are treated as +inf.
using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Candidate {
  Eigen::VectorXd point;
  double value = std::numeric_limits<double>::infinity();
};

struct Budget {
  std::size_t max_evaluations = std::numeric_limits<std::size_t>::max();
  double wall_clock_s = std::numeric_limits<double>::infinity();
};

struct DEParams {
  std::size_t population_size = 0;  // 0: size from the problem dimension
  double F = 0.8;
  double CR = 0.9;
  std::size_t max_generations = 60;

  static std::size_t default_population(std::size_t dim);
  std::size_t resolved_population(std::size_t dim) const {
    return population_size ? population_size : default_population(dim);
  }
  void validate() const;
};

struct QuasiParams {
  std::size_t top_k = 5;
  double sigma_frac = 0.1;
  double fraction_local = 0.5;
  void validate() const;
};

enum class MetaKind { DifferentialEvolution, BoundedLocalSearch };
enum class MetaInit { Random, QuasiRandom };

std::string to_string(MetaKind kind);
std::string to_string(MetaInit init);
MetaKind meta_kind_from_string(const std::string& s);
MetaInit meta_init_from_string(const std::string& s);

struct MetaOptimizer {
  MetaKind kind = MetaKind::DifferentialEvolution;
  DEParams de;
  MetaInit meta_init = MetaInit::QuasiRandom;
  QuasiParams quasi;
  std::size_t local_restarts = 10;
  Budget budget;

  void validate() const;
};

struct MinimizeResult {
  Eigen::VectorXd best_point;
  double best_value = std::numeric_limits<double>::infinity();
  /// Final DE population, or the best point of each local-search restart,
  /// sorted by ascending value.
  std::vector<Candidate> candidates;
  /// Best-so-far value after initialization and after every generation/restart.
  std::vector<double> trace;
  std::size_t evaluations = 0;
};

/// rand/1/bin differential evolution with synchronous (evaluate-then-select)
/// generations. `init_population` must have exactly population_size members
/// inside `bounds`.
MinimizeResult de_minimize(const Objective& objective, const Box& bounds, const DEParams& params,
                           std::vector<Eigen::VectorXd> init_population, std::uint64_t seed,
                           const Budget& budget = {});

/// DE mutant a + F (b - c), clipped to the box.
Eigen::VectorXd de_mutant(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& c, double F, const Box& bounds);

std::vector<Eigen::VectorXd> uniform_population(const Box& bounds, std::size_t count,
                                                std::mt19937_64& rng);

/// Meta-initialization. ceil(fraction_local * population_size) members are
/// Gaussian perturbations of the top_k promising points (cycled, sigma per
/// dimension = sigma_frac * width); the rest are uniform. Every member is
/// clipped and, in Complex mode, coerced. `promising` must be sorted best first.
std::vector<Eigen::VectorXd> quasi_random_init(const SearchSpace& space, Discretization mode,
                                               std::size_t population_size,
                                               std::span<const Candidate> promising,
                                               const QuasiParams& params, std::uint64_t seed);

/// Multi-start coordinate pattern search. Steps start at 0.1x the range of
/// each dimension and halve down to 1e-6x; each start is uniform in the box.
MinimizeResult local_search_minimize(const Objective& objective, const Box& bounds,
                                     std::size_t restarts, std::uint64_t seed,
                                     const Budget& budget = {});

/// Run the configured meta-optimizer over the space's warped box. Without an
/// explicit evaluation budget, local search gets the evaluations DE would use
/// (population * (generations + 1)).
MinimizeResult meta_minimize(const MetaOptimizer& meta, const Objective& objective,
                             const SearchSpace& space, Discretization mode,
                             std::span<const Candidate> promising, std::uint64_t seed);

}  // namespace mixbo
