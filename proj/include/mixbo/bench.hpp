#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mixbo/driver.hpp"

namespace mixbo::bench {

struct Problem {
  std::string name;
  SearchSpace space;
  std::function<double(const ParamAssignment&)> evaluate;
  std::optional<double> known_optimum;
  std::optional<ParamAssignment> optimum;  // an assignment attaining known_optimum
};

/// sphere5, branin, rastrigin4, mixed (2 real, 2 log-int, 1 bool) and
/// categorical (4-way categorical, 2 real).
const std::vector<Problem>& builtin_problems();
const Problem& find_problem(const std::string& name);

struct RunReport {
  std::string problem;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<double> incumbent_trace;  // best value after each batch
  double best_value = 0.0;
  ParamAssignment best_assignment;
  double score = 0.0;
  double wall_s = 0.0;
  std::size_t evaluations = 0;
  std::vector<nlohmann::json> batches;  // per-batch diagnostics incl. fitted hyperparameters
  std::string error;

  nlohmann::json to_json() const;
};

/// Normalized regret score in [0, 100]:
/// 100 * clip((baseline - best) / (baseline - optimum), 0, 1).
double score(double best_found, double random_baseline, double known_optimum);
double score(const RunReport& run, const Problem& problem);

/// Median best value of pure random search at `budget` evaluations, from a
/// dedicated seed stream. Cached per (problem, budget); thread-safe.
double random_baseline(const Problem& problem, std::size_t budget);

/// One run of the batch protocol: suggest/evaluate/observe total_batches times.
RunReport run_problem(const RunConfig& config, const Problem& problem, std::uint64_t seed);

/// Pure random search with the same budget (and report shape) as a protocol run.
RunReport run_random_search(const Problem& problem, std::size_t budget, std::uint64_t seed);

/// A grid of configurations: `base` overridden by each entry of `variants`.
struct AblationGrid {
  nlohmann::json base = nlohmann::json::object();
  std::vector<nlohmann::json> variants;

  /// {"base":{...}, "axes":{"key.path":[v1, v2], ...}} expands to the
  /// cartesian product; {"base":{...}, "configs":[{...}, ...]} lists variants.
  static AblationGrid from_json(const nlohmann::json& doc);
  std::vector<RunConfig> configs() const;
};

struct AblationRow {
  std::string problem;
  std::uint64_t seed = 0;
  std::string meta_opt;
  std::string discretization;
  std::string init;
  std::size_t init_batches = 0;
  std::string meta_init;
  double best_value = 0.0;
  double score = 0.0;
  double wall_s = 0.0;
  std::string error;

  std::string config_key() const;
};

struct AblationSummaryRow {
  std::string config;
  std::size_t runs = 0;
  double mean_score = 0.0;
  double median_score = 0.0;
  std::size_t failures = 0;
};

inline constexpr const char* kCsvHeader =
    "problem,seed,meta_opt,discretization,init,init_batches,meta_init,best_value,score,wall_s,error";

/// Runs every (config, problem, seed); a failing run is recorded with score 0
/// and its message in the error column. Writes one CSV row per run to
/// `out_path` (if non-empty) and the per-config summary next to it.
std::vector<AblationRow> run_ablation(const AblationGrid& grid, const std::vector<const Problem*>& problems,
                                      const std::vector<std::uint64_t>& seeds,
                                      const std::string& out_path = {});

/// Aggregate by configuration, sorted by mean score (descending).
std::vector<AblationSummaryRow> summarize(const std::vector<AblationRow>& rows);

std::string to_csv_line(const AblationRow& row);

/// "0..19", "1,4,7" or a mix such as "0..3,10".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace mixbo::bench
