#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mixbo/gp.hpp"
#include "mixbo/metaopt.hpp"

namespace mixbo {

/// Degenerate-EI threshold on the predictive std, in normalized output units.
inline constexpr double kStdFloor = 1e-12;
/// Two prepared (normalized) points closer than this in every coordinate are duplicates.
inline constexpr double kDuplicateTolerance = 1e-9;

enum class BatchStrategy { KrigingBeliever, ConstantLiar };

std::string to_string(BatchStrategy s);
BatchStrategy batch_strategy_from_string(const std::string& s);

struct BatchPolicy {
  BatchStrategy strategy = BatchStrategy::KrigingBeliever;
  double liar_value = 0.0;  // used by ConstantLiar only
};

/// Frozen posterior plus incumbent and the pseudo-observations inserted so far.
struct AcquisitionContext {
  GPModel base;    // fitted on observed data only
  GPModel model;   // base conditioned on `pending`, same hyperparameters
  double f_min = 0.0;
  std::vector<std::pair<WarpedPoint, double>> pending;

  static AcquisitionContext make(GPModel fitted, double f_min);
};

/// Closed-form EI for minimization. For std <= floor returns max(f_min - mean, 0).
double expected_improvement(double f_min, double mean, double std, double floor = kStdFloor);

/// EI of the believer-augmented posterior at x.
double expected_improvement(const AcquisitionContext& ctx, const WarpedPoint& x);

/// Append (x, pseudo-value) and recondition; f_min is left untouched.
AcquisitionContext augment(const AcquisitionContext& ctx, const WarpedPoint& x,
                           const BatchPolicy& policy);

/// True if x (coerced in Complex mode) coincides with a training or pending point.
bool is_duplicate(const AcquisitionContext& ctx, const WarpedPoint& x);

struct BatchResult {
  std::vector<WarpedPoint> points;
  AcquisitionContext context;     // context after the last insertion
  std::size_t random_fills = 0;   // slots filled by a uniform random point
};

/// Sequential batch construction: maximize EI, coerce (Complex mode), apply
/// the duplicate rule, insert the pseudo-observation, repeat q times.
BatchResult build_batch(const AcquisitionContext& ctx, std::size_t q, const MetaOptimizer& meta,
                        std::uint64_t seed, const BatchPolicy& policy = {},
                        std::span<const Candidate> promising = {});

}  // namespace mixbo
