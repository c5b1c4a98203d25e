#include "mixbo/acquisition.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "mixbo/log.hpp"
#include "mixbo/random.hpp"

namespace mixbo {

std::string to_string(BatchStrategy s) {
  return s == BatchStrategy::KrigingBeliever ? "kriging_believer" : "constant_liar";
}

BatchStrategy batch_strategy_from_string(const std::string& s) {
  if (s == "kriging_believer") return BatchStrategy::KrigingBeliever;
  if (s == "constant_liar") return BatchStrategy::ConstantLiar;
  throw ValidationError("unknown batch_strategy '" + s + "'");
}

AcquisitionContext AcquisitionContext::make(GPModel fitted, double f_min) {
  AcquisitionContext ctx;
  ctx.model = fitted;
  ctx.base = std::move(fitted);
  ctx.f_min = f_min;
  return ctx;
}

double expected_improvement(double f_min, double mean, double std, double floor) {
  const double improvement = f_min - mean;
  if (!(std > floor)) return std::max(improvement, 0.0);
  const double z = improvement / std;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(improvement * cdf + std * pdf, 0.0);
}

double expected_improvement(const AcquisitionContext& ctx, const WarpedPoint& x) {
  const Prediction p = predict(ctx.model, x);
  return expected_improvement(ctx.f_min, p.mean, p.std, kStdFloor * ctx.model.y_std);
}

AcquisitionContext augment(const AcquisitionContext& ctx, const WarpedPoint& x,
                           const BatchPolicy& policy) {
  const double value = policy.strategy == BatchStrategy::KrigingBeliever ? predict(ctx.model, x).mean
                                                                         : policy.liar_value;
  AcquisitionContext next;
  next.base = ctx.base;
  next.f_min = ctx.f_min;
  next.pending = ctx.pending;
  next.pending.emplace_back(x, value);
  std::vector<WarpedPoint> X;
  std::vector<double> y;
  for (const auto& [px, py] : next.pending) {
    X.push_back(px);
    y.push_back(py);
  }
  next.model = extend(ctx.base, X, y);
  return next;
}

bool is_duplicate(const AcquisitionContext& ctx, const WarpedPoint& x) {
  const Eigen::VectorXd u = ctx.model.prepare(x);
  for (Eigen::Index i = 0; i < ctx.model.Xn.cols(); ++i)
    if ((ctx.model.Xn.col(i) - u).cwiseAbs().maxCoeff() <= kDuplicateTolerance) return true;
  return false;
}

BatchResult build_batch(const AcquisitionContext& ctx, std::size_t q, const MetaOptimizer& meta,
                        std::uint64_t seed, const BatchPolicy& policy,
                        std::span<const Candidate> promising) {
  if (q < 1) throw ValidationError("batch size must be >= 1");
  const SearchSpace& space = ctx.base.space;
  const Discretization mode = ctx.base.cfg.discretization;
  const Box box = Box::of(space);
  auto canonical = [&](Eigen::VectorXd x) {
    if (mode == Discretization::Complex) space.coerce_inplace(x);
    return x;
  };

  BatchResult out{{}, ctx, 0};
  for (std::size_t slot = 0; slot < q; ++slot) {
    const AcquisitionContext& cur = out.context;
    std::mt19937_64 rng(derive_seed(seed, {slot, 0xF111}));
    auto random_point = [&] {
      Eigen::VectorXd x = canonical(uniform_population(box, 1, rng).front());
      for (int attempt = 0; attempt < 100 && is_duplicate(cur, x); ++attempt)
        x = canonical(uniform_population(box, 1, rng).front());
      ++out.random_fills;
      return x;
    };

    std::optional<Eigen::VectorXd> chosen;
    try {
      const Objective negative_ei = [&](const Eigen::VectorXd& x) {
        return -expected_improvement(cur, x);
      };
      const auto result = meta_minimize(meta, negative_ei, space, mode, promising,
                                        derive_seed(seed, {slot}));
      if (std::isfinite(result.best_value)) {
        Eigen::VectorXd best = canonical(result.best_point);
        if (!is_duplicate(cur, best)) {
          chosen = std::move(best);
        } else {
          for (const auto& c : result.candidates) {
            Eigen::VectorXd x = canonical(c.point);
            if (std::isfinite(c.value) && !is_duplicate(cur, x)) {
              chosen = std::move(x);
              break;
            }
          }
        }
        if (!chosen) chosen = random_point();
      }
    } catch (const std::exception& e) {
      log_warning(std::string("meta-optimizer failed on batch slot ") + std::to_string(slot) +
                  ": " + e.what());
    }
    if (!chosen) {
      log_warning("batch slot " + std::to_string(slot) + " filled by a uniform random point");
      chosen = random_point();
    }
    out.points.push_back(*chosen);
    out.context = augment(out.context, *chosen, policy);
  }
  return out;
}

}  // namespace mixbo
