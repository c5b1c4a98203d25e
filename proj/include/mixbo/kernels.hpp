#pragma once

#include <cmath>
#include <span>
#include <string>

#include "mixbo/space.hpp"

namespace mixbo {

enum class KernelFamily { SquaredExponential, Matern52 };

/// Naive: the kernel sees the continuous relaxation and only final suggestions
/// are rounded. Complex: both kernel arguments are coerced to their
/// discretization cell first, so the surrogate is constant on each cell.
enum class Discretization { Naive, Complex };

struct KernelConfig {
  KernelFamily family = KernelFamily::Matern52;
  Discretization discretization = Discretization::Complex;
  Eigen::VectorXd length_scales;  // one per warped dimension (ARD)
  double signal_variance = 1.0;
  double noise_variance = 1e-6;
  double length_scale_min = 1e-2;
  double length_scale_max = 1e2;

  /// Template config with every length scale set to `length_scale`.
  static KernelConfig defaults(std::size_t warped_dim, KernelFamily family = KernelFamily::Matern52,
                               Discretization mode = Discretization::Complex,
                               double length_scale = 1.0);
  void validate(std::size_t warped_dim) const;
  /// Diagonal jitter added on top of the noise variance.
  double base_jitter() const { return 1e-10 * signal_variance; }
};

std::string to_string(KernelFamily family);
std::string to_string(Discretization mode);
KernelFamily kernel_family_from_string(const std::string& s);
Discretization discretization_from_string(const std::string& s);

/// Stationary part of the kernel as a function of the scaled squared distance r².
/// Returns a value in (0, 1]; multiply by the signal variance for the covariance.
inline double correlation(KernelFamily family, double r2) {
  if (family == KernelFamily::SquaredExponential) return std::exp(-0.5 * r2);
  const double r = std::sqrt(r2);
  const double s5r = std::sqrt(5.0) * r;
  return (1.0 + s5r + 5.0 * r2 / 3.0) * std::exp(-s5r);
}

/// Kernel between two points that are already prepared (coerced if required
/// and expressed in the coordinates the length scales refer to).
double kernel_prepared(const KernelConfig& cfg, const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b);

/// Covariance between two warped points. Complex mode coerces both arguments.
/// White noise is not included.
double kernel_eval(const KernelConfig& cfg, const SearchSpace& space, const WarpedPoint& x1,
                   const WarpedPoint& x2);

/// Gram matrix with noise_variance + base_jitter() on the diagonal.
Eigen::MatrixXd kernel_matrix(const KernelConfig& cfg, const SearchSpace& space,
                              std::span<const WarpedPoint> points);

}  // namespace mixbo
