#include "mixbo/kernels.hpp"

#include <cmath>

namespace mixbo {

KernelConfig KernelConfig::defaults(std::size_t warped_dim, KernelFamily family,
                                    Discretization mode, double length_scale) {
  KernelConfig cfg;
  cfg.family = family;
  cfg.discretization = mode;
  cfg.length_scales = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(warped_dim), length_scale);
  return cfg;
}

void KernelConfig::validate(std::size_t warped_dim) const {
  if (static_cast<std::size_t>(length_scales.size()) != warped_dim)
    throw ValidationError("kernel has " + std::to_string(length_scales.size()) +
                          " length scales, expected " + std::to_string(warped_dim));
  if (!(length_scale_min > 0.0 && length_scale_min <= length_scale_max))
    throw ValidationError("kernel length-scale bounds must satisfy 0 < min <= max");
  for (Eigen::Index d = 0; d < length_scales.size(); ++d) {
    const double l = length_scales[d];
    if (!(l >= length_scale_min && l <= length_scale_max))
      throw ValidationError("length scale " + std::to_string(d) + " outside configured bounds");
  }
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
    throw ValidationError("signal variance must be positive");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
    throw ValidationError("noise variance must be non-negative");
}

std::string to_string(KernelFamily family) {
  return family == KernelFamily::Matern52 ? "matern52" : "se";
}

std::string to_string(Discretization mode) {
  return mode == Discretization::Complex ? "complex" : "naive";
}

KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "matern52") return KernelFamily::Matern52;
  if (s == "se" || s == "squared_exponential") return KernelFamily::SquaredExponential;
  throw ValidationError("unknown kernel family '" + s + "'");
}

Discretization discretization_from_string(const std::string& s) {
  if (s == "complex") return Discretization::Complex;
  if (s == "naive") return Discretization::Naive;
  throw ValidationError("unknown discretization '" + s + "'");
}

double kernel_prepared(const KernelConfig& cfg, const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b) {
  const double r2 = ((a - b).array() / cfg.length_scales.array()).square().sum();
  return cfg.signal_variance * correlation(cfg.family, r2);
}

double kernel_eval(const KernelConfig& cfg, const SearchSpace& space, const WarpedPoint& x1,
                   const WarpedPoint& x2) {
  const auto dim = space.warped_dim();
  if (static_cast<std::size_t>(x1.size()) != dim || static_cast<std::size_t>(x2.size()) != dim ||
      static_cast<std::size_t>(cfg.length_scales.size()) != dim)
    throw ValidationError("kernel_eval: dimension mismatch");
  if (cfg.discretization == Discretization::Complex)
    return kernel_prepared(cfg, space.coerce(x1), space.coerce(x2));
  return kernel_prepared(cfg, x1, x2);
}

Eigen::MatrixXd kernel_matrix(const KernelConfig& cfg, const SearchSpace& space,
                              std::span<const WarpedPoint> points) {
  if (points.empty()) throw ValidationError("kernel_matrix: empty point set");
  const auto dim = space.warped_dim();
  if (static_cast<std::size_t>(cfg.length_scales.size()) != dim)
    throw ValidationError("kernel_matrix: dimension mismatch");
  std::vector<WarpedPoint> prepared;
  prepared.reserve(points.size());
  for (const auto& p : points) {
    if (static_cast<std::size_t>(p.size()) != dim)
      throw ValidationError("kernel_matrix: dimension mismatch");
    prepared.push_back(cfg.discretization == Discretization::Complex ? space.coerce(p) : p);
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = cfg.signal_variance + cfg.noise_variance + cfg.base_jitter();
    for (Eigen::Index j = 0; j < i; ++j) {
      const double k = kernel_prepared(cfg, prepared[static_cast<std::size_t>(i)],
                                       prepared[static_cast<std::size_t>(j)]);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

}  // namespace mixbo
