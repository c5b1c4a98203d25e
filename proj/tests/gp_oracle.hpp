#pragma once

// Dense reference GP: explicit inverse via full-pivot LU, kernel written out
// from its textbook form. Used only to cross-check the Cholesky path.

#include <Eigen/LU>
#include <cmath>
#include <numbers>

#include "mixbo/mixbo.hpp"

namespace oracle {

struct GPResult {
  double lml = 0.0;
  std::vector<double> mean;
  std::vector<double> var;  // de-normalized latent variance
};

inline double kernel(const mixbo::KernelConfig& cfg, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double r2 = 0.0;
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    const double t = (a[d] - b[d]) / cfg.length_scales[d];
    r2 += t * t;
  }
  const double r = std::sqrt(r2);
  if (cfg.family == mixbo::KernelFamily::SquaredExponential) return cfg.signal_variance * std::exp(-0.5 * r2);
  return cfg.signal_variance * (1.0 + std::sqrt(5.0) * r + 5.0 * r2 / 3.0) * std::exp(-std::sqrt(5.0) * r);
}

inline Eigen::VectorXd prepare(const mixbo::SearchSpace& space, const mixbo::KernelConfig& cfg,
                               Eigen::VectorXd x) {
  if (cfg.discretization == mixbo::Discretization::Complex) x = space.coerce(x);
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    const double lo = space.warped_lower()[d], hi = space.warped_upper()[d];
    x[d] = hi > lo ? (x[d] - lo) / (hi - lo) : 0.5;
  }
  return x;
}

/// `jitter` is the diagonal jitter the model under test settled on.
inline GPResult posterior(const mixbo::SearchSpace& space, const mixbo::KernelConfig& cfg,
                          const mixbo::Dataset& data, double jitter,
                          const std::vector<mixbo::WarpedPoint>& queries) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const double mu = data.y.mean();
  double sd = std::sqrt((data.y.array() - mu).square().sum() / static_cast<double>(n));
  if (!(sd > 0.0)) sd = 1.0;
  const Eigen::VectorXd yn = (data.y.array() - mu) / sd;

  std::vector<Eigen::VectorXd> P;
  for (const auto& x : data.X) P.push_back(prepare(space, cfg, x));
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) K(i, j) = kernel(cfg, P[i], P[j]);
  K.diagonal().array() += cfg.noise_variance + jitter;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  const Eigen::MatrixXd Kinv = lu.inverse();
  GPResult out;
  out.lml = -0.5 * yn.dot(Kinv * yn) - 0.5 * std::log(lu.determinant()) -
            0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  for (const auto& q : queries) {
    const Eigen::VectorXd u = prepare(space, cfg, q);
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) k[i] = kernel(cfg, P[i], u);
    out.mean.push_back(mu + sd * k.dot(Kinv * yn));
    out.var.push_back(sd * sd * std::max(cfg.signal_variance - k.dot(Kinv * k), 0.0));
  }
  return out;
}

inline double rel_err(double got, double want, double floor) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

}  // namespace oracle
