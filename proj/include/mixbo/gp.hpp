#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mixbo/kernels.hpp"
#include "mixbo/space.hpp"

namespace mixbo {

struct Dataset {
  std::vector<WarpedPoint> X;
  Eigen::VectorXd y;  // minimization convention

  std::size_t size() const { return X.size(); }
  void validate(std::size_t warped_dim) const;
};

/// Affine map of each warped dimension onto [0, 1] using the space bounds.
struct InputNormalization {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static InputNormalization of(const SearchSpace& space);
  /// Degenerate dimensions (lo == hi) map to 0.5.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

struct NormalizedInputs {
  std::vector<Eigen::VectorXd> Xn;
  Eigen::VectorXd x_lo;
  Eigen::VectorXd x_hi;
};

NormalizedInputs normalize_inputs(const SearchSpace& space, std::span<const WarpedPoint> X);

/// Hyperparameter search settings. Bounds are log10 values in normalized
/// input / output units.
struct FitOptions {
  std::size_t population = 15;
  std::size_t generations = 40;
  double log_length_scale_lo = -2.0;
  double log_length_scale_hi = 2.0;
  double log_signal_lo = -3.0;
  double log_signal_hi = 3.0;
  double log_noise_lo = -8.0;
  double log_noise_hi = -1.0;
};

/// Fitted exact GP. Immutable once built; predict is safe to call concurrently.
struct GPModel {
  SearchSpace space;
  KernelConfig cfg;
  InputNormalization norm;
  std::vector<WarpedPoint> X;        // training inputs as supplied (warped)
  Eigen::MatrixXd Xn;                // prepared points, one per column: coerced (Complex), normalized
  Eigen::VectorXd y_normalized;
  Eigen::MatrixXd chol;              // lower-triangular factor of the Gram matrix
  Eigen::VectorXd alpha;             // K^-1 y_normalized
  double y_mean = 0.0;
  double y_std = 1.0;
  double jitter = 0.0;               // diagonal jitter actually used
  bool fallback = false;             // fit rejected every candidate and used the template
  double log_marginal_likelihood = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(Xn.cols()); }
  /// Coerce (Complex mode) and normalize a warped point.
  Eigen::VectorXd prepare(const WarpedPoint& x) const;
};

struct Prediction {
  double mean = 0.0;
  double std = 0.0;
};

/// Cholesky of K + (noise + jitter) I with jitter escalation from
/// base_jitter() by factors of 10 up to 1e-4 * signal_variance.
/// Returns false if every level fails.
bool factorize(const KernelConfig& cfg, const Eigen::MatrixXd& K_no_diag_noise,
               Eigen::MatrixXd& chol, double& jitter);

/// Log marginal likelihood on prepared inputs (one point per column) and
/// normalized outputs.
/// Returns -inf when the Gram matrix cannot be factorized.
double log_marginal_likelihood(const KernelConfig& cfg, const Eigen::MatrixXd& prepared,
                               const Eigen::VectorXd& y_normalized);

/// Convenience form: prepares and normalizes the dataset like fit() does.
double log_marginal_likelihood(const SearchSpace& space, const KernelConfig& cfg,
                               const Dataset& data);

/// Maximize the marginal likelihood over (log l_d, log signal, log noise)
/// with differential evolution; deterministic for a fixed seed.
GPModel fit(const SearchSpace& space, const Dataset& data, const KernelConfig& cfg_template,
            std::uint64_t seed, const FitOptions& options = {});

/// Build a model with fixed hyperparameters (no search).
GPModel condition(const SearchSpace& space, const Dataset& data, const KernelConfig& cfg);

/// Same hyperparameters and output normalization as `base`, conditioned on
/// its training data plus `extra` (warped inputs, raw outputs).
GPModel extend(const GPModel& base, std::span<const WarpedPoint> extra_X,
               std::span<const double> extra_y);

Prediction predict(const GPModel& model, const WarpedPoint& x);

}  // namespace mixbo
