#include "mixbo/gp.hpp"

#include <cmath>
#include <numbers>

#include "mixbo/log.hpp"
#include "mixbo/metaopt.hpp"
#include "mixbo/random.hpp"

namespace mixbo {

namespace {

constexpr double kMaxJitterFactor = 1e-4;

// Gram matrix of prepared points with the signal variance on the diagonal
// (noise and jitter are added by factorize).
Eigen::MatrixXd gram(const KernelConfig& cfg, const Eigen::MatrixXd& P) {
  const Eigen::Index n = P.cols();
  const Eigen::ArrayXd inv_ls = cfg.length_scales.array().inverse();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    K(j, j) = cfg.signal_variance;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double r2 = ((P.col(i) - P.col(j)).array() * inv_ls).square().sum();
      K(i, j) = K(j, i) = cfg.signal_variance * correlation(cfg.family, r2);
    }
  }
  return K;
}

struct OutputNormalization {
  double mean = 0.0;
  double std = 1.0;
};

OutputNormalization output_normalization(const Eigen::VectorXd& y) {
  OutputNormalization o;
  o.mean = y.mean();
  const double var = (y.array() - o.mean).square().mean();
  o.std = std::sqrt(var);
  if (!(o.std > 0.0) || !std::isfinite(o.std)) o.std = 1.0;
  return o;
}

double lml_from_factor(const Eigen::MatrixXd& L, const Eigen::VectorXd& y, Eigen::VectorXd* alpha_out) {
  const auto tri = L.triangularView<Eigen::Lower>();
  Eigen::VectorXd alpha = tri.solve(y);
  const double fit_term = alpha.squaredNorm();
  tri.transpose().solveInPlace(alpha);
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  const double n = static_cast<double>(y.size());
  if (alpha_out) *alpha_out = std::move(alpha);
  return -0.5 * fit_term - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

Eigen::MatrixXd prepare_all(const SearchSpace& space, const KernelConfig& cfg,
                            const InputNormalization& norm, std::span<const WarpedPoint> X) {
  Eigen::MatrixXd P(static_cast<Eigen::Index>(space.warped_dim()), static_cast<Eigen::Index>(X.size()));
  for (std::size_t i = 0; i < X.size(); ++i) {
    Eigen::VectorXd x = X[i];
    if (cfg.discretization == Discretization::Complex) space.coerce_inplace(x);
    P.col(static_cast<Eigen::Index>(i)) = norm.apply(x);
  }
  return P;
}

// Assemble a model from fixed hyperparameters; throws if the Gram matrix
// cannot be factorized even with maximal jitter.
void finish_model(GPModel& m) {
  const Eigen::MatrixXd K = gram(m.cfg, m.Xn);
  if (!factorize(m.cfg, K, m.chol, m.jitter))
    throw std::runtime_error("GP Gram matrix is not positive definite after jitter escalation");
  m.log_marginal_likelihood = lml_from_factor(m.chol, m.y_normalized, &m.alpha);
}

}  // namespace

void Dataset::validate(std::size_t warped_dim) const {
  if (X.empty()) throw ValidationError("dataset must contain at least one point");
  if (static_cast<std::size_t>(y.size()) != X.size())
    throw ValidationError("dataset X and y sizes differ");
  for (const auto& x : X)
    if (static_cast<std::size_t>(x.size()) != warped_dim)
      throw ValidationError("dataset point has wrong dimension");
  if (!y.allFinite()) throw ValidationError("dataset y must be finite");
}

InputNormalization InputNormalization::of(const SearchSpace& space) {
  return {space.warped_lower(), space.warped_upper()};
}

Eigen::VectorXd InputNormalization::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    const double w = hi[d] - lo[d];
    out[d] = w > 0.0 ? (x[d] - lo[d]) / w : 0.5;
  }
  return out;
}

NormalizedInputs normalize_inputs(const SearchSpace& space, std::span<const WarpedPoint> X) {
  if (X.empty()) throw ValidationError("normalize_inputs: empty point set");
  const auto norm = InputNormalization::of(space);
  NormalizedInputs out{{}, norm.lo, norm.hi};
  out.Xn.reserve(X.size());
  for (const auto& x : X) {
    if (static_cast<std::size_t>(x.size()) != space.warped_dim())
      throw ValidationError("normalize_inputs: dimension mismatch");
    out.Xn.push_back(norm.apply(x));
  }
  return out;
}

Eigen::VectorXd GPModel::prepare(const WarpedPoint& x) const {
  if (cfg.discretization == Discretization::Complex) return norm.apply(space.coerce(x));
  return norm.apply(x);
}

bool factorize(const KernelConfig& cfg, const Eigen::MatrixXd& K, Eigen::MatrixXd& chol,
               double& jitter) {
  const double max_jitter = kMaxJitterFactor * cfg.signal_variance * (1.0 + 1e-9);
  for (double j = cfg.base_jitter(); j <= max_jitter; j *= 10.0) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += cfg.noise_variance + j;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd L = llt.matrixL();
      if (L.diagonal().allFinite() && (L.diagonal().array() > 0.0).all()) {
        chol = std::move(L);
        jitter = j;
        return true;
      }
    }
  }
  return false;
}

double log_marginal_likelihood(const KernelConfig& cfg, const Eigen::MatrixXd& prepared,
                               const Eigen::VectorXd& y_normalized) {
  Eigen::MatrixXd L;
  double jitter = 0.0;
  if (!factorize(cfg, gram(cfg, prepared), L, jitter))
    return -std::numeric_limits<double>::infinity();
  return lml_from_factor(L, y_normalized, nullptr);
}

double log_marginal_likelihood(const SearchSpace& space, const KernelConfig& cfg,
                               const Dataset& data) {
  data.validate(space.warped_dim());
  cfg.validate(space.warped_dim());
  const auto norm = InputNormalization::of(space);
  const auto out = output_normalization(data.y);
  const Eigen::VectorXd yn = (data.y.array() - out.mean) / out.std;
  return log_marginal_likelihood(cfg, prepare_all(space, cfg, norm, data.X), yn);
}

GPModel condition(const SearchSpace& space, const Dataset& data, const KernelConfig& cfg) {
  data.validate(space.warped_dim());
  cfg.validate(space.warped_dim());
  GPModel m;
  m.space = space;
  m.cfg = cfg;
  m.norm = InputNormalization::of(space);
  m.X = data.X;
  m.Xn = prepare_all(space, cfg, m.norm, data.X);
  const auto out = output_normalization(data.y);
  m.y_mean = out.mean;
  m.y_std = out.std;
  m.y_normalized = (data.y.array() - out.mean) / out.std;
  finish_model(m);
  return m;
}

GPModel fit(const SearchSpace& space, const Dataset& data, const KernelConfig& cfg_template,
            std::uint64_t seed, const FitOptions& options) {
  const std::size_t dim = space.warped_dim();
  data.validate(dim);
  cfg_template.validate(dim);
  const auto norm = InputNormalization::of(space);
  const Eigen::MatrixXd P = prepare_all(space, cfg_template, norm, data.X);
  const auto out = output_normalization(data.y);
  const Eigen::VectorXd yn = (data.y.array() - out.mean) / out.std;

  // Pairwise squared differences per dimension, one row per (i > j) pair, so
  // each candidate costs one matrix-vector product plus the correlation map.
  const Eigen::Index n = P.cols();
  const Eigen::Index pairs = n * (n - 1) / 2;
  Eigen::MatrixXd sq(pairs, static_cast<Eigen::Index>(dim));
  {
    Eigen::Index row = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = j + 1; i < n; ++i, ++row)
        sq.row(row) = (P.col(i) - P.col(j)).array().square().transpose();
  }

  const Eigen::Index d = static_cast<Eigen::Index>(dim);
  Box box{Eigen::VectorXd(d + 2), Eigen::VectorXd(d + 2)};
  box.lower.head(d).setConstant(std::max(options.log_length_scale_lo, std::log10(cfg_template.length_scale_min)));
  box.upper.head(d).setConstant(std::min(options.log_length_scale_hi, std::log10(cfg_template.length_scale_max)));
  box.lower[d] = options.log_signal_lo;
  box.upper[d] = options.log_signal_hi;
  box.lower[d + 1] = options.log_noise_lo;
  box.upper[d + 1] = options.log_noise_hi;

  auto decode = [&](const Eigen::VectorXd& theta) {
    KernelConfig cfg = cfg_template;
    cfg.length_scales = Eigen::pow(10.0, theta.head(d).array()).matrix();
    cfg.length_scales = cfg.length_scales.cwiseMax(cfg.length_scale_min).cwiseMin(cfg.length_scale_max);
    cfg.signal_variance = std::pow(10.0, theta[d]);
    cfg.noise_variance = std::pow(10.0, theta[d + 1]);
    return cfg;
  };

  Eigen::MatrixXd K(n, n);
  Eigen::MatrixXd L;
  const Objective negative_lml = [&](const Eigen::VectorXd& theta) {
    const KernelConfig cfg = decode(theta);
    const Eigen::VectorXd w = cfg.length_scales.array().square().inverse().matrix();
    const Eigen::VectorXd r2 = sq * w;
    Eigen::Index row = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      K(j, j) = cfg.signal_variance;
      for (Eigen::Index i = j + 1; i < n; ++i, ++row)
        K(i, j) = K(j, i) = cfg.signal_variance * correlation(cfg.family, r2[row]);
    }
    double jitter = 0.0;
    if (!factorize(cfg, K, L, jitter)) return std::numeric_limits<double>::infinity();
    const double lml = lml_from_factor(L, yn, nullptr);
    return std::isfinite(lml) ? -lml : std::numeric_limits<double>::infinity();
  };

  std::mt19937_64 rng(seed);
  auto population = uniform_population(box, options.population, rng);
  {
    Eigen::VectorXd start(d + 2);
    start.head(d) = cfg_template.length_scales.array().log10().matrix();
    start[d] = std::log10(cfg_template.signal_variance);
    start[d + 1] = std::log10(std::max(cfg_template.noise_variance, 1e-300));
    population.front() = start.cwiseMax(box.lower).cwiseMin(box.upper);
  }
  DEParams de;
  de.population_size = options.population;
  de.max_generations = options.generations;
  const auto result = de_minimize(negative_lml, box, de, std::move(population), mix64(seed));

  Dataset fitted{data.X, data.y};
  if (std::isfinite(result.best_value)) {
    GPModel m = condition(space, fitted, decode(result.best_point));
    return m;
  }
  log_warning("GP hyperparameter search rejected every candidate; using template defaults");
  GPModel m = condition(space, fitted, cfg_template);
  m.fallback = true;
  return m;
}

GPModel extend(const GPModel& base, std::span<const WarpedPoint> extra_X,
               std::span<const double> extra_y) {
  if (extra_X.size() != extra_y.size()) throw ValidationError("extend: X and y sizes differ");
  GPModel m = base;
  const Eigen::Index n0 = base.Xn.cols();
  const auto extra = static_cast<Eigen::Index>(extra_X.size());
  m.Xn.conservativeResize(Eigen::NoChange, n0 + extra);
  m.y_normalized.conservativeResize(n0 + extra);
  for (Eigen::Index i = 0; i < extra; ++i) {
    const auto& x = extra_X[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(x.size()) != base.space.warped_dim())
      throw ValidationError("extend: dimension mismatch");
    m.X.push_back(x);
    m.Xn.col(n0 + i) = base.prepare(x);
    m.y_normalized[n0 + i] = (extra_y[static_cast<std::size_t>(i)] - base.y_mean) / base.y_std;
  }
  finish_model(m);
  return m;
}

Prediction predict(const GPModel& model, const WarpedPoint& x) {
  if (static_cast<std::size_t>(x.size()) != model.space.warped_dim())
    throw ValidationError("predict: dimension mismatch");
  const Eigen::VectorXd u = model.prepare(x);
  const auto& cfg = model.cfg;
  const Eigen::ArrayXd inv_ls = cfg.length_scales.array().inverse();
  const Eigen::ArrayXd r2 = ((model.Xn.colwise() - u).array().colwise() * inv_ls).square().colwise().sum().transpose();
  Eigen::VectorXd kstar(r2.size());
  for (Eigen::Index i = 0; i < r2.size(); ++i)
    kstar[i] = cfg.signal_variance * correlation(cfg.family, r2[i]);
  const double mean_n = kstar.dot(model.alpha);
  model.chol.triangularView<Eigen::Lower>().solveInPlace(kstar);
  const double var_n = std::max(cfg.signal_variance - kstar.squaredNorm(), 0.0);
  return {model.y_mean + model.y_std * mean_n, model.y_std * std::sqrt(var_n)};
}

}  // namespace mixbo
