#include "mixbo/driver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "mixbo/log.hpp"
#include "mixbo/random.hpp"

namespace mixbo {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

enum SeedTag : std::uint64_t { kDesign = 1, kFit = 2, kBatch = 3, kFallback = 4 };

std::vector<double> key_of(const WarpedPoint& x) { return {x.data(), x.data() + x.size()}; }

Eigen::VectorXd uniform_point(const SearchSpace& space, std::mt19937_64& rng) {
  return uniform_population(Box::of(space), 1, rng).front();
}

std::string liar_name(LiarKind k) {
  switch (k) {
    case LiarKind::FMin: return "fmin";
    case LiarKind::FMax: return "fmax";
    case LiarKind::Mean: return "mean";
    case LiarKind::Constant: return "constant";
  }
  return "fmin";
}

std::size_t get_size(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() || j[key].get<long long>() < 0)
    throw ValidationError(std::string("\"") + key + "\" must be a non-negative integer");
  return j[key].get<std::size_t>();
}

double get_double(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ValidationError(std::string("\"") + key + "\" must be a number");
  return j[key].get<double>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ValidationError(std::string("\"") + key + "\" must be a string");
  return j[key].get<std::string>();
}

}  // namespace

std::string to_string(InitKind kind) { return kind == InitKind::LatinHypercube ? "lh" : "random"; }

InitKind init_kind_from_string(const std::string& s) {
  if (s == "lh" || s == "latin_hypercube") return InitKind::LatinHypercube;
  if (s == "random") return InitKind::Random;
  throw ValidationError("unknown init '" + s + "'");
}

void RunConfig::validate() const {
  if (space.size() == 0) throw ValidationError("run config has an empty search space");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (total_batches < 1) throw ValidationError("total_batches must be >= 1");
  if (init_batches < 1) throw ValidationError("init_batches must be >= 1");
  if (init_batches * batch_size < 2)
    throw ValidationError("priming needs at least two queries (init_batches * batch_size >= 2)");
  if (init_batches > total_batches) throw ValidationError("init_batches exceeds total_batches");
  if (!(time_cap_s > 0.0)) throw ValidationError("time_cap_s must be positive");
  if (liar == LiarKind::Constant && !std::isfinite(liar_constant))
    throw ValidationError("liar constant must be finite");
  meta.validate();
}

RunConfig RunConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("run config must be a JSON object");
  RunConfig c;
  if (doc.contains("space")) c.space = SearchSpace::from_json(doc["space"]);
  else if (doc.contains("params")) c.space = SearchSpace::from_json(doc);
  if (doc.contains("kernel")) {
    const auto& k = doc["kernel"];
    c.family = kernel_family_from_string(get_string(k, "family", to_string(c.family)));
    c.discretization = discretization_from_string(get_string(k, "discretization", to_string(c.discretization)));
  }
  c.batch_strategy = batch_strategy_from_string(get_string(doc, "batch_strategy", to_string(c.batch_strategy)));
  if (doc.contains("liar_value")) {
    const auto& l = doc["liar_value"];
    if (l.is_number()) {
      c.liar = LiarKind::Constant;
      c.liar_constant = l.get<double>();
    } else if (l == "fmin") c.liar = LiarKind::FMin;
    else if (l == "fmax") c.liar = LiarKind::FMax;
    else if (l == "mean") c.liar = LiarKind::Mean;
    else throw ValidationError("liar_value must be fmin, fmax, mean or a number");
  }
  c.batch_size = get_size(doc, "batch_size", c.batch_size);
  c.total_batches = get_size(doc, "total_batches", c.total_batches);
  c.init = init_kind_from_string(get_string(doc, "init", to_string(c.init)));
  c.init_batches = get_size(doc, "init_batches", c.init_batches);
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) throw ValidationError("\"seed\" must be an integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  c.time_cap_s = get_double(doc, "time_cap_s", c.time_cap_s);
  c.meta.kind = meta_kind_from_string(get_string(doc, "meta_optimizer", to_string(c.meta.kind)));
  c.meta.meta_init = meta_init_from_string(get_string(doc, "meta_init", to_string(c.meta.meta_init)));
  if (doc.contains("de")) {
    const auto& d = doc["de"];
    c.meta.de.population_size = get_size(d, "pop", c.meta.de.population_size);
    c.meta.de.F = get_double(d, "F", c.meta.de.F);
    c.meta.de.CR = get_double(d, "CR", c.meta.de.CR);
    c.meta.de.max_generations = get_size(d, "gens", c.meta.de.max_generations);
  }
  if (doc.contains("quasi")) {
    const auto& q = doc["quasi"];
    c.meta.quasi.top_k = get_size(q, "top_k", c.meta.quasi.top_k);
    c.meta.quasi.sigma_frac = get_double(q, "sigma_frac", c.meta.quasi.sigma_frac);
    c.meta.quasi.fraction_local = get_double(q, "fraction_local", c.meta.quasi.fraction_local);
  }
  if (doc.contains("local")) c.meta.local_restarts = get_size(doc["local"], "restarts", c.meta.local_restarts);
  if (doc.contains("gp_fit")) {
    const auto& g = doc["gp_fit"];
    c.fit.population = get_size(g, "pop", c.fit.population);
    c.fit.generations = get_size(g, "gens", c.fit.generations);
  }
  c.meta.validate();
  return c;
}

json RunConfig::to_json() const {
  json j;
  if (space.size()) j["space"] = space.to_json();
  j["kernel"] = {{"family", to_string(family)}, {"discretization", to_string(discretization)}};
  j["batch_strategy"] = to_string(batch_strategy);
  if (liar == LiarKind::Constant) j["liar_value"] = liar_constant;
  else j["liar_value"] = liar_name(liar);
  j["batch_size"] = batch_size;
  j["total_batches"] = total_batches;
  j["init"] = to_string(init);
  j["init_batches"] = init_batches;
  j["seed"] = seed;
  j["time_cap_s"] = time_cap_s;
  j["meta_optimizer"] = to_string(meta.kind);
  j["meta_init"] = to_string(meta.meta_init);
  j["de"] = {{"pop", meta.de.population_size}, {"F", meta.de.F}, {"CR", meta.de.CR},
             {"gens", meta.de.max_generations}};
  j["quasi"] = {{"top_k", meta.quasi.top_k}, {"sigma_frac", meta.quasi.sigma_frac},
                {"fraction_local", meta.quasi.fraction_local}};
  j["local"] = {{"restarts", meta.local_restarts}};
  j["gp_fit"] = {{"pop", fit.population}, {"gens", fit.generations}};
  return j;
}

json BatchDiagnostics::to_json() const {
  json j{{"batch", batch_index}, {"source", source}, {"random_fills", random_fills},
         {"seconds", seconds}};
  if (source == "model") {
    j["length_scales"] = std::vector<double>(length_scales.data(), length_scales.data() + length_scales.size());
    j["signal_variance"] = signal_variance;
    j["noise_variance"] = noise_variance;
    j["log_marginal_likelihood"] = log_marginal_likelihood;
    j["fit_fallback"] = fit_fallback;
  }
  return j;
}

std::vector<ParamAssignment> random_init(const SearchSpace& space, std::size_t n_batches,
                                         std::size_t batch_size, std::uint64_t seed) {
  if (n_batches < 1) throw ValidationError("random_init needs n_batches >= 1");
  std::mt19937_64 rng(seed);
  std::vector<ParamAssignment> out;
  out.reserve(n_batches * batch_size);
  for (std::size_t i = 0; i < n_batches * batch_size; ++i) out.push_back(space.unwarp(uniform_point(space, rng)));
  return out;
}

std::vector<ParamAssignment> latin_hypercube_init(const SearchSpace& space, std::size_t n_batches,
                                                  std::size_t batch_size, std::uint64_t seed) {
  const std::size_t n = n_batches * batch_size;
  if (n < 2) throw ValidationError("latin_hypercube_init needs at least two points");
  std::mt19937_64 rng(seed);
  const auto& lo = space.warped_lower();
  const auto& hi = space.warped_upper();

  // levels(i, j): coordinate j of design point i.
  Eigen::MatrixXd levels(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(space.warped_dim()));
  std::vector<std::size_t> order(n);
  for (std::size_t p = 0; p < space.size(); ++p) {
    const auto& spec = space.params()[p];
    const auto off = static_cast<Eigen::Index>(space.offset(p));
    switch (spec.kind) {
      case ParamKind::Real:
      case ParamKind::Int: {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i = 0; i < n; ++i)
          levels(static_cast<Eigen::Index>(i), off) =
              lo[off] + (static_cast<double>(order[i]) + 0.5) / static_cast<double>(n) * (hi[off] - lo[off]);
        break;
      }
      case ParamKind::Categorical: {
        const std::size_t k = spec.categories.size();
        std::vector<std::size_t> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::size_t> column(n);
        for (std::size_t i = 0; i < n; ++i) column[i] = perm[i % k];
        std::shuffle(column.begin(), column.end(), rng);
        for (std::size_t i = 0; i < n; ++i) {
          levels.row(static_cast<Eigen::Index>(i)).segment(off, static_cast<Eigen::Index>(k)).setZero();
          levels(static_cast<Eigen::Index>(i), off + static_cast<Eigen::Index>(column[i])) = 1.0;
        }
        break;
      }
      case ParamKind::Bool: {
        std::vector<double> column(n);
        for (std::size_t i = 0; i < n; ++i) column[i] = static_cast<double>(i % 2);
        std::shuffle(column.begin(), column.end(), rng);
        for (std::size_t i = 0; i < n; ++i) levels(static_cast<Eigen::Index>(i), off) = column[i];
        break;
      }
    }
  }

  const auto cardinality = space.cardinality();
  std::set<std::vector<double>> seen;
  std::vector<ParamAssignment> out;
  out.reserve(n);
  std::size_t random_fills = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ParamAssignment a = space.unwarp(levels.row(static_cast<Eigen::Index>(i)).transpose());
    auto key = key_of(space.warp(a));
    if (seen.count(key)) {
      const bool exhausted = cardinality && seen.size() >= *cardinality;
      bool found = false;
      for (int attempt = 0; !exhausted && attempt < 1000 && !found; ++attempt) {
        a = space.unwarp(uniform_point(space, rng));
        key = key_of(space.warp(a));
        found = !seen.count(key);
      }
      if (!found) {
        a = space.unwarp(uniform_point(space, rng));
        key = key_of(space.warp(a));
        ++random_fills;
      }
    }
    seen.insert(key);
    out.push_back(std::move(a));
  }
  if (random_fills)
    log_warning("latin hypercube: space has too few distinct points; " + std::to_string(random_fills) +
                " of " + std::to_string(n) + " design points are random fills");
  return out;
}

Optimizer::Optimizer(RunConfig config) : config_(std::move(config)) { config_.validate(); }

void Optimizer::record(const std::vector<ParamAssignment>& batch, TrialOrigin origin) {
  for (const auto& a : batch) {
    TrialRecord t;
    t.assignment = a;
    t.warped = config_.space.warp(a);
    t.origin = origin;
    t.batch_index = batch_;
    trials_.push_back(std::move(t));
  }
  pending_ = true;
}

std::vector<ParamAssignment> Optimizer::random_batch() {
  return random_init(config_.space, 1, config_.batch_size,
                     derive_seed(config_.seed, {kFallback, batch_}));
}

std::vector<ParamAssignment> Optimizer::model_batch(BatchDiagnostics& diag) {
  const auto& space = config_.space;
  std::vector<const TrialRecord*> observed;
  double worst_finite = -std::numeric_limits<double>::infinity();
  for (const auto& t : trials_) {
    observed.push_back(&t);
    if (std::isfinite(*t.value)) worst_finite = std::max(worst_finite, *t.value);
  }
  if (!std::isfinite(worst_finite)) {
    diag.source = "random";
    return random_batch();
  }

  // Failed evaluations enter the surrogate at the worst finite value.
  Dataset data;
  data.y.resize(static_cast<Eigen::Index>(observed.size()));
  std::vector<Candidate> promising;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double v = std::isfinite(*observed[i]->value) ? *observed[i]->value : worst_finite;
    data.X.push_back(observed[i]->warped);
    data.y[static_cast<Eigen::Index>(i)] = v;
    promising.push_back({observed[i]->warped, v});
  }
  std::stable_sort(promising.begin(), promising.end(),
                   [](const Candidate& a, const Candidate& b) { return a.value < b.value; });

  const auto tmpl = KernelConfig::defaults(space.warped_dim(), config_.family, config_.discretization);
  GPModel model = fit(space, data, tmpl, derive_seed(config_.seed, {kFit, batch_}), config_.fit);
  diag.source = "model";
  diag.length_scales = model.cfg.length_scales;
  diag.signal_variance = model.cfg.signal_variance;
  diag.noise_variance = model.cfg.noise_variance;
  diag.log_marginal_likelihood = model.log_marginal_likelihood;
  diag.fit_fallback = model.fallback;

  const double f_min = data.y.minCoeff();
  BatchPolicy policy;
  policy.strategy = config_.batch_strategy;
  switch (config_.liar) {
    case LiarKind::FMin: policy.liar_value = f_min; break;
    case LiarKind::FMax: policy.liar_value = data.y.maxCoeff(); break;
    case LiarKind::Mean: policy.liar_value = data.y.mean(); break;
    case LiarKind::Constant: policy.liar_value = config_.liar_constant; break;
  }
  auto ctx = AcquisitionContext::make(std::move(model), f_min);
  MetaOptimizer meta = config_.meta;
  // Remaining wall-clock share for this batch, split across its slots.
  const double remaining = std::max(config_.time_cap_s - elapsed_, 0.0);
  meta.budget.wall_clock_s = std::min(meta.budget.wall_clock_s,
                                      remaining / static_cast<double>(config_.batch_size));
  auto batch = build_batch(ctx, config_.batch_size, meta, derive_seed(config_.seed, {kBatch, batch_}),
                           policy, promising);
  diag.random_fills = batch.random_fills;
  std::vector<ParamAssignment> out;
  out.reserve(batch.points.size());
  for (const auto& p : batch.points) out.push_back(space.unwarp(p));
  return out;
}

std::vector<ParamAssignment> Optimizer::suggest() {
  if (pending_) throw ProtocolError("suggest called while a batch is pending");
  if (finished())
    throw BudgetExhausted("evaluation budget exhausted after " + std::to_string(config_.total_batches) +
                          " batches");
  const auto start = Clock::now();
  BatchDiagnostics diag;
  diag.batch_index = batch_;
  std::vector<ParamAssignment> batch;
  TrialOrigin origin = TrialOrigin::Suggested;
  if (batch_ < config_.init_batches) {
    if (design_.empty()) {
      const auto seed = derive_seed(config_.seed, {kDesign});
      design_ = config_.init == InitKind::LatinHypercube
                    ? latin_hypercube_init(config_.space, config_.init_batches, config_.batch_size, seed)
                    : random_init(config_.space, config_.init_batches, config_.batch_size, seed);
    }
    const auto first = design_.begin() + static_cast<std::ptrdiff_t>(batch_ * config_.batch_size);
    batch.assign(first, first + static_cast<std::ptrdiff_t>(config_.batch_size));
    origin = TrialOrigin::Prime;
    diag.source = "prime";
  } else if (elapsed_ > config_.time_cap_s) {
    log_warning("wall-clock cap exceeded; suggesting a uniform random batch");
    batch = random_batch();
    origin = TrialOrigin::Fallback;
    diag.source = "random";
  } else {
    batch = model_batch(diag);
    if (diag.source == "random") origin = TrialOrigin::Fallback;
  }
  record(batch, origin);
  diag.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  elapsed_ += diag.seconds;
  diagnostics_.push_back(std::move(diag));
  return batch;
}

void Optimizer::observe(std::span<const double> values) {
  if (!pending_) throw ProtocolError("observe called without a pending batch");
  if (values.size() != config_.batch_size)
    throw ProtocolError("observe expected " + std::to_string(config_.batch_size) + " values, got " +
                        std::to_string(values.size()));
  const std::size_t first = trials_.size() - config_.batch_size;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& t = trials_[first + i];
    if (std::isfinite(values[i])) {
      t.value = values[i];
    } else {
      t.value = std::numeric_limits<double>::infinity();
      t.flagged = true;
      log_warning("non-finite observation in batch " + std::to_string(batch_) + " recorded as +inf");
    }
  }
  pending_ = false;
  ++batch_;
}

std::pair<ParamAssignment, double> Optimizer::best() const {
  const TrialRecord* best = nullptr;
  for (const auto& t : trials_)
    if (t.value && (!best || *t.value < *best->value)) best = &t;
  if (!best) throw ValidationError("no observed trials yet");
  return {best->assignment, *best->value};
}

}  // namespace mixbo
