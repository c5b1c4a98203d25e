#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixbo/acquisition.hpp"
#include "mixbo/gp.hpp"
#include "mixbo/metaopt.hpp"
#include "mixbo/space.hpp"

namespace mixbo {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitKind { Random, LatinHypercube };
enum class LiarKind { FMin, FMax, Mean, Constant };

std::string to_string(InitKind kind);
InitKind init_kind_from_string(const std::string& s);

/// Everything one optimizer run needs. Defaults reproduce the submitted
/// variant: Matern 5/2, complex discretization, DE with quasi-random
/// meta-initialization, 5 Latin-hypercube priming batches, 16 batches of 8.
struct RunConfig {
  SearchSpace space;
  KernelFamily family = KernelFamily::Matern52;
  Discretization discretization = Discretization::Complex;
  BatchStrategy batch_strategy = BatchStrategy::KrigingBeliever;
  LiarKind liar = LiarKind::FMin;
  double liar_constant = 0.0;
  std::size_t batch_size = 8;
  std::size_t total_batches = 16;
  InitKind init = InitKind::LatinHypercube;
  std::size_t init_batches = 5;
  MetaOptimizer meta;
  std::uint64_t seed = 0;
  double time_cap_s = 640.0;
  FitOptions fit;

  void validate() const;
  std::size_t total_evaluations() const { return batch_size * total_batches; }

  /// Parse a run config document. "space" may be omitted when the caller
  /// supplies the space afterwards (validate() then rejects an empty space).
  static RunConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

enum class TrialOrigin { Prime, Suggested, Fallback };

struct TrialRecord {
  ParamAssignment assignment;
  WarpedPoint warped;
  std::optional<double> value;  // nullopt while pending
  bool flagged = false;         // a non-finite observation was replaced by +inf
  TrialOrigin origin = TrialOrigin::Prime;
  std::size_t batch_index = 0;
};

/// Per-batch record of the fitted surrogate, for reports.
struct BatchDiagnostics {
  std::size_t batch_index = 0;
  std::string source;  // "prime", "model", "random" (time cap or no usable data)
  Eigen::VectorXd length_scales;
  double signal_variance = 0.0;
  double noise_variance = 0.0;
  double log_marginal_likelihood = 0.0;
  bool fit_fallback = false;
  std::size_t random_fills = 0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

/// n_batches * batch_size assignments sampled uniformly in warped space.
std::vector<ParamAssignment> random_init(const SearchSpace& space, std::size_t n_batches,
                                         std::size_t batch_size, std::uint64_t seed);

/// Latin-hypercube priming design built in warped space; colliding cells
/// (after coercion) are replaced by unseen uniform samples.
std::vector<ParamAssignment> latin_hypercube_init(const SearchSpace& space, std::size_t n_batches,
                                                  std::size_t batch_size, std::uint64_t seed);

/// Batch suggest/observe state machine. Single owner; not thread-safe.
class Optimizer {
 public:
  explicit Optimizer(RunConfig config);

  /// Next batch of assignments. Throws ProtocolError while a batch is
  /// pending and BudgetExhausted once every batch has been observed.
  std::vector<ParamAssignment> suggest();
  /// Observe values for the pending batch, in suggestion order.
  void observe(std::span<const double> values);

  /// Best observed trial; ties go to the earliest. Throws before any observation.
  std::pair<ParamAssignment, double> best() const;

  const RunConfig& config() const { return config_; }
  const std::vector<TrialRecord>& trials() const { return trials_; }
  const std::vector<BatchDiagnostics>& diagnostics() const { return diagnostics_; }
  std::size_t batch_index() const { return batch_; }
  bool pending() const { return pending_; }
  bool finished() const { return batch_ >= config_.total_batches; }
  double elapsed_seconds() const { return elapsed_; }

 private:
  std::vector<ParamAssignment> model_batch(BatchDiagnostics& diag);
  std::vector<ParamAssignment> random_batch();
  void record(const std::vector<ParamAssignment>& batch, TrialOrigin origin);

  RunConfig config_;
  std::vector<ParamAssignment> design_;
  std::vector<TrialRecord> trials_;
  std::vector<BatchDiagnostics> diagnostics_;
  std::size_t batch_ = 0;
  bool pending_ = false;
  double elapsed_ = 0.0;
};

/// Drive `optimizer` over newline-delimited JSON: emits
/// {"suggest":[...],"batch":i}, expects {"observe":[...],"batch":i}, and
/// finishes with {"done":true,...}. Returns 0 on success; protocol
/// violations write a diagnostic to `err` and return 2.
int serve_protocol(Optimizer& optimizer, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace mixbo
