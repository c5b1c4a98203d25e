#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace mixbo {

/// Raised when a parameter, assignment, point or config does not satisfy its contract.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ParamKind { Real, Int, Categorical, Bool };
enum class ConfigSpace { Linear, Log };

/// A point in the transformed (warped) input space. One coordinate per
/// Real/Int/Bool parameter and one per category of each categorical.
using WarpedPoint = Eigen::VectorXd;

using ParamValue = std::variant<double, std::int64_t, std::string, bool>;
using ParamAssignment = std::map<std::string, ParamValue>;

struct ParameterSpec {
  std::string name;
  ParamKind kind = ParamKind::Real;
  double low = 0.0;
  double high = 1.0;
  std::vector<std::string> categories;
  ConfigSpace config_space = ConfigSpace::Linear;

  static ParameterSpec real(std::string name, double low, double high,
                            ConfigSpace space = ConfigSpace::Linear);
  static ParameterSpec integer(std::string name, std::int64_t low, std::int64_t high,
                               ConfigSpace space = ConfigSpace::Linear);
  static ParameterSpec categorical(std::string name, std::vector<std::string> categories);
  static ParameterSpec boolean(std::string name);

  /// Throws ValidationError naming the parameter when the spec is malformed.
  void validate() const;
  std::size_t warped_width() const {
    return kind == ParamKind::Categorical ? categories.size() : 1;
  }
};

/// Ordered mixed-type search space and the mapping to and from warped space.
///
/// Layout: parameters are laid out in declaration order; a categorical with
/// k labels occupies k consecutive one-hot coordinates. Numeric coordinates
/// are log10-transformed for Log parameters and never rescaled here.
///
/// All member functions are const and safe to call concurrently.
class SearchSpace {
 public:
  SearchSpace() = default;
  explicit SearchSpace(std::vector<ParameterSpec> params);

  const std::vector<ParameterSpec>& params() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t warped_dim() const { return static_cast<std::size_t>(lower_.size()); }
  /// First warped coordinate owned by parameter i.
  std::size_t offset(std::size_t i) const { return offsets_[i]; }
  const Eigen::VectorXd& warped_lower() const { return lower_; }
  const Eigen::VectorXd& warped_upper() const { return upper_; }
  /// Index of the parameter with the given name, if any.
  std::optional<std::size_t> find(const std::string& name) const;

  /// Throws ValidationError naming the offending parameter.
  void validate(const ParamAssignment& assignment) const;

  WarpedPoint warp(const ParamAssignment& assignment) const;
  /// Decode: clip to warped bounds, coerce, and map back to native values.
  ParamAssignment unwarp(const WarpedPoint& point) const;
  /// Canonical representative of the point's discretization cell, in warped space.
  WarpedPoint coerce(const WarpedPoint& point) const;
  /// In-place variant of coerce for hot loops; `point` must have warped_dim entries.
  void coerce_inplace(Eigen::Ref<Eigen::VectorXd> point) const;
  WarpedPoint clip(const WarpedPoint& point) const;

  /// Number of distinct coerced points when every parameter is discrete;
  /// nullopt if any Real parameter exists or the count overflows.
  std::optional<std::uint64_t> cardinality() const;
  bool all_continuous() const;

  nlohmann::json to_json() const;
  static SearchSpace from_json(const nlohmann::json& doc);

  friend bool operator==(const SearchSpace& a, const SearchSpace& b);

 private:
  void check_length(const WarpedPoint& point) const;

  std::vector<ParameterSpec> params_;
  std::vector<std::size_t> offsets_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

bool operator==(const ParameterSpec& a, const ParameterSpec& b);

/// JSON encoding of a single native value, matching the parameter kind.
nlohmann::json value_to_json(const ParamValue& value);
nlohmann::json assignment_to_json(const ParamAssignment& assignment);
ParamAssignment assignment_from_json(const SearchSpace& space, const nlohmann::json& doc);

}  // namespace mixbo
