#include "mixbo/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace mixbo {

namespace {

double warp_numeric(const ParameterSpec& p, double v) {
  return p.config_space == ConfigSpace::Log ? std::log10(v) : v;
}

double unwarp_numeric(const ParameterSpec& p, double x) {
  return p.config_space == ConfigSpace::Log ? std::pow(10.0, x) : x;
}

// Round half away from zero; integer bounds keep the result inside [low, high].
std::int64_t round_to_int(const ParameterSpec& p, double native) {
  const double r = std::clamp(std::round(native), p.low, p.high);
  return static_cast<std::int64_t>(r);
}

std::size_t argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& block) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < block.size(); ++i) {
    if (block[i] > block[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

const char* kind_name(ParamKind k) {
  switch (k) {
    case ParamKind::Real: return "real";
    case ParamKind::Int: return "int";
    case ParamKind::Categorical: return "cat";
    case ParamKind::Bool: return "bool";
  }
  return "?";
}

}  // namespace

ParameterSpec ParameterSpec::real(std::string name, double low, double high, ConfigSpace space) {
  ParameterSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::Real;
  p.low = low;
  p.high = high;
  p.config_space = space;
  return p;
}

ParameterSpec ParameterSpec::integer(std::string name, std::int64_t low, std::int64_t high,
                                     ConfigSpace space) {
  ParameterSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::Int;
  p.low = static_cast<double>(low);
  p.high = static_cast<double>(high);
  p.config_space = space;
  return p;
}

ParameterSpec ParameterSpec::categorical(std::string name, std::vector<std::string> categories) {
  ParameterSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::Categorical;
  p.categories = std::move(categories);
  return p;
}

ParameterSpec ParameterSpec::boolean(std::string name) {
  ParameterSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::Bool;
  p.low = 0.0;
  p.high = 1.0;
  return p;
}

void ParameterSpec::validate() const {
  if (name.empty()) throw ValidationError("parameter with empty name");
  const std::string where = "parameter '" + name + "': ";
  switch (kind) {
    case ParamKind::Real:
      if (!std::isfinite(low) || !std::isfinite(high) || !(low < high))
        throw ValidationError(where + "real bounds require finite low < high");
      break;
    case ParamKind::Int:
      if (!std::isfinite(low) || !std::isfinite(high) || !(low <= high))
        throw ValidationError(where + "int bounds require low <= high");
      if (low != std::round(low) || high != std::round(high))
        throw ValidationError(where + "int bounds must be integral");
      break;
    case ParamKind::Categorical: {
      std::set<std::string> distinct(categories.begin(), categories.end());
      if (categories.size() < 2 || distinct.size() != categories.size())
        throw ValidationError(where + "categorical needs at least 2 distinct labels");
      break;
    }
    case ParamKind::Bool:
      break;
  }
  if ((kind == ParamKind::Real || kind == ParamKind::Int) && config_space == ConfigSpace::Log &&
      !(low > 0.0))
    throw ValidationError(where + "log space requires low > 0");
}

bool operator==(const ParameterSpec& a, const ParameterSpec& b) {
  if (a.name != b.name || a.kind != b.kind) return false;
  switch (a.kind) {
    case ParamKind::Real:
    case ParamKind::Int:
      return a.low == b.low && a.high == b.high && a.config_space == b.config_space;
    case ParamKind::Categorical:
      return a.categories == b.categories;
    case ParamKind::Bool:
      return true;
  }
  return false;
}

SearchSpace::SearchSpace(std::vector<ParameterSpec> params) : params_(std::move(params)) {
  std::set<std::string> names;
  std::size_t dim = 0;
  for (const auto& p : params_) {
    p.validate();
    if (!names.insert(p.name).second)
      throw ValidationError("duplicate parameter name '" + p.name + "'");
    offsets_.push_back(dim);
    dim += p.warped_width();
  }
  lower_.resize(static_cast<Eigen::Index>(dim));
  upper_.resize(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& p = params_[i];
    const auto off = static_cast<Eigen::Index>(offsets_[i]);
    switch (p.kind) {
      case ParamKind::Real:
      case ParamKind::Int:
        lower_[off] = warp_numeric(p, p.low);
        upper_[off] = warp_numeric(p, p.high);
        break;
      case ParamKind::Categorical:
        for (std::size_t c = 0; c < p.categories.size(); ++c) {
          lower_[off + static_cast<Eigen::Index>(c)] = 0.0;
          upper_[off + static_cast<Eigen::Index>(c)] = 1.0;
        }
        break;
      case ParamKind::Bool:
        lower_[off] = 0.0;
        upper_[off] = 1.0;
        break;
    }
  }
}

std::optional<std::size_t> SearchSpace::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  return std::nullopt;
}

void SearchSpace::validate(const ParamAssignment& assignment) const {
  for (const auto& [name, _] : assignment)
    if (!find(name)) throw ValidationError("unknown parameter '" + name + "'");
  for (const auto& p : params_) {
    auto it = assignment.find(p.name);
    const std::string where = "parameter '" + p.name + "': ";
    if (it == assignment.end()) throw ValidationError(where + "missing value");
    const ParamValue& v = it->second;
    switch (p.kind) {
      case ParamKind::Real: {
        double x;
        if (auto d = std::get_if<double>(&v)) x = *d;
        else if (auto i = std::get_if<std::int64_t>(&v)) x = static_cast<double>(*i);
        else throw ValidationError(where + "expected a real value");
        if (!(x >= p.low && x <= p.high)) throw ValidationError(where + "value out of bounds");
        break;
      }
      case ParamKind::Int: {
        double x;
        if (auto i = std::get_if<std::int64_t>(&v)) x = static_cast<double>(*i);
        else if (auto d = std::get_if<double>(&v); d && *d == std::round(*d)) x = *d;
        else throw ValidationError(where + "expected an integer value");
        if (!(x >= p.low && x <= p.high)) throw ValidationError(where + "value out of bounds");
        break;
      }
      case ParamKind::Categorical: {
        auto s = std::get_if<std::string>(&v);
        if (!s) throw ValidationError(where + "expected a category label");
        if (std::find(p.categories.begin(), p.categories.end(), *s) == p.categories.end())
          throw ValidationError(where + "unknown category '" + *s + "'");
        break;
      }
      case ParamKind::Bool:
        if (!std::holds_alternative<bool>(v)) throw ValidationError(where + "expected a boolean");
        break;
    }
  }
}

WarpedPoint SearchSpace::warp(const ParamAssignment& assignment) const {
  validate(assignment);
  WarpedPoint out = WarpedPoint::Zero(static_cast<Eigen::Index>(warped_dim()));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& p = params_[i];
    const auto off = static_cast<Eigen::Index>(offsets_[i]);
    const ParamValue& v = assignment.at(p.name);
    switch (p.kind) {
      case ParamKind::Real:
      case ParamKind::Int: {
        double x = std::holds_alternative<double>(v) ? std::get<double>(v)
                                                     : static_cast<double>(std::get<std::int64_t>(v));
        out[off] = warp_numeric(p, x);
        break;
      }
      case ParamKind::Categorical: {
        const auto& label = std::get<std::string>(v);
        auto idx = std::find(p.categories.begin(), p.categories.end(), label) - p.categories.begin();
        out[off + idx] = 1.0;
        break;
      }
      case ParamKind::Bool:
        out[off] = std::get<bool>(v) ? 1.0 : 0.0;
        break;
    }
  }
  return out;
}

void SearchSpace::check_length(const WarpedPoint& point) const {
  if (static_cast<std::size_t>(point.size()) != warped_dim())
    throw ValidationError("warped point has length " + std::to_string(point.size()) +
                          ", expected " + std::to_string(warped_dim()));
}

WarpedPoint SearchSpace::clip(const WarpedPoint& point) const {
  check_length(point);
  return point.cwiseMax(lower_).cwiseMin(upper_);
}

void SearchSpace::coerce_inplace(Eigen::Ref<Eigen::VectorXd> x) const {
  x = x.cwiseMax(lower_).cwiseMin(upper_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& p = params_[i];
    const auto off = static_cast<Eigen::Index>(offsets_[i]);
    switch (p.kind) {
      case ParamKind::Real:
        break;
      case ParamKind::Int:
        if (p.config_space == ConfigSpace::Log)
          x[off] = std::log10(static_cast<double>(round_to_int(p, std::pow(10.0, x[off]))));
        else
          x[off] = static_cast<double>(round_to_int(p, x[off]));
        break;
      case ParamKind::Categorical: {
        const auto k = static_cast<Eigen::Index>(p.categories.size());
        const auto hot = static_cast<Eigen::Index>(argmax_lowest(x.segment(off, k)));
        x.segment(off, k).setZero();
        x[off + hot] = 1.0;
        break;
      }
      case ParamKind::Bool:
        x[off] = std::round(x[off]) >= 1.0 ? 1.0 : 0.0;
        break;
    }
  }
}

WarpedPoint SearchSpace::coerce(const WarpedPoint& point) const {
  check_length(point);
  WarpedPoint out = point;
  coerce_inplace(out);
  return out;
}

ParamAssignment SearchSpace::unwarp(const WarpedPoint& point) const {
  const WarpedPoint x = coerce(point);
  ParamAssignment out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& p = params_[i];
    const auto off = static_cast<Eigen::Index>(offsets_[i]);
    switch (p.kind) {
      case ParamKind::Real:
        out[p.name] = std::clamp(unwarp_numeric(p, x[off]), p.low, p.high);
        break;
      case ParamKind::Int:
        out[p.name] = round_to_int(p, unwarp_numeric(p, x[off]));
        break;
      case ParamKind::Categorical: {
        const auto k = static_cast<Eigen::Index>(p.categories.size());
        out[p.name] = p.categories[argmax_lowest(x.segment(off, k))];
        break;
      }
      case ParamKind::Bool:
        out[p.name] = x[off] >= 0.5;
        break;
    }
  }
  return out;
}

std::optional<std::uint64_t> SearchSpace::cardinality() const {
  std::uint64_t total = 1;
  for (const auto& p : params_) {
    std::uint64_t n = 0;
    switch (p.kind) {
      case ParamKind::Real: return std::nullopt;
      case ParamKind::Int: n = static_cast<std::uint64_t>(p.high - p.low) + 1; break;
      case ParamKind::Categorical: n = p.categories.size(); break;
      case ParamKind::Bool: n = 2; break;
    }
    if (total > std::numeric_limits<std::uint64_t>::max() / n) return std::nullopt;
    total *= n;
  }
  return total;
}

bool SearchSpace::all_continuous() const {
  return std::all_of(params_.begin(), params_.end(),
                     [](const ParameterSpec& p) { return p.kind == ParamKind::Real; });
}

bool operator==(const SearchSpace& a, const SearchSpace& b) { return a.params_ == b.params_; }

nlohmann::json SearchSpace::to_json() const {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : params_) {
    nlohmann::json j;
    j["name"] = p.name;
    j["kind"] = kind_name(p.kind);
    if (p.kind == ParamKind::Real) {
      j["low"] = p.low;
      j["high"] = p.high;
    } else if (p.kind == ParamKind::Int) {
      j["low"] = static_cast<std::int64_t>(p.low);
      j["high"] = static_cast<std::int64_t>(p.high);
    }
    if (p.kind == ParamKind::Real || p.kind == ParamKind::Int)
      j["space"] = p.config_space == ConfigSpace::Log ? "log" : "linear";
    if (p.kind == ParamKind::Categorical) j["categories"] = p.categories;
    params.push_back(std::move(j));
  }
  return {{"params", params}};
}

SearchSpace SearchSpace::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("params") || !doc["params"].is_array())
    throw ValidationError("search space document needs a \"params\" array");
  std::vector<ParameterSpec> specs;
  for (const auto& j : doc["params"]) {
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
      throw ValidationError("every parameter needs a string \"name\"");
    ParameterSpec p;
    p.name = j["name"].get<std::string>();
    const std::string where = "parameter '" + p.name + "': ";
    const std::string kind = j.value("kind", std::string{});
    if (kind == "real" || kind == "float") p.kind = ParamKind::Real;
    else if (kind == "int" || kind == "integer") p.kind = ParamKind::Int;
    else if (kind == "cat" || kind == "categorical") p.kind = ParamKind::Categorical;
    else if (kind == "bool" || kind == "boolean") p.kind = ParamKind::Bool;
    else throw ValidationError(where + "unknown kind '" + kind + "'");

    if (p.kind == ParamKind::Real || p.kind == ParamKind::Int) {
      if (!j.contains("low") || !j.contains("high") || !j["low"].is_number() ||
          !j["high"].is_number())
        throw ValidationError(where + "numeric parameter needs numeric \"low\" and \"high\"");
      p.low = j["low"].get<double>();
      p.high = j["high"].get<double>();
      const std::string space = j.value("space", std::string{"linear"});
      if (space == "linear") p.config_space = ConfigSpace::Linear;
      else if (space == "log") p.config_space = ConfigSpace::Log;
      else throw ValidationError(where + "unsupported configuration space '" + space +
                                 "' (supported: linear, log)");
    } else if (p.kind == ParamKind::Categorical) {
      if (!j.contains("categories") || !j["categories"].is_array())
        throw ValidationError(where + "categorical needs a \"categories\" array");
      for (const auto& c : j["categories"]) {
        if (c.is_string()) p.categories.push_back(c.get<std::string>());
        else p.categories.push_back(c.dump());
      }
    } else {
      p.low = 0.0;
      p.high = 1.0;
    }
    specs.push_back(std::move(p));
  }
  return SearchSpace(std::move(specs));
}

nlohmann::json value_to_json(const ParamValue& value) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, value);
}

nlohmann::json assignment_to_json(const ParamAssignment& assignment) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, v] : assignment) out[name] = value_to_json(v);
  return out;
}

ParamAssignment assignment_from_json(const SearchSpace& space, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("assignment must be a JSON object");
  ParamAssignment out;
  for (const auto& [name, j] : doc.items()) {
    auto idx = space.find(name);
    if (!idx) throw ValidationError("unknown parameter '" + name + "'");
    const auto& p = space.params()[*idx];
    switch (p.kind) {
      case ParamKind::Real:
        if (!j.is_number()) throw ValidationError("parameter '" + name + "': expected a number");
        out[name] = j.get<double>();
        break;
      case ParamKind::Int:
        if (j.is_number_integer()) out[name] = j.get<std::int64_t>();
        else if (j.is_number() && j.get<double>() == std::round(j.get<double>()))
          out[name] = static_cast<std::int64_t>(j.get<double>());
        else if (j.is_number()) out[name] = j.get<double>();
        else throw ValidationError("parameter '" + name + "': expected an integer");
        break;
      case ParamKind::Categorical:
        out[name] = j.is_string() ? j.get<std::string>() : j.dump();
        break;
      case ParamKind::Bool:
        if (!j.is_boolean()) throw ValidationError("parameter '" + name + "': expected a boolean");
        out[name] = j.get<bool>();
        break;
    }
  }
  space.validate(out);
  return out;
}

}  // namespace mixbo
