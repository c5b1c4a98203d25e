#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "mixbo/mixbo.hpp"

namespace testutil {

inline mixbo::SearchSpace mixed_space() {
  using mixbo::ConfigSpace;
  using mixbo::ParameterSpec;
  return mixbo::SearchSpace({ParameterSpec::real("lr", 1e-4, 1.0, ConfigSpace::Log),
                             ParameterSpec::integer("layers", 1, 8),
                             ParameterSpec::integer("width", 1, 1000, ConfigSpace::Log),
                             ParameterSpec::categorical("act", {"relu", "tanh", "gelu"}),
                             ParameterSpec::boolean("bn"), ParameterSpec::real("drop", 0.0, 0.5)});
}

inline mixbo::SearchSpace real_space(std::size_t d, double lo = 0.0, double hi = 1.0) {
  std::vector<mixbo::ParameterSpec> p;
  for (std::size_t i = 0; i < d; ++i) p.push_back(mixbo::ParameterSpec::real("x" + std::to_string(i), lo, hi));
  return mixbo::SearchSpace(p);
}

inline mixbo::WarpedPoint uniform_point(const mixbo::SearchSpace& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  mixbo::WarpedPoint x(s.warped_dim());
  for (Eigen::Index d = 0; d < x.size(); ++d)
    x[d] = s.warped_lower()[d] + u(rng) * (s.warped_upper()[d] - s.warped_lower()[d]);
  return x;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace testutil
