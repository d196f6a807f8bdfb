#pragma once

#include <functional>
#include <string>
#include <vector>

#include "zominmax/geometry.hpp"
#include "zominmax/oracle.hpp"

namespace zominmax {

/// Gradient of f with respect to the full (concatenated) x or to y.
using GradientFn = std::function<Vector(const Vector& x, const Vector& y)>;

/// min over x = [x^1..x^K], x^k in X_k, max over y in Y of
///   f(x, y) + sum_k h_k(x^k) - g(y).
/// With K = 1 and zero terms this is the plain constrained smooth problem.
/// The gradients are optional and used only by first-order baselines and
/// exact-gradient diagnostics.
struct MinimaxProblem {
  BlackBoxObjective objective;
  std::vector<FeasibleSet> x_sets;
  std::vector<ProxTerm> x_terms;
  FeasibleSet y_set;
  ProxTerm y_term = ProxTerm::zero();
  GradientFn grad_x;
  GradientFn grad_y;
  std::string name;

  static MinimaxProblem smooth(BlackBoxObjective objective, FeasibleSet x_set, FeasibleSet y_set,
                               GradientFn grad_x = {}, GradientFn grad_y = {},
                               std::string name = {});

  Index blocks() const { return static_cast<Index>(x_sets.size()); }
  Index block_dim() const { return x_sets.empty() ? 0 : x_sets.front().dim(); }
  bool has_gradients() const { return static_cast<bool>(grad_x) && static_cast<bool>(grad_y); }
  bool is_smooth() const;

  /// Throws ConfigError naming the inconsistent field.
  void validate() const;
};

}  // namespace zominmax
