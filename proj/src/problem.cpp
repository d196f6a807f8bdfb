#include "zominmax/problem.hpp"

#include <algorithm>

#include "zominmax/errors.hpp"

namespace zominmax {

MinimaxProblem MinimaxProblem::smooth(BlackBoxObjective objective, FeasibleSet x_set,
                                      FeasibleSet y_set, GradientFn grad_x, GradientFn grad_y,
                                      std::string name) {
  MinimaxProblem p{std::move(objective),
                   {std::move(x_set)},
                   {ProxTerm::zero()},
                   std::move(y_set),
                   ProxTerm::zero(),
                   std::move(grad_x),
                   std::move(grad_y),
                   std::move(name)};
  p.validate();
  return p;
}

bool MinimaxProblem::is_smooth() const {
  return y_term.is_zero() &&
         std::all_of(x_terms.begin(), x_terms.end(), [](const ProxTerm& h) { return h.is_zero(); });
}

void MinimaxProblem::validate() const {
  if (x_sets.empty()) throw ConfigError("MinimaxProblem.x_sets: need at least one block");
  if (x_terms.size() != x_sets.size()) {
    throw ConfigError("MinimaxProblem.x_terms: expected " + std::to_string(x_sets.size()) +
                      " terms, got " + std::to_string(x_terms.size()));
  }
  const Index d = x_sets.front().dim();
  for (const FeasibleSet& s : x_sets) {
    if (s.dim() != d) throw ConfigError("MinimaxProblem.x_sets: blocks must share one dimension");
  }
  if (objective.dim_x() != d * blocks()) {
    throw ConfigError("MinimaxProblem.objective: d_x=" + std::to_string(objective.dim_x()) +
                      " but blocks span " + std::to_string(d * blocks()));
  }
  if (objective.dim_y() != y_set.dim()) {
    throw ConfigError("MinimaxProblem.y_set: dimension " + std::to_string(y_set.dim()) +
                      " does not match objective d_y=" + std::to_string(objective.dim_y()));
  }
}

}  // namespace zominmax
