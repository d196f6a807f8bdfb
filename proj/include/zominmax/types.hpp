#pragma once

#include <Eigen/Core>
#include <string>

namespace zominmax {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// True when every entry is finite.
inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// Compact "(a, b, c)" rendering for error messages.
std::string format_vector(const Vector& v, int max_entries = 8);

}  // namespace zominmax
