#include "zominmax/oracle.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "zominmax/errors.hpp"

namespace zominmax {

std::string format_vector(const Vector& v, int max_entries) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  const Index shown = std::min<Index>(v.size(), max_entries);
  for (Index i = 0; i < shown; ++i) {
    if (i > 0) os << ", ";
    os << v[i];
  }
  if (shown < v.size()) os << ", ... [" << v.size() << " entries]";
  os << ')';
  return os.str();
}

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::XEstimation:
      return "x-estimation";
    case Phase::YEstimation:
      return "y-estimation";
    case Phase::Diagnostics:
      return "diagnostics";
  }
  return "unknown";
}

std::int64_t QueryLedger::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

BlackBoxObjective::BlackBoxObjective(Index dim_x, Index dim_y, Function f)
    : dim_x_(dim_x), dim_y_(dim_y), f_(std::move(f)) {
  if (dim_x_ < 1 || dim_y_ < 1) {
    throw ConfigError("BlackBoxObjective: dimensions must be positive, got d_x=" +
                      std::to_string(dim_x_) + " d_y=" + std::to_string(dim_y_));
  }
  if (!f_) throw ConfigError("BlackBoxObjective: empty function");
}

double BlackBoxObjective::evaluate(const Vector& x, const Vector& y, Phase phase) {
  if (x.size() != dim_x_ || y.size() != dim_y_) {
    throw ConfigError("BlackBoxObjective: expected dims (" + std::to_string(dim_x_) + ", " +
                      std::to_string(dim_y_) + "), got (" + std::to_string(x.size()) + ", " +
                      std::to_string(y.size()) + ")");
  }
  if (!all_finite(x) || !all_finite(y)) {
    throw OracleError("BlackBoxObjective: non-finite query point x=" + format_vector(x) +
                      " y=" + format_vector(y));
  }
  ledger_.record(phase);
  const double value = f_(x, y);
  if (!std::isfinite(value)) {
    throw OracleError("BlackBoxObjective: non-finite value at x=" + format_vector(x) +
                      " y=" + format_vector(y));
  }
  return value;
}

}  // namespace zominmax
