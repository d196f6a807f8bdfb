#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string_view>

#include "zominmax/types.hpp"

namespace zominmax {

/// Who asked for a function value. Algorithm queries are the x/y estimation
/// phases; diagnostics (gaps, traced objective values) are kept apart.
enum class Phase : std::uint32_t { XEstimation = 0, YEstimation = 1, Diagnostics = 2 };

inline constexpr std::size_t kPhaseCount = 3;

std::string_view phase_name(Phase phase);

class QueryLedger {
 public:
  void record(Phase phase) { ++counts_[static_cast<std::size_t>(phase)]; }

  std::int64_t count(Phase phase) const { return counts_[static_cast<std::size_t>(phase)]; }
  std::int64_t total() const;
  /// Queries spent by the solver itself (x- and y-estimation).
  std::int64_t algorithm() const {
    return count(Phase::XEstimation) + count(Phase::YEstimation);
  }

  void reset() { counts_.fill(0); }

 private:
  std::array<std::int64_t, kPhaseCount> counts_{};
};

/// Value-only access to f(x, y). Every evaluation goes through here and is
/// ledgered; solvers never see gradients of the objective through this type.
class BlackBoxObjective {
 public:
  using Function = std::function<double(const Vector& x, const Vector& y)>;

  BlackBoxObjective(Index dim_x, Index dim_y, Function f);

  /// Throws ConfigError on dimension mismatch and OracleError on non-finite
  /// input or output.
  double evaluate(const Vector& x, const Vector& y, Phase phase);

  Index dim_x() const { return dim_x_; }
  Index dim_y() const { return dim_y_; }

  const QueryLedger& ledger() const { return ledger_; }
  void reset_ledger() { ledger_.reset(); }

 private:
  Index dim_x_;
  Index dim_y_;
  Function f_;
  QueryLedger ledger_;
};

inline double evaluate_counted(BlackBoxObjective& obj, const Vector& x, const Vector& y,
                               Phase phase) {
  return obj.evaluate(x, y, phase);
}

}  // namespace zominmax
