#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zominmax/block_point.hpp"
#include "zominmax/problem.hpp"

namespace zominmax {

enum class GapMode { ExactGradient, SurrogateZo };

/// Stacked residual [ (tau_t + gamma_k)(x^k - Prox_k(x^k - grad_k / (tau_t + gamma_k))) ;
///                    (1/rho)(y - Prox_Y(y + rho grad_y)) ].
struct StationarityGap {
  std::vector<double> gap_x;  ///< per-block residual norms
  double gap_y = 0.0;
  double total = 0.0;
  GapMode mode = GapMode::ExactGradient;
  Vector x_residual;
  Vector y_residual;

  /// Norm of all x-block residuals stacked.
  double gap_x_norm() const;
};

/// Block coefficients (tau_t + gamma_k) and the y stepsize rho. For the
/// smooth single-block problem, coef = 1 / alpha_t and rho = beta.
struct GapParams {
  std::vector<double> block_coef;
  double rho = 1.0;

  static GapParams from_stepsizes(double alpha, double beta, Index blocks = 1);
};

struct SurrogateConfig {
  std::int64_t q_diag = 1000;
  double mu_diag = 1e-6;
  std::uint64_t seed = 0;

  /// q_diag = 1000 * max(1, dim / 10), mu_diag = 1e-6.
  static SurrogateConfig defaults_for(Index dim, std::uint64_t seed = 0);
};

/// Where the gap takes its gradients from: the problem's analytic gradients,
/// or a high-accuracy zeroth-order estimate whose queries are ledgered under
/// Phase::Diagnostics.
class GapOracle {
 public:
  static GapOracle analytic() { return GapOracle(std::nullopt); }
  static GapOracle surrogate(SurrogateConfig cfg);

  bool is_surrogate() const { return surrogate_.has_value(); }
  const SurrogateConfig& surrogate_config() const;

 private:
  explicit GapOracle(std::optional<SurrogateConfig> cfg) : surrogate_(std::move(cfg)) {}
  std::optional<SurrogateConfig> surrogate_;
};

/// Gap with the gradient of f. `iteration` keys the surrogate's random stream.
StationarityGap gap_G(const BlockPoint& x, const Vector& y, MinimaxProblem& problem,
                      const GapParams& params, const GapOracle& oracle,
                      std::uint64_t iteration = 0);

/// Gap with the gradient of f(x, y) - (lambda / 2) ||y||^2.
StationarityGap gap_G_tilde(const BlockPoint& x, const Vector& y, MinimaxProblem& problem,
                            const GapParams& params, double lambda, const GapOracle& oracle,
                            std::uint64_t iteration = 0);

struct TraceRecord {
  std::int64_t iter = 0;
  std::int64_t queries = 0;
  double f_value = 0.0;
  double gap_total = 0.0;
  double gap_x = 0.0;
  double gap_y = 0.0;
  double wall_ms = 0.0;
  /// Regularized-gradient gap; kept in memory and in the JSON summary only.
  double gap_tilde_total = 0.0;
};

/// Column order is fixed: iter,queries,f_value,gap_total,gap_x,gap_y,wall_ms.
inline constexpr const char* kTraceCsvHeader = "iter,queries,f_value,gap_total,gap_x,gap_y,wall_ms";

std::string trace_csv(std::span<const TraceRecord> trace);
void write_trace(std::span<const TraceRecord> trace, const std::filesystem::path& path);

struct SummaryStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation (0 for a single value)
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Quartiles by linear interpolation between order statistics.
SummaryStats summarize(std::span<const double> values);
double median(std::span<const double> values);
nlohmann::json to_json(const SummaryStats& stats);

struct TrialOutcome {
  std::uint64_t seed = 0;
  TraceRecord final_record;
};

/// Config echo, per-trial finals, and median/IQR across trials.
nlohmann::json summary_json(const nlohmann::json& config_echo, std::span<const TrialOutcome> trials);
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

/// Largest of ||grad_x f|| and ||grad_y f|| over `samples` random feasible
/// points (projections of uniform draws from the sets' bounding cubes). A
/// lower estimate of the gradient bound for the theoretical schedule; it is
/// never applied automatically. Needs the problem's analytic gradients.
double estimate_grad_bound(const MinimaxProblem& problem, int samples, std::uint64_t seed);

}  // namespace zominmax
