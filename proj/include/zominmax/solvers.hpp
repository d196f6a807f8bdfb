#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "zominmax/block_point.hpp"
#include "zominmax/diagnostics.hpp"
#include "zominmax/problem.hpp"
#include "zominmax/schedules.hpp"

namespace zominmax {

struct SolverState {
  std::int64_t t = 1;  ///< index of the iterate currently held (x_t, y_t)
  BlockPoint x;
  Vector y;
  std::uint64_t seed = 0;
};

/// x_1, y_1: the given points (or zero) projected onto the feasible sets.
SolverState initial_state(const MinimaxProblem& problem, std::uint64_t seed,
                          const std::optional<Vector>& x0 = std::nullopt,
                          const std::optional<Vector>& y0 = std::nullopt);

/// Per-iteration quantities of the alternating projected method.
struct AgpStepParams {
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double mu_x = 0.0;
  double mu_y = 0.0;
  std::int64_t q_x = 1;
  std::int64_t q_y = 1;
};

/// Per-iteration quantities of the block proximal method. coef[k] is
/// tau_t + gamma_k.
struct BapgStepParams {
  std::vector<double> coef;
  double rho = 0.0;
  double lambda = 0.0;
  double mu_x = 0.0;
  double mu_y = 0.0;
  std::int64_t q_x = 1;
  std::int64_t q_y = 1;
};

/// Gradient source for the generic alternating step; receives the full x.
using StepGradient = std::function<Vector(const Vector& x, const Vector& y)>;

/// x_{t+1} = proj_X(x_t - alpha g_x(x_t, y_t));
/// y_{t+1} = proj_Y(y_t + beta (g_y(x_{t+1}, y_t) - eta y_t)).
void agp_step_with(SolverState& state, const MinimaxProblem& problem, const AgpStepParams& params,
                   const StepGradient& grad_x, const StepGradient& grad_y);

/// Zeroth-order alternating step; spends (q_x + 1) + (q_y + 1) queries.
void zo_agp_step(SolverState& state, MinimaxProblem& problem, const AgpStepParams& params);

/// Same update with the problem's analytic gradients; spends no queries.
void fo_agp_step(SolverState& state, const MinimaxProblem& problem, const AgpStepParams& params);

/// Block Gauss-Seidel proximal step. Block k's estimate is taken at
/// w^k = [x^1_{t+1}, ..., x^{k-1}_{t+1}, x^k_t, ..., x^K_t]; then
/// y_{t+1} = Prox_Y(y_t + rho (g_y(x_{t+1}, y_t) - lambda y_t)).
/// Spends K (q_x + 1) + q_y + 1 queries.
void zo_bapg_step(SolverState& state, MinimaxProblem& problem, const BapgStepParams& params);

enum class SolverKind { ZoAgp, ZoBapg, ZoMinMax, FoAgp, FoMinMax };

std::string_view solver_name(SolverKind kind);
/// Accepts zo-agp, zo-bapg, zo-minmax, fo-agp, fo-minmax.
SolverKind parse_solver_kind(std::string_view name);
bool is_zeroth_order(SolverKind kind);

/// Parameter source for a run: the practical experiment schedule or the
/// convergence-theory schedule, plus per-block offsets gamma_k.
struct Schedule {
  std::variant<PracticalSchedule, TheoreticalSchedule> source;
  std::vector<double> gammas;  ///< empty means all zero

  static Schedule practical(PracticalSchedule p) { return Schedule{p, {}}; }
  static Schedule theoretical(TheoreticalSchedule s) { return Schedule{std::move(s), {}}; }

  bool is_theoretical() const { return std::holds_alternative<TheoreticalSchedule>(source); }
  double gamma(Index k) const;

  /// alpha_t = 1 / (tau_t + gamma_1), beta = rho, eta_t = lambda_t in theoretical mode.
  AgpStepParams agp_params(std::int64_t t) const;
  /// tau_t = 1 / alpha_t, rho = beta, lambda_t = eta_t in practical mode.
  BapgStepParams bapg_params(std::int64_t t, Index blocks) const;
};

struct StopRule {
  std::int64_t max_iters = 1000;
  std::optional<std::int64_t> max_queries;
  std::optional<double> gap_threshold;
  std::int64_t gap_check_period = 100;

  void validate() const;
};

enum class StopReason { MaxIterations, QueryBudget, Converged };
std::string_view stop_reason_name(StopReason reason);

struct RunOptions {
  /// Defaults to analytic gradients when the problem has them, otherwise a
  /// surrogate with SurrogateConfig::defaults_for.
  std::optional<GapOracle> gap_oracle;
  std::optional<Vector> x0;
  std::optional<Vector> y0;
};

struct RunResult {
  SolverState state;
  std::vector<TraceRecord> trace;
  StopReason reason = StopReason::MaxIterations;
  std::int64_t iterations = 0;
  std::int64_t algorithm_queries = 0;
  std::int64_t diagnostic_queries = 0;
};

/// Runs `kind` until the stop rule fires. A trace record is written after
/// every gap_check_period completed iterations. Deterministic given
/// (kind, schedule, stop, seed); only wall_ms varies between runs.
RunResult run(SolverKind kind, MinimaxProblem& problem, const Schedule& schedule,
              const StopRule& stop, std::uint64_t seed, const RunOptions& options = {});

/// ZO-AGP with eta_t forced to zero.
RunResult zo_minmax_run(MinimaxProblem& problem, const Schedule& schedule, const StopRule& stop,
                        std::uint64_t seed, const RunOptions& options = {});
RunResult fo_agp_run(MinimaxProblem& problem, const Schedule& schedule, const StopRule& stop,
                     const RunOptions& options = {});
RunResult fo_minmax_run(MinimaxProblem& problem, const Schedule& schedule, const StopRule& stop,
                        const RunOptions& options = {});

}  // namespace zominmax
