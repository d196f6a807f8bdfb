#include "zominmax/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "zominmax/errors.hpp"
#include "zominmax/estimator.hpp"

namespace zominmax {

SolverState initial_state(const MinimaxProblem& problem, std::uint64_t seed,
                          const std::optional<Vector>& x0, const std::optional<Vector>& y0) {
  const Index k_blocks = problem.blocks();
  const Index d = problem.block_dim();
  Vector x = x0.value_or(Vector::Zero(k_blocks * d));
  Vector y = y0.value_or(Vector::Zero(problem.y_set.dim()));
  if (x.size() != k_blocks * d) throw ConfigError("initial_state: x0 has wrong dimension");
  if (y.size() != problem.y_set.dim()) throw ConfigError("initial_state: y0 has wrong dimension");

  SolverState state;
  state.x = BlockPoint(std::move(x), k_blocks);
  for (Index k = 0; k < k_blocks; ++k) {
    state.x.block(k) = project(problem.x_sets[static_cast<std::size_t>(k)], state.x.block(k));
  }
  state.y = project(problem.y_set, y);
  state.seed = seed;
  state.t = 1;
  return state;
}

void agp_step_with(SolverState& state, const MinimaxProblem& problem, const AgpStepParams& params,
                   const StepGradient& grad_x, const StepGradient& grad_y) {
  const Index blocks = state.x.blocks();
  BlockPoint next(state.x.concatenated() - params.alpha * grad_x(state.x.concatenated(), state.y),
                  blocks);
  for (Index k = 0; k < blocks; ++k) {
    next.block(k) = project(problem.x_sets[static_cast<std::size_t>(k)], next.block(k));
  }
  const Vector gy = grad_y(next.concatenated(), state.y);
  state.y = project(problem.y_set, state.y + params.beta * (gy - params.eta * state.y));
  state.x = std::move(next);
  ++state.t;
}

void zo_agp_step(SolverState& state, MinimaxProblem& problem, const AgpStepParams& params) {
  const auto t = static_cast<std::uint64_t>(state.t);
  const DirectionSampler x_sampler(state.x.dim(), state.seed, Phase::XEstimation);
  const DirectionSampler y_sampler(state.y.size(), state.seed, Phase::YEstimation);
  const EstimatorConfig x_cfg{params.mu_x, params.q_x};
  const EstimatorConfig y_cfg{params.mu_y, params.q_y};
  agp_step_with(
      state, problem, params,
      [&](const Vector& x, const Vector& y) {
        return estimate_grad_block(problem.objective, BlockPoint(x, 1), 0, y, x_cfg, x_sampler,
                                   {t, 0})
            .vector;
      },
      [&](const Vector& x, const Vector& y) {
        return estimate_grad_y(problem.objective, x, y, y_cfg, y_sampler, {t, 0}).vector;
      });
}

void fo_agp_step(SolverState& state, const MinimaxProblem& problem, const AgpStepParams& params) {
  if (!problem.has_gradients()) {
    throw ConfigError("first-order step: problem '" + problem.name + "' has no analytic gradients");
  }
  agp_step_with(state, problem, params, problem.grad_x, problem.grad_y);
}

void zo_bapg_step(SolverState& state, MinimaxProblem& problem, const BapgStepParams& params) {
  const Index blocks = state.x.blocks();
  if (static_cast<Index>(params.coef.size()) != blocks) {
    throw ConfigError("zo_bapg_step: expected " + std::to_string(blocks) +
                      " block coefficients, got " + std::to_string(params.coef.size()));
  }
  const auto t = static_cast<std::uint64_t>(state.t);
  const DirectionSampler x_sampler(state.x.block_dim(), state.seed, Phase::XEstimation);
  const DirectionSampler y_sampler(state.y.size(), state.seed, Phase::YEstimation);
  const EstimatorConfig x_cfg{params.mu_x, params.q_x};
  const EstimatorConfig y_cfg{params.mu_y, params.q_y};

  // `w` becomes x_{t+1} block by block.
  BlockPoint w = state.x;
  for (Index k = 0; k < blocks; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const double coef = params.coef[ks];
    if (!(coef > 0.0)) throw ConfigError("zo_bapg_step: tau_t + gamma_k must be positive");
    const Vector g = estimate_grad_block(problem.objective, w, k, state.y, x_cfg, x_sampler,
                                         {t, static_cast<std::uint32_t>(k)})
                         .vector;
    const double step = 1.0 / coef;
    const Vector xk = w.block(k);
    w.block(k) = prox_block(problem.x_terms[ks], problem.x_sets[ks], xk - step * g, coef);
  }
  const Vector gy =
      estimate_grad_y(problem.objective, w.concatenated(), state.y, y_cfg, y_sampler, {t, 0})
          .vector;
  state.y = prox_y(problem.y_term, problem.y_set,
                   state.y + params.rho * (gy - params.lambda * state.y), params.rho);
  state.x = std::move(w);
  ++state.t;
}

std::string_view solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::ZoAgp:
      return "zo-agp";
    case SolverKind::ZoBapg:
      return "zo-bapg";
    case SolverKind::ZoMinMax:
      return "zo-minmax";
    case SolverKind::FoAgp:
      return "fo-agp";
    case SolverKind::FoMinMax:
      return "fo-minmax";
  }
  return "unknown";
}

SolverKind parse_solver_kind(std::string_view name) {
  for (SolverKind k : {SolverKind::ZoAgp, SolverKind::ZoBapg, SolverKind::ZoMinMax,
                       SolverKind::FoAgp, SolverKind::FoMinMax}) {
    if (solver_name(k) == name) return k;
  }
  throw ConfigError("unknown solver '" + std::string(name) +
                    "' (expected zo-agp, zo-bapg, zo-minmax, fo-agp or fo-minmax)");
}

bool is_zeroth_order(SolverKind kind) {
  return kind == SolverKind::ZoAgp || kind == SolverKind::ZoBapg || kind == SolverKind::ZoMinMax;
}

double Schedule::gamma(Index k) const {
  if (gammas.empty()) return 0.0;
  return gammas.at(static_cast<std::size_t>(k));
}

AgpStepParams Schedule::agp_params(std::int64_t t) const {
  AgpStepParams p;
  if (const auto* prac = std::get_if<PracticalSchedule>(&source)) {
    const PracticalParams pp = practical_params(*prac, t);
    p.alpha = pp.alpha;
    p.beta = pp.beta;
    p.eta = pp.eta;
    p.mu_x = pp.mu1;
    p.mu_y = pp.mu2;
    p.q_x = pp.q1;
    p.q_y = pp.q2;
    return p;
  }
  const auto& theo = std::get<TheoreticalSchedule>(source);
  p.alpha = 1.0 / (theo.tau(t) + gamma(0));
  p.beta = theo.rho();
  p.eta = theo.lambda(t);
  std::tie(p.mu_x, p.mu_y) = theo.mu(t);
  std::tie(p.q_x, p.q_y) = theo.q(t);
  return p;
}

BapgStepParams Schedule::bapg_params(std::int64_t t, Index blocks) const {
  BapgStepParams p;
  p.coef.resize(static_cast<std::size_t>(blocks));
  if (const auto* prac = std::get_if<PracticalSchedule>(&source)) {
    const PracticalParams pp = practical_params(*prac, t);
    const double tau = 1.0 / pp.alpha;
    for (Index k = 0; k < blocks; ++k) p.coef[static_cast<std::size_t>(k)] = tau + gamma(k);
    p.rho = pp.beta;
    p.lambda = pp.eta;
    p.mu_x = pp.mu1;
    p.mu_y = pp.mu2;
    p.q_x = pp.q1;
    p.q_y = pp.q2;
    return p;
  }
  const auto& theo = std::get<TheoreticalSchedule>(source);
  const double tau = theo.tau(t);
  for (Index k = 0; k < blocks; ++k) p.coef[static_cast<std::size_t>(k)] = tau + gamma(k);
  p.rho = theo.rho();
  p.lambda = theo.lambda(t);
  std::tie(p.mu_x, p.mu_y) = theo.mu(t);
  std::tie(p.q_x, p.q_y) = theo.q(t);
  return p;
}

void StopRule::validate() const {
  if (max_iters < 0) throw ConfigError("stop.max_iters must be >= 0");
  if (max_queries && *max_queries < 0) throw ConfigError("stop.max_queries must be >= 0");
  if (gap_threshold && !(*gap_threshold >= 0.0)) {
    throw ConfigError("stop.gap_threshold must be >= 0");
  }
  if (gap_check_period < 1) throw ConfigError("stop.gap_check_period must be >= 1");
}

std::string_view stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::MaxIterations:
      return "max_iters";
    case StopReason::QueryBudget:
      return "max_queries";
    case StopReason::Converged:
      return "gap_threshold";
  }
  return "unknown";
}

namespace {

bool is_block_kind(SolverKind kind) { return kind == SolverKind::ZoBapg; }
bool forces_zero_regularizer(SolverKind kind) {
  return kind == SolverKind::ZoMinMax || kind == SolverKind::FoMinMax;
}

void validate_run(SolverKind kind, const MinimaxProblem& problem, const Schedule& schedule) {
  problem.validate();
  if (!is_zeroth_order(kind) && !problem.has_gradients()) {
    throw ConfigError(std::string("solver ") + std::string(solver_name(kind)) +
                      ": problem '" + problem.name + "' provides no analytic gradients");
  }
  if (!is_block_kind(kind) && !problem.is_smooth()) {
    throw ConfigError(std::string("solver ") + std::string(solver_name(kind)) +
                      " handles only zero h_k and g; use zo-bapg for nonsmooth terms");
  }
  if (!schedule.gammas.empty()) {
    if (static_cast<Index>(schedule.gammas.size()) != problem.blocks()) {
      throw ConfigError("schedule.gammas: expected " + std::to_string(problem.blocks()) +
                        " entries, got " + std::to_string(schedule.gammas.size()));
    }
    for (double g : schedule.gammas) {
      if (!(g >= 0.0)) throw ConfigError("schedule.gammas: entries must be >= 0");
    }
    if (const auto* theo = std::get_if<TheoreticalSchedule>(&schedule.source)) {
      const auto [lo, hi] = std::minmax_element(schedule.gammas.begin(), schedule.gammas.end());
      if (*lo != theo->constants().gamma_min || *hi != theo->constants().gamma_max) {
        throw ConfigError(
            "schedule.gammas: min/max must equal the theoretical constants gamma_min/gamma_max");
      }
    }
  }
  if (const auto* prac = std::get_if<PracticalSchedule>(&schedule.source)) prac->validate();
}

struct IterationPlan {
  AgpStepParams agp;
  BapgStepParams bapg;
  std::int64_t cost = 0;
};

IterationPlan plan_iteration(SolverKind kind, const Schedule& schedule, std::int64_t t,
                             Index blocks) {
  IterationPlan plan;
  if (is_block_kind(kind)) {
    plan.bapg = schedule.bapg_params(t, blocks);
    plan.cost = blocks * (plan.bapg.q_x + 1) + plan.bapg.q_y + 1;
  } else {
    plan.agp = schedule.agp_params(t);
    if (forces_zero_regularizer(kind)) plan.agp.eta = 0.0;
    plan.cost = is_zeroth_order(kind) ? (plan.agp.q_x + 1) + (plan.agp.q_y + 1) : 0;
  }
  return plan;
}

GapParams gap_params_for(SolverKind kind, const IterationPlan& plan, Index blocks) {
  if (is_block_kind(kind)) return GapParams{plan.bapg.coef, plan.bapg.rho};
  return GapParams::from_stepsizes(plan.agp.alpha, plan.agp.beta, blocks);
}

double regularizer_of(SolverKind kind, const IterationPlan& plan) {
  return is_block_kind(kind) ? plan.bapg.lambda : plan.agp.eta;
}

}  // namespace

RunResult run(SolverKind kind, MinimaxProblem& problem, const Schedule& schedule,
              const StopRule& stop, std::uint64_t seed, const RunOptions& options) {
  validate_run(kind, problem, schedule);
  stop.validate();

  const GapOracle gap_oracle =
      options.gap_oracle.value_or(problem.has_gradients()
                                      ? GapOracle::analytic()
                                      : GapOracle::surrogate(SurrogateConfig::defaults_for(
                                            std::max(problem.objective.dim_x(),
                                                     problem.objective.dim_y()),
                                            seed)));

  RunResult result;
  result.state = initial_state(problem, seed, options.x0, options.y0);
  const Index blocks = problem.blocks();
  const std::int64_t alg_base = problem.objective.ledger().algorithm();
  const std::int64_t diag_base = problem.objective.ledger().count(Phase::Diagnostics);
  const auto started = std::chrono::steady_clock::now();

  for (std::int64_t n = 1; n <= stop.max_iters; ++n) {
    const std::int64_t t = result.state.t;
    const IterationPlan plan = plan_iteration(kind, schedule, t, blocks);
    const std::int64_t used = problem.objective.ledger().algorithm() - alg_base;
    if (stop.max_queries && used + plan.cost > *stop.max_queries) {
      result.reason = StopReason::QueryBudget;
      break;
    }

    try {
      switch (kind) {
        case SolverKind::ZoAgp:
        case SolverKind::ZoMinMax:
          zo_agp_step(result.state, problem, plan.agp);
          break;
        case SolverKind::FoAgp:
        case SolverKind::FoMinMax:
          fo_agp_step(result.state, problem, plan.agp);
          break;
        case SolverKind::ZoBapg:
          zo_bapg_step(result.state, problem, plan.bapg);
          break;
      }
    } catch (const OracleError& e) {
      throw OracleError(std::string(solver_name(kind)) + " aborted at t=" + std::to_string(t) +
                        " with x_t=" + format_vector(result.state.x.concatenated()) +
                        " y_t=" + format_vector(result.state.y) + ": " + e.what());
    }
    result.iterations = n;

    if (n % stop.gap_check_period != 0) continue;

    // Gap at the new iterate uses the parameters of the next iteration; the
    // regularized gap uses the regularizer that produced y_{t+1}.
    const IterationPlan next = plan_iteration(kind, schedule, result.state.t, blocks);
    const GapParams gp = gap_params_for(kind, next, blocks);
    const auto diag_iter = static_cast<std::uint64_t>(result.state.t);
    const StationarityGap gap =
        gap_G(result.state.x, result.state.y, problem, gp, gap_oracle, diag_iter);
    const StationarityGap gap_tilde = gap_G_tilde(result.state.x, result.state.y, problem, gp,
                                                  regularizer_of(kind, plan), gap_oracle,
                                                  diag_iter);
    TraceRecord rec;
    rec.iter = n;
    rec.queries = problem.objective.ledger().algorithm() - alg_base;
    rec.f_value = problem.objective.evaluate(result.state.x.concatenated(), result.state.y,
                                             Phase::Diagnostics);
    rec.gap_total = gap.total;
    rec.gap_x = gap.gap_x_norm();
    rec.gap_y = gap.gap_y;
    rec.gap_tilde_total = gap_tilde.total;
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            started)
                      .count();
    result.trace.push_back(rec);

    if (stop.gap_threshold && gap.total <= *stop.gap_threshold) {
      result.reason = StopReason::Converged;
      break;
    }
  }

  result.algorithm_queries = problem.objective.ledger().algorithm() - alg_base;
  result.diagnostic_queries = problem.objective.ledger().count(Phase::Diagnostics) - diag_base;
  return result;
}

RunResult zo_minmax_run(MinimaxProblem& problem, const Schedule& schedule, const StopRule& stop,
                        std::uint64_t seed, const RunOptions& options) {
  return run(SolverKind::ZoMinMax, problem, schedule, stop, seed, options);
}

RunResult fo_agp_run(MinimaxProblem& problem, const Schedule& schedule, const StopRule& stop,
                     const RunOptions& options) {
  return run(SolverKind::FoAgp, problem, schedule, stop, 0, options);
}

RunResult fo_minmax_run(MinimaxProblem& problem, const Schedule& schedule, const StopRule& stop,
                        const RunOptions& options) {
  return run(SolverKind::FoMinMax, problem, schedule, stop, 0, options);
}

}  // namespace zominmax
