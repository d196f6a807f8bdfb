#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "zominmax/bench.hpp"
#include "zominmax/config.hpp"
#include "zominmax/solvers.hpp"

namespace zominmax {

/// One (solver, seed) run of an experiment.
struct TrialResult {
  SolverKind solver = SolverKind::ZoAgp;
  std::uint64_t seed = 0;
  RunResult run;
  // Poisoning only.
  std::optional<double> clean_accuracy;      ///< FO training with x = 0
  std::optional<double> retrained_accuracy;  ///< FO retraining against x_T
  std::optional<double> clean_loss;          ///< F_tr(0, theta_clean)
  std::optional<double> poisoned_loss;       ///< F_tr(x_T, theta_retrained)
};

struct ExperimentResult {
  std::vector<TrialResult> trials;
  nlohmann::json summary;
};

/// Toy problem from the config's problem name and settings, with the
/// configured l1 / squared-l2 terms attached.
MinimaxProblem make_toy_problem(const RunConfig& cfg);

/// Poisoning instance for one trial seed.
PoisoningProblem make_poisoning_problem(const RunConfig& cfg, std::uint64_t trial_seed);

/// First-order retraining of theta against a fixed perturbation; returns theta.
Vector retrain_theta(const PoisoningProblem& problem, const Vector& fixed_x, const RunConfig& cfg);

/// Runs every (solver, seed) pair, in parallel over cfg.threads workers.
/// With write_files set, writes trace_<solver>_seed<N>.csv, gaps_long.csv
/// and summary.json into cfg.out_dir.
ExperimentResult run_experiment(const RunConfig& cfg, bool write_files = true);

/// solver,seed,iter,gap rows for every trace record.
std::string gaps_long_csv(const std::vector<TrialResult>& trials);

}  // namespace zominmax
