#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zominmax/bench.hpp"
#include "zominmax/diagnostics.hpp"
#include "zominmax/problem.hpp"
#include "zominmax/schedules.hpp"
#include "zominmax/solvers.hpp"

namespace zominmax {

/// Settings for the problem named in [run] problem.
struct ProblemSettings {
  Index dim = 1;     ///< toy block / y dimension
  Index blocks = 1;  ///< toy block count
  double x_l1 = 0.0;  ///< l1 weight of every h_k (block solver only)
  double y_sq = 0.0;  ///< squared-l2 weight of g (block solver only)
  DatasetConfig dataset;                     ///< poisoning only
  std::optional<std::uint64_t> dataset_seed;  ///< fixed dataset; default is the trial seed
  double epsilon = 2.0;
  double theta_bound = 100.0;
};

struct TheoreticalSettings {
  double rho = 0.1;
  double eps = 0.5;
  ProblemConstants constants;
};

/// Everything a run or experiment needs. Parsed from an INI-style file with
/// sections [run], [problem], [schedule], [baseline], [stop], [diagnostics];
/// unknown sections or keys are errors.
struct RunConfig {
  std::string problem = "saddle";
  std::vector<SolverKind> solvers = {SolverKind::ZoAgp};
  std::vector<std::uint64_t> seeds = {0};
  std::filesystem::path out_dir = "results";
  unsigned threads = 0;  ///< 0 = hardware concurrency

  ProblemSettings problem_settings;

  std::string schedule_kind = "practical";
  PracticalSchedule practical;
  /// Constant stepsizes for zo-minmax / fo-minmax in practical mode.
  double baseline_alpha = 0.02;
  double baseline_beta = 0.05;
  TheoreticalSettings theoretical;
  std::vector<double> gammas;

  StopRule stop;

  std::string gap_mode = "analytic";  ///< analytic | surrogate
  std::optional<std::int64_t> q_diag;
  std::optional<double> mu_diag;

  /// Iterations of first-order retraining in the poisoning harness; 0 means max_iters.
  std::int64_t retrain_iters = 0;

  void validate() const;
  /// Schedule for `kind` on `problem`; minmax baselines get the constant
  /// baseline stepsizes. Theoretical constants take K, dims and gammas from
  /// the problem and this config.
  Schedule schedule_for(SolverKind kind, const MinimaxProblem& problem) const;
  std::optional<GapOracle> gap_oracle(std::uint64_t seed, Index dim) const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// "3", "1,2,5" or "1..10" (inclusive).
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace zominmax
