// Command-line driver: toy runs, the poisoning experiment, dataset export and
// generic config-driven solves.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>

#include "zominmax/config.hpp"
#include "zominmax/errors.hpp"
#include "zominmax/experiment.hpp"

namespace zm = zominmax;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::string out;
  std::vector<std::string> solvers;
  std::optional<std::int64_t> iters;
  std::optional<std::int64_t> q;
  std::optional<double> mu;
  std::string schedule;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "INI run configuration")->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "single trial seed");
  app->add_option("--seeds", f.seeds, "seed list: N, N,M,... or N..M");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--solver", f.solvers, "zo-agp, zo-bapg, zo-minmax, fo-agp, fo-minmax")
      ->delimiter(',');
  app->add_option("--iters", f.iters, "iteration budget T");
  app->add_option("--q", f.q, "directions per estimate (both players)");
  app->add_option("--mu", f.mu, "smoothing radius (both players)");
  app->add_option("--schedule", f.schedule, "practical or theoretical")
      ->check(CLI::IsMember({"practical", "theoretical"}));
  app->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

zm::RunConfig build_config(const CommonFlags& f) {
  zm::RunConfig cfg = f.config.empty() ? zm::RunConfig{} : zm::load_run_config(f.config);
  if (f.seed && !f.seeds.empty()) throw zm::ConfigError("use either --seed or --seeds");
  if (f.seed) cfg.seeds = {*f.seed};
  if (!f.seeds.empty()) cfg.seeds = zm::parse_seed_list(f.seeds);
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (!f.solvers.empty()) {
    cfg.solvers.clear();
    for (const auto& s : f.solvers) cfg.solvers.push_back(zm::parse_solver_kind(s));
  }
  if (f.iters) cfg.stop.max_iters = *f.iters;
  if (f.q) cfg.practical.q1 = cfg.practical.q2 = *f.q;
  if (f.mu) cfg.practical.mu1 = cfg.practical.mu2 = *f.mu;
  if (!f.schedule.empty()) cfg.schedule_kind = f.schedule;
  if (f.threads) cfg.threads = *f.threads;
  return cfg;
}

void report(const zm::RunConfig& cfg, const zm::ExperimentResult& res) {
  for (zm::SolverKind k : cfg.solvers) {
    const auto& s = res.summary["solvers"][std::string(zm::solver_name(k))];
    std::cout << zm::solver_name(k) << ": median final gap " << s["final_gap"]["median"].get<double>()
              << ", median queries " << s["total_queries"]["median"].get<double>();
    if (s.contains("clean_accuracy")) {
      std::cout << ", clean acc " << s["clean_accuracy"]["median"].get<double>()
                << ", retrained acc " << s["retrained_accuracy"]["median"].get<double>();
    }
    std::cout << '\n';
  }
  std::cout << "results written to " << cfg.out_dir.string() << '\n';
}

// The theoretical batch sizes grow like sqrt(t) and t and can be enormous for
// loose constants, so show them before starting.
void describe_theoretical(const zm::RunConfig& cfg) {
  const zm::MinimaxProblem problem =
      cfg.problem == "poison" ? zm::attack_objective(zm::make_poisoning_problem(cfg, cfg.seeds.front()))
                              : zm::make_toy_problem(cfg);
  const zm::Schedule s = cfg.schedule_for(cfg.solvers.front(), problem);
  const auto& theo = std::get<zm::TheoreticalSchedule>(s.source);
  const auto [q1_first, q2_first] = theo.q(1);
  const auto [q1_last, q2_last] = theo.q(cfg.stop.max_iters);
  std::cout << "theoretical schedule: (q1, q2) = (" << q1_first << ", " << q2_first << ") at t=1, ("
            << q1_last << ", " << q2_last << ") at t=" << cfg.stop.max_iters << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order solvers for nonconvex-concave min-max problems"};
  app.require_subcommand(1);

  CommonFlags toy_flags, poison_flags, solve_flags;
  std::string toy_name = "saddle";
  std::optional<zm::Index> toy_dim, toy_blocks;
  auto* toy = app.add_subcommand("toy", "run a named analytic toy problem");
  add_common(toy, toy_flags);
  toy->add_option("--name", toy_name, "toy problem")->check(CLI::IsMember(zm::toy_names()));
  toy->add_option("--dim", toy_dim, "block / y dimension");
  toy->add_option("--blocks", toy_blocks, "number of x blocks");

  auto* poison = app.add_subcommand("poison", "run the data-poisoning experiment");
  add_common(poison, poison_flags);
  std::optional<zm::Index> samples, features;
  poison->add_option("--samples", samples, "dataset size k");
  poison->add_option("--features", features, "feature dimension d");

  auto* solve = app.add_subcommand("solve", "run the problem described by a config file");
  add_common(solve, solve_flags);

  std::uint64_t data_seed = 0;
  zm::DatasetConfig data_cfg;
  std::string data_out = "dataset.csv";
  auto* gen = app.add_subcommand("gen-data", "write a synthetic poisoning dataset as CSV");
  gen->add_option("--seed", data_seed, "dataset seed");
  gen->add_option("--samples", data_cfg.samples, "dataset size k");
  gen->add_option("--features", data_cfg.dim, "feature dimension d");
  gen->add_option("--noise-var", data_cfg.noise_var, "label noise variance");
  gen->add_option("--out", data_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      data_cfg.seed = data_seed;
      data_cfg.validate();
      const zm::SyntheticDataset data = zm::generate_dataset(data_cfg);
      std::ofstream out(data_out);
      if (!out) throw std::runtime_error("cannot write " + data_out);
      out.precision(17);
      for (zm::Index j = 0; j < data.dim(); ++j) out << 'f' << j << ',';
      out << "label\n";
      for (zm::Index i = 0; i < data.samples(); ++i) {
        for (zm::Index j = 0; j < data.dim(); ++j) out << data.features(i, j) << ',';
        out << data.labels[static_cast<std::size_t>(i)] << '\n';
      }
      std::cout << "wrote " << data.samples() << " samples to " << data_out << '\n';
      return 0;
    }
    zm::RunConfig cfg;
    if (*toy) {
      cfg = build_config(toy_flags);
      cfg.problem = toy_name;
      if (toy_dim) cfg.problem_settings.dim = *toy_dim;
      if (toy_blocks) cfg.problem_settings.blocks = *toy_blocks;
    } else if (*poison) {
      cfg = build_config(poison_flags);
      cfg.problem = "poison";
      if (samples) cfg.problem_settings.dataset.samples = *samples;
      if (features) cfg.problem_settings.dataset.dim = *features;
    } else {
      if (solve_flags.config.empty()) throw zm::ConfigError("solve requires --config");
      cfg = build_config(solve_flags);
    }
    cfg.validate();
    if (cfg.schedule_kind == "theoretical") describe_theoretical(cfg);
    const zm::ExperimentResult res = zm::run_experiment(cfg);
    report(cfg, res);
  } catch (const zm::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
