#include "zominmax/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "zominmax/diagnostics.hpp"
#include "zominmax/errors.hpp"

namespace zominmax {

MinimaxProblem make_toy_problem(const RunConfig& cfg) {
  const auto& ps = cfg.problem_settings;
  MinimaxProblem p = make_toy(cfg.problem, ps.dim, ps.blocks).make_problem();
  if (ps.x_l1 > 0.0) {
    for (auto& term : p.x_terms) term = ProxTerm::l1(ps.x_l1);
  }
  if (ps.y_sq > 0.0) p.y_term = ProxTerm::squared_l2(ps.y_sq);
  p.validate();
  return p;
}

PoisoningProblem make_poisoning_problem(const RunConfig& cfg, std::uint64_t trial_seed) {
  DatasetConfig dc = cfg.problem_settings.dataset;
  dc.seed = cfg.problem_settings.dataset_seed.value_or(trial_seed);
  return PoisoningProblem(generate_dataset(dc), cfg.problem_settings.epsilon,
                          cfg.problem_settings.theta_bound);
}

Vector retrain_theta(const PoisoningProblem& problem, const Vector& fixed_x, const RunConfig& cfg) {
  MinimaxProblem mp = retraining_objective(problem, fixed_x);
  StopRule stop;
  stop.max_iters = cfg.retrain_iters > 0 ? cfg.retrain_iters : cfg.stop.max_iters;
  stop.gap_check_period = stop.max_iters;
  const Schedule sched =
      Schedule::practical(PracticalSchedule::constant(cfg.baseline_alpha, cfg.baseline_beta,
                                                      cfg.practical.mu1, cfg.practical.q1));
  RunOptions opts;
  opts.x0 = fixed_x;
  return fo_minmax_run(mp, sched, stop, opts).state.y;
}

namespace {

TrialResult run_trial(const RunConfig& cfg, SolverKind kind, std::uint64_t seed) {
  TrialResult tr;
  tr.solver = kind;
  tr.seed = seed;
  if (cfg.problem == "poison") {
    const PoisoningProblem pp = make_poisoning_problem(cfg, seed);
    MinimaxProblem mp = attack_objective(pp);
    RunOptions opts;
    opts.gap_oracle = cfg.gap_oracle(seed, mp.objective.dim_x() + mp.objective.dim_y());
    tr.run = run(kind, mp, cfg.schedule_for(kind, mp), cfg.stop, seed, opts);
    const Vector x_t = tr.run.state.x.concatenated();
    const Vector zero = Vector::Zero(x_t.size());
    const Vector theta_clean = retrain_theta(pp, zero, cfg);
    const Vector theta_poisoned = retrain_theta(pp, x_t, cfg);
    tr.clean_accuracy = test_accuracy(theta_clean, pp.dataset());
    tr.retrained_accuracy = test_accuracy(theta_poisoned, pp.dataset());
    tr.clean_loss = pp.training_loss(zero, theta_clean);
    tr.poisoned_loss = pp.training_loss(x_t, theta_poisoned);
  } else {
    MinimaxProblem mp = make_toy_problem(cfg);
    RunOptions opts;
    opts.gap_oracle = cfg.gap_oracle(seed, mp.objective.dim_x() + mp.objective.dim_y());
    tr.run = run(kind, mp, cfg.schedule_for(kind, mp), cfg.stop, seed, opts);
  }
  return tr;
}

nlohmann::json stats_or_null(const std::vector<double>& v) {
  return v.empty() ? nlohmann::json() : to_json(summarize(v));
}

nlohmann::json build_summary(const RunConfig& cfg, const std::vector<TrialResult>& trials) {
  nlohmann::json doc;
  doc["config"] = to_json(cfg);
  nlohmann::json per_solver = nlohmann::json::object();
  for (SolverKind kind : cfg.solvers) {
    std::vector<TrialOutcome> outcomes;
    std::map<std::int64_t, std::vector<double>> by_iter;
    std::map<std::int64_t, std::vector<double>> by_iter_tilde;
    std::vector<double> clean;
    std::vector<double> retrained;
    for (const TrialResult& t : trials) {
      if (t.solver != kind) continue;
      outcomes.push_back({t.seed, t.run.trace.empty() ? TraceRecord{} : t.run.trace.back()});
      for (const TraceRecord& r : t.run.trace) {
        by_iter[r.iter].push_back(r.gap_total);
        by_iter_tilde[r.iter].push_back(r.gap_tilde_total);
      }
      if (t.clean_accuracy) clean.push_back(*t.clean_accuracy);
      if (t.retrained_accuracy) retrained.push_back(*t.retrained_accuracy);
    }
    nlohmann::json s = summary_json(nlohmann::json::object(), outcomes);
    s.erase("config");
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [iter, gaps] : by_iter) {
      const SummaryStats st = summarize(gaps);
      const SummaryStats stt = summarize(by_iter_tilde[iter]);
      curve.push_back({{"iter", iter},
                       {"median", st.median},
                       {"mean", st.mean},
                       {"std", st.stddev},
                       {"median_gap_tilde", stt.median}});
    }
    s["gap_curve"] = curve;
    if (!clean.empty()) {
      s["clean_accuracy"] = stats_or_null(clean);
      s["retrained_accuracy"] = stats_or_null(retrained);
      nlohmann::json acc = nlohmann::json::array();
      for (const TrialResult& t : trials) {
        if (t.solver != kind) continue;
        acc.push_back({{"seed", t.seed},
                       {"clean_accuracy", *t.clean_accuracy},
                       {"retrained_accuracy", *t.retrained_accuracy},
                       {"clean_loss", *t.clean_loss},
                       {"poisoned_loss", *t.poisoned_loss}});
      }
      s["accuracy_trials"] = acc;
    }
    per_solver[std::string(solver_name(kind))] = s;
  }
  doc["solvers"] = per_solver;

  nlohmann::json meta;
  meta["unstated_defaults"] = {
      {"train_frac", cfg.problem_settings.dataset.train_frac},
      {"theta_star_distribution", "standard normal, drawn per dataset seed"},
      {"theta_bound", cfg.problem_settings.theta_bound},
      {"mu1", cfg.practical.mu1},
      {"mu2", cfg.practical.mu2},
      {"gap_mode", cfg.gap_mode},
      {"direction_distribution", "uniform on the unit sphere"},
      {"retrain_solver", "fo-minmax"}};
  if (cfg.problem == "poison") {
    nlohmann::json stars = nlohmann::json::object();
    for (std::uint64_t seed : cfg.seeds) {
      DatasetConfig dc = cfg.problem_settings.dataset;
      dc.seed = cfg.problem_settings.dataset_seed.value_or(seed);
      const SyntheticDataset data = generate_dataset(dc);
      stars[std::to_string(dc.seed)] =
          std::vector<double>(data.theta_star.data(), data.theta_star.data() + data.theta_star.size());
    }
    meta["theta_star"] = stars;
  }
  doc["metadata"] = meta;
  return doc;
}

}  // namespace

std::string gaps_long_csv(const std::vector<TrialResult>& trials) {
  std::ostringstream out;
  out.precision(17);
  out << "solver,seed,iter,gap\n";
  for (const TrialResult& t : trials) {
    for (const TraceRecord& r : t.run.trace) {
      out << solver_name(t.solver) << ',' << t.seed << ',' << r.iter << ',' << r.gap_total << '\n';
    }
  }
  return out.str();
}

ExperimentResult run_experiment(const RunConfig& cfg, bool write_files) {
  cfg.validate();
  struct Task {
    SolverKind kind;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (SolverKind k : cfg.solvers) {
    for (std::uint64_t s : cfg.seeds) tasks.push_back({k, s});
  }
  std::vector<TrialResult> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = run_trial(cfg, tasks[i].kind, tasks[i].seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned n_threads = cfg.threads > 0 ? cfg.threads : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(tasks.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentResult out;
  out.summary = build_summary(cfg, results);
  out.trials = std::move(results);
  if (write_files) {
    std::filesystem::create_directories(cfg.out_dir);
    for (const TrialResult& t : out.trials) {
      write_trace(t.run.trace, cfg.out_dir / ("trace_" + std::string(solver_name(t.solver)) +
                                              "_seed" + std::to_string(t.seed) + ".csv"));
    }
    std::ofstream longf(cfg.out_dir / "gaps_long.csv");
    if (!longf) throw std::runtime_error("cannot write " + (cfg.out_dir / "gaps_long.csv").string());
    longf << gaps_long_csv(out.trials);
    write_json(out.summary, cfg.out_dir / "summary.json");
  }
  return out;
}

}  // namespace zominmax
