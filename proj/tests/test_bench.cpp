#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zominmax/bench.hpp"
#include "zominmax/config.hpp"
#include "zominmax/errors.hpp"
#include "zominmax/experiment.hpp"
#include "zominmax/rng.hpp"

using namespace zominmax;

namespace {

DatasetConfig small_config(std::uint64_t seed, double ratio = 0.1) {
  DatasetConfig cfg;
  cfg.samples = 120;
  cfg.dim = 6;
  cfg.seed = seed;
  cfg.poison_ratio = ratio;
  return cfg;
}

Vector random_vector(CounterRng& rng, Index n, double scale) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

// Central differences of F_tr in one argument.
Vector fd_gradient(const PoisoningProblem& p, const Vector& x, const Vector& theta, bool wrt_x) {
  const double h = 1e-5;
  const Index n = wrt_x ? x.size() : theta.size();
  Vector g(n);
  for (Index i = 0; i < n; ++i) {
    Vector a = wrt_x ? x : theta;
    Vector b = a;
    a[i] += h;
    b[i] -= h;
    const double fa = wrt_x ? p.training_loss(a, theta) : p.training_loss(x, a);
    const double fb = wrt_x ? p.training_loss(b, theta) : p.training_loss(x, b);
    g[i] = (fa - fb) / (2.0 * h);
  }
  return g;
}

std::size_t count_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("split sizes and disjointness") {
  DatasetConfig cfg;
  cfg.samples = 1000;
  cfg.dim = 10;
  cfg.seed = 4;
  const SyntheticDataset data = generate_dataset(cfg);
  CHECK(data.train.size() == 900);
  CHECK(data.test.size() == 100);
  CHECK(data.poison.size() == 90);

  std::set<Index> train(data.train.begin(), data.train.end());
  for (Index i : data.test) CHECK(train.count(i) == 0);
  for (Index i : data.poison) CHECK(train.count(i) == 1);
  CHECK(train.size() + data.test.size() == 1000);
  CHECK(data.clean_train().size() == 810);
}

TEST_CASE("poison ratio holds within one sample") {
  for (double ratio : {0.0, 0.03, 0.1, 0.25, 0.5, 1.0}) {
    for (Index k : {37, 100, 251}) {
      DatasetConfig cfg = small_config(9, ratio);
      cfg.samples = k;
      const SyntheticDataset data = generate_dataset(cfg);
      const double want = ratio * static_cast<double>(data.train.size());
      CHECK(std::abs(static_cast<double>(data.poison.size()) - want) <= 1.0);
    }
  }
}

TEST_CASE("labels follow the generating model when noise is off") {
  DatasetConfig cfg = small_config(11);
  cfg.noise_var = 0.0;
  const SyntheticDataset data = generate_dataset(cfg);
  for (Index i = 0; i < data.samples(); ++i) {
    const int want = data.features.row(i).dot(data.theta_star) > 0.0 ? 1 : 0;
    CHECK(data.labels[static_cast<std::size_t>(i)] == want);
  }
}

TEST_CASE("dataset is a pure function of its config") {
  const SyntheticDataset a = generate_dataset(small_config(21));
  const SyntheticDataset b = generate_dataset(small_config(21));
  const SyntheticDataset c = generate_dataset(small_config(22));
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.theta_star == b.theta_star);
  CHECK(a.train == b.train);
  CHECK(a.poison == b.poison);
  CHECK(a.features != c.features);
}

TEST_CASE("dataset config errors") {
  DatasetConfig cfg = small_config(1);
  cfg.poison_ratio = 1.5;
  CHECK_THROWS_AS(generate_dataset(cfg), ConfigError);
  cfg = small_config(1);
  cfg.train_frac = 0.0;
  CHECK_THROWS_AS(generate_dataset(cfg), ConfigError);
  cfg = small_config(1);
  cfg.noise_var = -1.0;
  CHECK_THROWS_AS(generate_dataset(cfg), ConfigError);
  CHECK_THROWS_AS(PoisoningProblem(generate_dataset(small_config(1)), -1.0), ConfigError);
}

TEST_CASE("loss values at theta = 0 and on a single sample") {
  const PoisoningProblem p(generate_dataset(small_config(3)));
  const Index d = p.dataset().dim();
  // Both subset means are log 2, so their sum is 2 log 2.
  CHECK(p.training_loss(Vector::Zero(d), Vector::Zero(d)) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(p.training_loss(Vector::Constant(d, 1.5), Vector::Zero(d)) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));

  const std::vector<Index> one{p.dataset().train.front()};
  CHECK(logistic_loss(p.dataset(), Vector::Zero(d), Vector::Zero(d), one, false) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(logistic_loss(p.dataset(), Vector::Zero(d), Vector::Zero(d), {}, false) == 0.0);
}

TEST_CASE("training loss is the sum of the two subset means") {
  const PoisoningProblem p(generate_dataset(small_config(5)));
  const SyntheticDataset& data = p.dataset();
  CounterRng rng(StreamKey{5, 1, 0, 0, 0});
  const std::vector<Index> clean = data.clean_train();
  for (int n = 0; n < 20; ++n) {
    const Vector x = random_vector(rng, data.dim(), 2.0);
    const Vector theta = random_vector(rng, data.dim(), 1.0);
    const double want = logistic_loss(data, x, theta, data.poison, true) +
                        logistic_loss(data, x, theta, clean, false);
    CHECK(p.training_loss(x, theta) == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("unperturbed poisoned subset at x = 0") {
  const PoisoningProblem p(generate_dataset(small_config(6)));
  const SyntheticDataset& data = p.dataset();
  CounterRng rng(StreamKey{6, 1, 0, 0, 0});
  const Vector zero = Vector::Zero(data.dim());
  for (int n = 0; n < 10; ++n) {
    const Vector theta = random_vector(rng, data.dim(), 1.0);
    CHECK(logistic_loss(data, zero, theta, data.poison, true) ==
          logistic_loss(data, zero, theta, data.poison, false));
    CHECK(logistic_loss(data, zero, theta, data.train, true) ==
          logistic_loss(data, zero, theta, data.train, false));
  }
}

TEST_CASE("analytic gradients match central differences") {
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    const PoisoningProblem p(generate_dataset(small_config(100 + inst)));
    CounterRng rng(StreamKey{inst, 2, 0, 0, 0});
    const Vector x = random_vector(rng, p.dataset().dim(), 2.0);
    const Vector theta = random_vector(rng, p.dataset().dim(), 1.0);
    const Vector gx = p.grad_x(x, theta);
    const Vector gt = p.grad_theta(x, theta);
    CHECK((gx - fd_gradient(p, x, theta, true)).norm() / std::max(1.0, gx.norm()) < 1e-6);
    CHECK((gt - fd_gradient(p, x, theta, false)).norm() / std::max(1.0, gt.norm()) < 1e-6);
  }
}

TEST_CASE("perturbation gradient vanishes without poisoned samples") {
  const PoisoningProblem p(generate_dataset(small_config(7, 0.0)));
  CHECK(p.dataset().poison.empty());
  CounterRng rng(StreamKey{7, 1, 0, 0, 0});
  const Vector x = random_vector(rng, p.dataset().dim(), 2.0);
  const Vector theta = random_vector(rng, p.dataset().dim(), 1.0);
  CHECK(p.grad_x(x, theta).isZero(0.0));
}

TEST_CASE("attack objective is the negated training loss") {
  const PoisoningProblem p(generate_dataset(small_config(8)));
  MinimaxProblem attack = attack_objective(p);
  CounterRng rng(StreamKey{8, 1, 0, 0, 0});
  for (int n = 0; n < 10; ++n) {
    const Vector x = random_vector(rng, p.dataset().dim(), 2.0);
    const Vector theta = random_vector(rng, p.dataset().dim(), 1.0);
    CHECK(attack.objective.evaluate(x, theta, Phase::XEstimation) == -p.training_loss(x, theta));
    CHECK(attack.grad_x(x, theta) == -p.grad_x(x, theta));
    CHECK(attack.grad_y(x, theta) == -p.grad_theta(x, theta));
  }
  CHECK(attack.x_sets.front().contains(Vector::Constant(p.dataset().dim(), 2.0)));
  CHECK_FALSE(attack.x_sets.front().contains(Vector::Constant(p.dataset().dim(), 2.1)));

  const Vector fixed = Vector::Constant(p.dataset().dim(), 0.5);
  MinimaxProblem retrain = retraining_objective(p, fixed);
  const Vector theta = random_vector(rng, p.dataset().dim(), 1.0);
  CHECK(retrain.objective.evaluate(fixed, theta, Phase::YEstimation) ==
        -p.training_loss(fixed, theta));
}

TEST_CASE("accuracy of the generating model and of trivial classifiers") {
  DatasetConfig cfg = small_config(12);
  cfg.noise_var = 0.0;
  const SyntheticDataset data = generate_dataset(cfg);
  CHECK(test_accuracy(data.theta_star, data) == 1.0);
  CHECK(test_accuracy(-data.theta_star, data) == 0.0);
  double zeros = 0.0;
  for (Index i : data.test) zeros += data.labels[static_cast<std::size_t>(i)] == 0 ? 1.0 : 0.0;
  CHECK(test_accuracy(Vector::Zero(data.dim()), data) ==
        doctest::Approx(zeros / static_cast<double>(data.test.size())).epsilon(1e-15));
}

TEST_CASE("toy gradients match central differences") {
  for (const std::string& name : toy_names()) {
    CAPTURE(name);
    const ToyProblem toy = make_toy(name, 3, 2);
    CHECK(max_gradient_error(toy, 50, 17) < 1e-5);
    MinimaxProblem p = toy.make_problem();
    CHECK_NOTHROW(p.validate());
    for (const StationaryPoint& s : toy.stationary_points) {
      CHECK(p.grad_x(s.x, s.y).norm() < 1e-12);
    }
  }
  CHECK_THROWS_AS(make_toy("no-such-toy"), ConfigError);
}

TEST_CASE("saddle toy values") {
  const ToyProblem toy = make_toy("saddle");
  const Vector x = Vector::Constant(1, 0.5);
  const Vector y = Vector::Constant(1, -0.25);
  CHECK(toy.f(x, y) == doctest::Approx(0.25 - 0.25 - 0.0625).epsilon(1e-15));
  CHECK(toy.grad_x(x, y)[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(toy.grad_y(x, y)[0] == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("experiment outputs exist and parse") {
  const std::filesystem::path out = std::filesystem::temp_directory_path() / "zominmax_bench_exp";
  std::filesystem::remove_all(out);
  const RunConfig cfg = parse_run_config(
      "[run]\nproblem = poison\nsolver = zo-agp, zo-minmax\nseeds = 1..2\nout = " + out.string() +
      "\nthreads = 2\n[problem]\nsamples = 80\nfeatures = 5\n[schedule]\nq = 5\n"
      "[stop]\nmax_iters = 300\ngap_check_period = 10\n");
  const ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.trials.size() == 4);

  for (const char* solver : {"zo-agp", "zo-minmax"}) {
    for (int seed : {1, 2}) {
      const auto path = out / ("trace_" + std::string(solver) + "_seed" + std::to_string(seed) + ".csv");
      REQUIRE(std::filesystem::exists(path));
      CHECK(count_lines(path) == 1 + 30);
    }
  }
  CHECK(count_lines(out / "gaps_long.csv") == 1 + 4 * 30);

  std::ifstream in(out / "summary.json");
  const nlohmann::json summary = nlohmann::json::parse(in);
  CHECK(summary.contains("config"));
  CHECK(summary["metadata"].contains("unstated_defaults"));
  for (const char* solver : {"zo-agp", "zo-minmax"}) {
    const nlohmann::json& s = summary["solvers"][solver];
    CHECK(s["gap_curve"].size() == 30);
    CHECK(s["accuracy_trials"].size() == 2);
  }

  for (const TrialResult& t : res.trials) {
    REQUIRE(t.clean_accuracy.has_value());
    REQUIRE(t.retrained_accuracy.has_value());
    CHECK(*t.clean_accuracy >= 0.0);
    CHECK(*t.clean_accuracy <= 1.0);
  }

  // Same config, same numbers.
  const ExperimentResult again = run_experiment(cfg, false);
  for (std::size_t i = 0; i < res.trials.size(); ++i) {
    CHECK(again.trials[i].run.state.y == res.trials[i].run.state.y);
    CHECK(again.trials[i].run.trace.back().gap_total == res.trials[i].run.trace.back().gap_total);
  }
  std::filesystem::remove_all(out);
}

TEST_CASE("attack raises the retrained training loss") {
  const RunConfig cfg = parse_run_config(
      "[run]\nproblem = poison\nsolver = zo-agp\nseeds = 1..3\n"
      "[problem]\nsamples = 100\nfeatures = 8\n[schedule]\nq = 10\n"
      "[stop]\nmax_iters = 500\ngap_check_period = 500\n");
  const ExperimentResult res = run_experiment(cfg, false);
  std::vector<double> lift;
  for (const TrialResult& t : res.trials) lift.push_back(*t.poisoned_loss - *t.clean_loss);
  std::sort(lift.begin(), lift.end());
  CHECK(lift[lift.size() / 2] > 0.0);
}

TEST_CASE("full-scale poisoning config is accepted") {
  const RunConfig cfg = parse_run_config(
      "[run]\nproblem = poison\nsolver = zo-agp, zo-minmax, fo-minmax\nseeds = 1..10\n"
      "[problem]\nsamples = 1000\nfeatures = 100\nepsilon = 2\npoison_ratio = 0.1\n"
      "[schedule]\nq = 20\n[baseline]\nalpha = 0.02\nbeta = 0.05\n[stop]\nmax_iters = 50000\n");
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.seeds.size() == 10);
  const PoisoningProblem p = make_poisoning_problem(cfg, 1);
  CHECK(p.dataset().dim() == 100);
  CHECK(p.dataset().poison.size() == 90);
  const MinimaxProblem attack = attack_objective(p);
  CHECK_NOTHROW(cfg.schedule_for(SolverKind::ZoAgp, attack));
}
