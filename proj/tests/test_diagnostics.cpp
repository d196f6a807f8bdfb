#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "zominmax/bench.hpp"
#include "zominmax/diagnostics.hpp"
#include "zominmax/errors.hpp"
#include "zominmax/rng.hpp"

using namespace zominmax;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

MinimaxProblem linear_on_unit_interval(double slope) {
  return MinimaxProblem::smooth(
      BlackBoxObjective(1, 1, [slope](const Vector& x, const Vector&) { return slope * x[0]; }),
      FeasibleSet::box(1, 0.0, 1.0), FeasibleSet::box(1, 0.0, 1.0),
      [slope](const Vector&, const Vector&) { return Vector::Constant(1, slope); },
      [](const Vector&, const Vector&) { return Vector::Zero(1); }, "linear");
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("gap examples on the unit interval") {
  MinimaxProblem up = linear_on_unit_interval(1.0);
  const StationarityGap g0 =
      gap_G(BlockPoint(vec({0.0}), 1), vec({0.5}), up, GapParams{{2.0}, 1.0}, GapOracle::analytic());
  CHECK(g0.gap_x[0] == 0.0);

  MinimaxProblem down = linear_on_unit_interval(-1.0);
  const StationarityGap g1 = gap_G(BlockPoint(vec({0.0}), 1), vec({0.5}), down,
                                   GapParams{{2.0}, 1.0}, GapOracle::analytic());
  CHECK(g1.gap_x[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g1.x_residual[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(g1.total == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g1.mode == GapMode::ExactGradient);
}

TEST_CASE("gap vanishes at a stationary interior point and at the toy saddle") {
  const ToyProblem toy = make_toy("saddle");
  MinimaxProblem p = toy.make_problem();
  const StationarityGap g = gap_G(BlockPoint(vec({0.0}), 1), vec({0.0}), p,
                                  GapParams::from_stepsizes(0.03, 0.02), GapOracle::analytic());
  CHECK(g.total == 0.0);
  CHECK(g.gap_y == 0.0);

  MinimaxProblem q = make_toy("quadratic", 4).make_problem();
  CHECK(gap_G(BlockPoint(Vector::Zero(4), 1), Vector::Zero(4), q, GapParams{{3.0}, 0.5},
              GapOracle::analytic())
            .total == 0.0);
}

TEST_CASE("total is the norm of the stacked residual") {
  CounterRng rng(StreamKey{3, 0, 0, 0, 0});
  MinimaxProblem p = make_toy("block-quadratic", 3, 4).make_problem();
  for (int n = 0; n < 200; ++n) {
    Vector x(12), y(3);
    for (Index i = 0; i < 12; ++i) x[i] = 2 * rng.uniform() - 1;
    for (Index i = 0; i < 3; ++i) y[i] = 2 * rng.uniform() - 1;
    const GapParams params{{1 + rng.uniform(), 2 + rng.uniform(), 0.5, 7.0}, 0.1 + rng.uniform()};
    const StationarityGap g = gap_G(BlockPoint(x, 4), y, p, params, GapOracle::analytic());
    double sum = g.gap_y * g.gap_y;
    for (double gx : g.gap_x) sum += gx * gx;
    CHECK(std::abs(g.total * g.total - sum) <= 1e-12 * std::max(sum, 1e-300));
    CHECK(g.gap_x.size() == 4);
    CHECK(g.total == doctest::Approx(std::sqrt(g.x_residual.squaredNorm() + g.y_residual.squaredNorm())));
  }
}

TEST_CASE("single-block gap equals the alternating-form gap") {
  CounterRng rng(StreamKey{4, 0, 0, 0, 0});
  MinimaxProblem p = make_toy("double-well", 3).make_problem();
  for (int n = 0; n < 200; ++n) {
    Vector x(3), y(3);
    for (Index i = 0; i < 3; ++i) x[i] = 4 * rng.uniform() - 2;
    for (Index i = 0; i < 3; ++i) y[i] = 4 * rng.uniform() - 2;
    const double alpha = 0.01 + rng.uniform();
    const double beta = 0.01 + rng.uniform();
    const StationarityGap g =
        gap_G(BlockPoint(x, 1), y, p, GapParams::from_stepsizes(alpha, beta), GapOracle::analytic());
    const Vector rx = (x - project(p.x_sets[0], x - alpha * p.grad_x(x, y))) / alpha;
    const Vector ry = (y - project(p.y_set, y + beta * p.grad_y(x, y))) / beta;
    CHECK(std::abs(g.gap_x[0] - rx.norm()) <= 1e-12 * std::max(1.0, rx.norm()));
    CHECK(std::abs(g.gap_y - ry.norm()) <= 1e-12 * std::max(1.0, ry.norm()));
  }
}

TEST_CASE("regularized gap") {
  CounterRng rng(StreamKey{6, 0, 0, 0, 0});
  MinimaxProblem p = make_toy("quadratic", 2).make_problem();
  for (int n = 0; n < 500; ++n) {
    const Vector x = vec({2 * rng.uniform() - 1, 2 * rng.uniform() - 1});
    const Vector y = vec({2 * rng.uniform() - 1, 2 * rng.uniform() - 1});
    const GapParams params{{0.5 + 5 * rng.uniform()}, 0.05 + rng.uniform()};
    const double lambda = 2 * rng.uniform();
    const StationarityGap g = gap_G(BlockPoint(x, 1), y, p, params, GapOracle::analytic());
    const StationarityGap g0 = gap_G_tilde(BlockPoint(x, 1), y, p, params, 0.0, GapOracle::analytic());
    CHECK(g0.total == g.total);
    CHECK(g0.y_residual == g.y_residual);
    const StationarityGap gt = gap_G_tilde(BlockPoint(x, 1), y, p, params, lambda, GapOracle::analytic());
    CHECK(g.total * g.total <= 2 * gt.total * gt.total + 2 * lambda * lambda * y.squaredNorm() + 1e-12);
    CHECK(gt.x_residual == g.x_residual);

    const StationarityGap gz =
        gap_G_tilde(BlockPoint(x, 1), Vector::Zero(2), p, params, lambda, GapOracle::analytic());
    const StationarityGap gz0 = gap_G(BlockPoint(x, 1), Vector::Zero(2), p, params, GapOracle::analytic());
    CHECK(gz.y_residual == gz0.y_residual);
  }
}

TEST_CASE("surrogate gap agrees with the analytic gap") {
  MinimaxProblem p = make_toy("quadratic", 5).make_problem();
  const Vector x = vec({0.3, -0.2, 0.5, 0.1, -0.4});
  const Vector y = vec({-0.1, 0.25, 0.0, 0.3, 0.2});
  const GapParams params{{4.0}, 0.3};
  const double exact = gap_G(BlockPoint(x, 1), y, p, params, GapOracle::analytic()).total;
  std::vector<double> approx;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SurrogateConfig cfg{5000, 1e-6, seed};
    const StationarityGap g = gap_G(BlockPoint(x, 1), y, p, params, GapOracle::surrogate(cfg), 1);
    CHECK(g.mode == GapMode::SurrogateZo);
    approx.push_back(g.total);
  }
  CHECK(std::abs(median(approx) - exact) <= 0.02 * exact);
  CHECK(p.objective.ledger().count(Phase::Diagnostics) == 20 * 2 * 5001);
  CHECK(p.objective.ledger().algorithm() == 0);
}

TEST_CASE("gap oracle configuration") {
  CHECK_THROWS_AS(GapOracle::surrogate({0, 1e-6, 0}), ConfigError);
  CHECK_THROWS_AS(GapOracle::surrogate({10, 0.0, 0}), ConfigError);
  CHECK_THROWS_AS(GapOracle::analytic().surrogate_config(), ConfigError);
  const SurrogateConfig d = SurrogateConfig::defaults_for(35, 2);
  CHECK(d.q_diag == 3500);
  CHECK(d.mu_diag == 1e-6);
  CHECK(SurrogateConfig::defaults_for(3).q_diag == 1000);

  MinimaxProblem blind = MinimaxProblem::smooth(
      BlackBoxObjective(1, 1, [](const Vector& x, const Vector& y) { return x[0] * y[0]; }),
      FeasibleSet::box(1, -1, 1), FeasibleSet::box(1, -1, 1));
  CHECK_THROWS_AS(gap_G(BlockPoint(vec({0.1}), 1), vec({0.1}), blind, GapParams{{1.0}, 1.0},
                        GapOracle::analytic()),
                  ConfigError);
  CHECK_NOTHROW(gap_G(BlockPoint(vec({0.1}), 1), vec({0.1}), blind, GapParams{{1.0}, 1.0},
                      GapOracle::surrogate({10, 1e-4, 0})));
  CHECK_THROWS_AS(GapParams::from_stepsizes(0.0, 1.0), ConfigError);
}

TEST_CASE("trace CSV layout") {
  CHECK(std::string(kTraceCsvHeader) == "iter,queries,f_value,gap_total,gap_x,gap_y,wall_ms");
  CHECK(lines_of(trace_csv({})) == std::vector<std::string>{kTraceCsvHeader});
  std::vector<TraceRecord> recs(3);
  for (int i = 0; i < 3; ++i) {
    recs[static_cast<std::size_t>(i)].iter = 10 * (i + 1);
    recs[static_cast<std::size_t>(i)].queries = 420 * (i + 1);
    recs[static_cast<std::size_t>(i)].gap_total = 0.5 / (i + 1);
  }
  const auto lines = lines_of(trace_csv(recs));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == kTraceCsvHeader);
  CHECK(lines[2].rfind("20,840,0,0.25,", 0) == 0);

  const auto dir = std::filesystem::temp_directory_path() / "zominmax_trace_test";
  std::filesystem::create_directories(dir);
  write_trace(recs, dir / "t.csv");
  std::ifstream in(dir / "t.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(lines_of(ss.str()) == lines);
  try {
    write_trace(recs, dir / "missing" / "t.csv");
    FAIL("expected an IO error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("summary statistics") {
  const std::vector<double> v = {3.0, 1.0, 2.0};
  CHECK(median(v) == 2.0);
  const SummaryStats s = summarize(std::vector<double>{1, 2, 3, 4});
  CHECK(s.median == 2.5);
  CHECK(s.mean == 2.5);
  CHECK(s.q1 == 1.75);
  CHECK(s.q3 == 3.25);
  CHECK(s.iqr == 1.5);
  CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(summarize(std::vector<double>{7}).stddev == 0.0);

  std::vector<TrialOutcome> trials(3);
  for (int i = 0; i < 3; ++i) {
    trials[static_cast<std::size_t>(i)].seed = static_cast<std::uint64_t>(i);
    trials[static_cast<std::size_t>(i)].final_record.gap_total = i + 1.0;
    trials[static_cast<std::size_t>(i)].final_record.queries = 100;
  }
  const nlohmann::json doc = summary_json({{"solver", "zo-agp"}}, trials);
  CHECK(doc["final_gap"]["median"] == 2.0);
  CHECK(doc["config"]["solver"] == "zo-agp");
  CHECK(doc["trials"].size() == 3);
  CHECK(doc["total_queries"]["median"] == 100.0);
}

TEST_CASE("gradient bound estimate") {
  // On [-1, 1]^2 the saddle's gradients peak at 4 in the corners.
  const MinimaxProblem p = make_toy("saddle").make_problem();
  const double eta = estimate_grad_bound(p, 2000, 3);
  CHECK(eta <= 4.0 + 1e-12);
  CHECK(eta >= 3.5);
  CHECK(estimate_grad_bound(p, 2000, 3) == eta);

  const MinimaxProblem blind = MinimaxProblem::smooth(
      BlackBoxObjective(1, 1, [](const Vector& x, const Vector& y) { return x[0] * y[0]; }),
      FeasibleSet::box(1, -1, 1), FeasibleSet::box(1, -1, 1));
  CHECK_THROWS_AS(estimate_grad_bound(blind, 10, 0), ConfigError);
  CHECK_THROWS_AS(estimate_grad_bound(p, 0, 0), ConfigError);
}
