#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "zominmax/bench.hpp"
#include "zominmax/config.hpp"
#include "zominmax/errors.hpp"
#include "zominmax/experiment.hpp"

using namespace zominmax;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("empty config gives the defaults") {
  const RunConfig cfg = parse_run_config("");
  CHECK(cfg.problem == "saddle");
  CHECK(cfg.solvers == std::vector<SolverKind>{SolverKind::ZoAgp});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{0});
  CHECK(cfg.schedule_kind == "practical");
  CHECK(cfg.practical.alpha_numerator == 5.0);
  CHECK(cfg.practical.alpha_offset == 100.0);
  CHECK(cfg.practical.beta == 0.02);
  CHECK(cfg.practical.eta_numerator == 0.1);
  CHECK(cfg.practical.eta_power == 0.25);
  CHECK(cfg.baseline_alpha == 0.02);
  CHECK(cfg.baseline_beta == 0.05);
  CHECK(cfg.problem_settings.epsilon == 2.0);
  CHECK(cfg.problem_settings.dataset.poison_ratio == 0.1);
  CHECK(cfg.gap_mode == "analytic");
}

TEST_CASE("full config round trip") {
  const RunConfig cfg = parse_run_config(
      "[run]\nproblem = block-quadratic\nsolver = zo-bapg, fo-agp\nseeds = 3..5\nout = /tmp/x\n"
      "threads = 3\n"
      "[problem]\ndim = 2\nblocks = 3\n"
      "[schedule]\nalpha_numerator = 4\nalpha_offset = 50\nbeta = 0.03\nmu = 0.001\nq1 = 7\n"
      "q2 = 9\ngammas = 0.5, 1.5\n"
      "[stop]\nmax_iters = 77\nmax_queries = 1000\ngap_threshold = 0.01\ngap_check_period = 7\n"
      "[diagnostics]\ngap = surrogate\nq_diag = 300\nmu_diag = 1e-5\n");
  CHECK(cfg.problem == "block-quadratic");
  CHECK(cfg.solvers == std::vector<SolverKind>{SolverKind::ZoBapg, SolverKind::FoAgp});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4, 5});
  CHECK(cfg.out_dir == "/tmp/x");
  CHECK(cfg.threads == 3);
  CHECK(cfg.problem_settings.blocks == 3);
  CHECK(cfg.practical.mu1 == 0.001);
  CHECK(cfg.practical.mu2 == 0.001);
  CHECK(cfg.practical.q1 == 7);
  CHECK(cfg.practical.q2 == 9);
  CHECK(cfg.gammas == std::vector<double>{0.5, 1.5});
  CHECK(cfg.stop.max_iters == 77);
  CHECK(cfg.stop.max_queries == 1000);
  CHECK(cfg.stop.gap_threshold == 0.01);
  CHECK(cfg.q_diag == 300);

  const nlohmann::json j = to_json(cfg);
  CHECK(j["run"]["solvers"] == nlohmann::json({"zo-bapg", "fo-agp"}));
  CHECK(j["schedule"]["q2"] == 9);
  CHECK(j["stop"]["max_queries"] == 1000);
  CHECK(j["diagnostics"]["gap"] == "surrogate");

  const std::optional<GapOracle> oracle = cfg.gap_oracle(4, 6);
  REQUIRE(oracle.has_value());
  CHECK(oracle->surrogate_config().q_diag == 300);
  CHECK(oracle->surrogate_config().mu_diag == 1e-5);
}

TEST_CASE("unknown sections and keys are reported together") {
  const std::string msg = error_of("[run]\nsolverz = zo-agp\n[scheduel]\nq = 3\n[stop]\nmax_iter = 3\n");
  CHECK(contains(msg, "unknown key run.solverz"));
  CHECK(contains(msg, "unknown section [scheduel]"));
  CHECK(contains(msg, "unknown key stop.max_iter"));
  CHECK(contains(error_of("q = 3\n"), "outside any section"));
}

TEST_CASE("malformed values name the key") {
  CHECK(contains(error_of("[schedule]\nbeta = fast\n"), "schedule.beta expects a number"));
  CHECK(contains(error_of("[stop]\nmax_iters = 1.5\n"), "stop.max_iters expects an integer"));
  CHECK(contains(error_of("[run]\nsolver = zo-sgd\n"), "zo-sgd"));
  CHECK(contains(error_of("[run]\nthreads = -1\n"), "run.threads"));
  CHECK_THROWS_AS(parse_run_config("[run\n"), ConfigError);
}

TEST_CASE("semantic validation") {
  CHECK(contains(error_of("[run]\nproblem = nope\n"), "unknown problem 'nope'"));
  CHECK(contains(error_of("[schedule]\nkind = magic\n"), "schedule.kind"));
  CHECK(contains(error_of("[baseline]\nalpha = 0\n"), "baseline.alpha"));
  CHECK(contains(error_of("[diagnostics]\ngap = guess\n"), "diagnostics.gap"));
  CHECK(contains(error_of("[stop]\ngap_check_period = 0\n"), "gap_check_period"));
  CHECK(contains(error_of("[problem]\nx_l1 = 0.1\n"), "cannot handle x_l1/y_sq"));
  CHECK_NOTHROW(parse_run_config("[run]\nsolver = zo-bapg\n[problem]\nx_l1 = 0.1\n"));
  CHECK(contains(error_of("[run]\nproblem = poison\n[problem]\npoison_ratio = 2\n"), "poison_ratio"));
  CHECK(contains(error_of("[schedule]\nkind = theoretical\nrho = 5\n"), "schedule"));

  // Two problems in one file are both listed.
  const std::string msg = error_of("[schedule]\nkind = magic\n[baseline]\nbeta = -1\n");
  CHECK(contains(msg, "schedule.kind"));
  CHECK(contains(msg, "baseline"));
}

TEST_CASE("seed lists") {
  CHECK(parse_seed_list("3") == std::vector<std::uint64_t>{3});
  CHECK(parse_seed_list("1, 2,5") == std::vector<std::uint64_t>{1, 2, 5});
  CHECK(parse_seed_list("1..4") == std::vector<std::uint64_t>{1, 2, 3, 4});
  CHECK(parse_seed_list("7..7") == std::vector<std::uint64_t>{7});
  CHECK_THROWS_AS(parse_seed_list("5..2"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list(""), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("x"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("-1"), ConfigError);
}

TEST_CASE("schedule selection per solver") {
  const RunConfig cfg = parse_run_config("[run]\nsolver = zo-agp, zo-minmax\n[schedule]\nq = 11\n");
  const MinimaxProblem p = make_toy_problem(cfg);

  const Schedule agp = cfg.schedule_for(SolverKind::ZoAgp, p);
  CHECK_FALSE(agp.is_theoretical());
  const AgpStepParams a1 = agp.agp_params(1);
  CHECK(a1.alpha == doctest::Approx(5.0 / 101.0).epsilon(1e-15));
  CHECK(a1.beta == 0.02);
  CHECK(a1.eta == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(a1.q_x == 11);

  const AgpStepParams m = cfg.schedule_for(SolverKind::ZoMinMax, p).agp_params(40);
  CHECK(m.alpha == 0.02);
  CHECK(m.beta == 0.05);
  CHECK(m.q_x == 11);
  CHECK(m.q_y == 11);

  const RunConfig theo = parse_run_config(
      "[run]\nproblem = block-quadratic\nsolver = zo-bapg\n[problem]\ndim = 2\nblocks = 3\n"
      "[schedule]\nkind = theoretical\nrho = 0.05\neps = 0.5\n");
  const MinimaxProblem bp = make_toy_problem(theo);
  const Schedule s = theo.schedule_for(SolverKind::ZoBapg, bp);
  REQUIRE(s.is_theoretical());
  const auto& ts = std::get<TheoreticalSchedule>(s.source);
  CHECK(ts.constants().blocks == 3);
  CHECK(ts.constants().dim_x == 2);
  CHECK(ts.constants().dim_y == 2);
}

TEST_CASE("config files load from disk") {
  const auto path = std::filesystem::temp_directory_path() / "zominmax_cfg_test.ini";
  {
    std::ofstream out(path);
    out << "[run]\nproblem = bilinear\nseeds = 2\n";
  }
  const RunConfig cfg = load_run_config(path);
  CHECK(cfg.problem == "bilinear");
  CHECK(cfg.seeds == std::vector<std::uint64_t>{2});
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_run_config(path), ConfigError);
}
