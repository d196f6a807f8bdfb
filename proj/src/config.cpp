#include "zominmax/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "zominmax/errors.hpp"

namespace zominmax {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;
using SectionTable = std::map<std::string, std::map<std::string, Setter>>;

template <class F>
Setter num(F&& assign) {
  return [assign](RunConfig& c, const std::string& k, const std::string& v) {
    assign(c, to_double(k, v));
  };
}

template <class F>
Setter integer(F&& assign) {
  return [assign](RunConfig& c, const std::string& k, const std::string& v) {
    assign(c, to_int(k, v));
  };
}

const SectionTable& table() {
  static const SectionTable t = {
      {"run",
       {{"problem", [](RunConfig& c, const auto&, const auto& v) { c.problem = v; }},
        {"solver",
         [](RunConfig& c, const auto&, const auto& v) {
           c.solvers.clear();
           for (const auto& s : split(v, ',')) c.solvers.push_back(parse_solver_kind(s));
         }},
        {"seeds", [](RunConfig& c, const auto&, const auto& v) { c.seeds = parse_seed_list(v); }},
        {"out", [](RunConfig& c, const auto&, const auto& v) { c.out_dir = v; }},
        {"threads", integer([](RunConfig& c, std::int64_t v) {
           if (v < 0) throw ConfigError("config: run.threads must be >= 0");
           c.threads = static_cast<unsigned>(v);
         })}}},
      {"problem",
       {{"dim", integer([](RunConfig& c, std::int64_t v) { c.problem_settings.dim = v; })},
        {"blocks", integer([](RunConfig& c, std::int64_t v) { c.problem_settings.blocks = v; })},
        {"x_l1", num([](RunConfig& c, double v) { c.problem_settings.x_l1 = v; })},
        {"y_sq", num([](RunConfig& c, double v) { c.problem_settings.y_sq = v; })},
        {"samples",
         integer([](RunConfig& c, std::int64_t v) { c.problem_settings.dataset.samples = v; })},
        {"features",
         integer([](RunConfig& c, std::int64_t v) { c.problem_settings.dataset.dim = v; })},
        {"noise_var", num([](RunConfig& c, double v) { c.problem_settings.dataset.noise_var = v; })},
        {"poison_ratio",
         num([](RunConfig& c, double v) { c.problem_settings.dataset.poison_ratio = v; })},
        {"train_frac",
         num([](RunConfig& c, double v) { c.problem_settings.dataset.train_frac = v; })},
        {"dataset_seed", integer([](RunConfig& c, std::int64_t v) {
           c.problem_settings.dataset_seed = static_cast<std::uint64_t>(v);
         })},
        {"epsilon", num([](RunConfig& c, double v) { c.problem_settings.epsilon = v; })},
        {"theta_bound", num([](RunConfig& c, double v) { c.problem_settings.theta_bound = v; })},
        {"retrain_iters", integer([](RunConfig& c, std::int64_t v) { c.retrain_iters = v; })}}},
      {"schedule",
       {{"kind", [](RunConfig& c, const auto&, const auto& v) { c.schedule_kind = v; }},
        {"alpha_numerator", num([](RunConfig& c, double v) { c.practical.alpha_numerator = v; })},
        {"alpha_offset", num([](RunConfig& c, double v) { c.practical.alpha_offset = v; })},
        {"alpha_sqrt_coeff", num([](RunConfig& c, double v) { c.practical.alpha_sqrt_coeff = v; })},
        {"beta", num([](RunConfig& c, double v) { c.practical.beta = v; })},
        {"eta_numerator", num([](RunConfig& c, double v) { c.practical.eta_numerator = v; })},
        {"eta_power", num([](RunConfig& c, double v) { c.practical.eta_power = v; })},
        {"mu", num([](RunConfig& c, double v) { c.practical.mu1 = c.practical.mu2 = v; })},
        {"mu1", num([](RunConfig& c, double v) { c.practical.mu1 = v; })},
        {"mu2", num([](RunConfig& c, double v) { c.practical.mu2 = v; })},
        {"q", integer([](RunConfig& c, std::int64_t v) { c.practical.q1 = c.practical.q2 = v; })},
        {"q1", integer([](RunConfig& c, std::int64_t v) { c.practical.q1 = v; })},
        {"q2", integer([](RunConfig& c, std::int64_t v) { c.practical.q2 = v; })},
        {"gammas",
         [](RunConfig& c, const std::string& k, const std::string& v) {
           c.gammas.clear();
           for (const auto& s : split(v, ',')) c.gammas.push_back(to_double(k, s));
         }},
        {"rho", num([](RunConfig& c, double v) { c.theoretical.rho = v; })},
        {"eps", num([](RunConfig& c, double v) { c.theoretical.eps = v; })},
        {"lipschitz_x", num([](RunConfig& c, double v) { c.theoretical.constants.lipschitz_x = v; })},
        {"lipschitz_y", num([](RunConfig& c, double v) { c.theoretical.constants.lipschitz_y = v; })},
        {"grad_bound", num([](RunConfig& c, double v) { c.theoretical.constants.grad_bound = v; })},
        {"sigma_y", num([](RunConfig& c, double v) { c.theoretical.constants.sigma_y = v; })},
        {"objective_max",
         num([](RunConfig& c, double v) { c.theoretical.constants.objective_max = v; })},
        {"objective_min",
         num([](RunConfig& c, double v) { c.theoretical.constants.objective_min = v; })}}},
      {"baseline",
       {{"alpha", num([](RunConfig& c, double v) { c.baseline_alpha = v; })},
        {"beta", num([](RunConfig& c, double v) { c.baseline_beta = v; })}}},
      {"stop",
       {{"max_iters", integer([](RunConfig& c, std::int64_t v) { c.stop.max_iters = v; })},
        {"max_queries", integer([](RunConfig& c, std::int64_t v) { c.stop.max_queries = v; })},
        {"gap_threshold", num([](RunConfig& c, double v) { c.stop.gap_threshold = v; })},
        {"gap_check_period",
         integer([](RunConfig& c, std::int64_t v) { c.stop.gap_check_period = v; })}}},
      {"diagnostics",
       {{"gap", [](RunConfig& c, const auto&, const auto& v) { c.gap_mode = v; }},
        {"q_diag", integer([](RunConfig& c, std::int64_t v) { c.q_diag = v; })},
        {"mu_diag", num([](RunConfig& c, double v) { c.mu_diag = v; })}}},
  };
  return t;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const std::string t = trim(text);
  if (const auto dots = t.find(".."); dots != std::string::npos) {
    const std::int64_t lo = to_int("seeds", trim(t.substr(0, dots)));
    const std::int64_t hi = to_int("seeds", trim(t.substr(dots + 2)));
    if (lo < 0 || hi < lo) throw ConfigError("config: seed range '" + t + "' is empty or negative");
    for (std::int64_t s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
  } else {
    for (const auto& s : split(t, ',')) {
      const std::int64_t v = to_int("seeds", s);
      if (v < 0) throw ConfigError("config: seeds must be >= 0");
      seeds.push_back(static_cast<std::uint64_t>(v));
    }
  }
  if (seeds.empty()) throw ConfigError("config: empty seed list");
  return seeds;
}

RunConfig parse_run_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  std::vector<std::string> errors;
  for (const auto& [section, keys] : tree) {
    const auto sec = table().find(section);
    if (sec == table().end()) {
      if (!keys.data().empty()) {
        errors.push_back("key '" + section + "' outside any section");
      } else {
        errors.push_back("unknown section [" + section + "]");
      }
      continue;
    }
    for (const auto& [key, value] : keys) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) {
        errors.push_back("unknown key " + section + "." + key);
        continue;
      }
      try {
        setter->second(cfg, section + "." + key, trim(value.data()));
      } catch (const ConfigError& e) {
        errors.push_back(e.what());
      }
    }
  }
  if (!errors.empty()) {
    std::string msg = "invalid run configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void RunConfig::validate() const {
  std::vector<std::string> errors;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  const auto names = toy_names();
  check(problem == "poison" || std::find(names.begin(), names.end(), problem) != names.end(),
        "run.problem: unknown problem '" + problem + "'");
  check(!solvers.empty(), "run.solver: at least one solver required");
  check(!seeds.empty(), "run.seeds: at least one seed required");
  check(problem_settings.dim >= 1, "problem.dim must be >= 1");
  check(problem_settings.blocks >= 1, "problem.blocks must be >= 1");
  check(problem_settings.x_l1 >= 0.0, "problem.x_l1 must be >= 0");
  check(problem_settings.y_sq >= 0.0, "problem.y_sq must be >= 0");
  check(problem_settings.epsilon >= 0.0, "problem.epsilon must be >= 0");
  check(problem_settings.theta_bound > 0.0, "problem.theta_bound must be > 0");
  check(schedule_kind == "practical" || schedule_kind == "theoretical",
        "schedule.kind must be practical or theoretical");
  check(baseline_alpha > 0.0 && baseline_beta > 0.0, "baseline.alpha and baseline.beta must be > 0");
  check(gap_mode == "analytic" || gap_mode == "surrogate",
        "diagnostics.gap must be analytic or surrogate");
  check(!q_diag || *q_diag >= 1, "diagnostics.q_diag must be >= 1");
  check(!mu_diag || *mu_diag > 0.0, "diagnostics.mu_diag must be > 0");
  check(retrain_iters >= 0, "problem.retrain_iters must be >= 0");
  const bool nonsmooth = problem_settings.x_l1 > 0.0 || problem_settings.y_sq > 0.0;
  for (SolverKind k : solvers) {
    check(!(nonsmooth && k != SolverKind::ZoBapg),
          "run.solver: " + std::string(solver_name(k)) + " cannot handle x_l1/y_sq terms");
  }
  auto collect = [&](auto&& fn, const char* where) {
    try {
      fn();
    } catch (const ConfigError& e) {
      errors.push_back(std::string(where) + ": " + e.what());
    }
  };
  collect([&] { stop.validate(); }, "stop");
  if (schedule_kind == "practical") {
    collect([&] { practical.validate(); }, "schedule");
  } else if (schedule_kind == "theoretical") {
    collect([&] { TheoreticalSchedule(theoretical.constants, theoretical.rho, theoretical.eps); },
            "schedule");
  }
  if (problem == "poison") collect([&] { problem_settings.dataset.validate(); }, "problem");
  if (!errors.empty()) {
    std::string msg = "invalid run configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
}

Schedule RunConfig::schedule_for(SolverKind kind, const MinimaxProblem& problem) const {
  Schedule s = Schedule::practical(practical);
  if (schedule_kind == "theoretical") {
    ProblemConstants k = theoretical.constants;
    k.blocks = static_cast<int>(problem.blocks());
    k.dim_x = problem.block_dim();
    k.dim_y = problem.y_set.dim();
    if (!gammas.empty()) {
      k.gamma_min = *std::min_element(gammas.begin(), gammas.end());
      k.gamma_max = *std::max_element(gammas.begin(), gammas.end());
    }
    s = Schedule::theoretical(TheoreticalSchedule(k, theoretical.rho, theoretical.eps));
  } else if (kind == SolverKind::ZoMinMax || kind == SolverKind::FoMinMax) {
    PracticalSchedule base = PracticalSchedule::constant(baseline_alpha, baseline_beta,
                                                         practical.mu1, practical.q1);
    base.mu2 = practical.mu2;
    base.q2 = practical.q2;
    s = Schedule::practical(base);
  }
  s.gammas = gammas;
  return s;
}

std::optional<GapOracle> RunConfig::gap_oracle(std::uint64_t seed, Index dim) const {
  if (gap_mode == "analytic") return GapOracle::analytic();
  SurrogateConfig sc = SurrogateConfig::defaults_for(dim, seed);
  if (q_diag) sc.q_diag = *q_diag;
  if (mu_diag) sc.mu_diag = *mu_diag;
  return GapOracle::surrogate(sc);
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json solvers = nlohmann::json::array();
  for (SolverKind k : c.solvers) solvers.push_back(std::string(solver_name(k)));
  const auto& ps = c.problem_settings;
  nlohmann::json j;
  j["run"] = {{"problem", c.problem},
              {"solvers", solvers},
              {"seeds", c.seeds},
              {"out", c.out_dir.string()},
              {"threads", c.threads}};
  j["problem"] = {{"dim", ps.dim},
                  {"blocks", ps.blocks},
                  {"x_l1", ps.x_l1},
                  {"y_sq", ps.y_sq},
                  {"samples", ps.dataset.samples},
                  {"features", ps.dataset.dim},
                  {"noise_var", ps.dataset.noise_var},
                  {"poison_ratio", ps.dataset.poison_ratio},
                  {"train_frac", ps.dataset.train_frac},
                  {"epsilon", ps.epsilon},
                  {"theta_bound", ps.theta_bound},
                  {"retrain_iters", c.retrain_iters}};
  if (ps.dataset_seed) j["problem"]["dataset_seed"] = *ps.dataset_seed;
  const auto& p = c.practical;
  j["schedule"] = {{"kind", c.schedule_kind},
                   {"alpha_numerator", p.alpha_numerator},
                   {"alpha_offset", p.alpha_offset},
                   {"alpha_sqrt_coeff", p.alpha_sqrt_coeff},
                   {"beta", p.beta},
                   {"eta_numerator", p.eta_numerator},
                   {"eta_power", p.eta_power},
                   {"mu1", p.mu1},
                   {"mu2", p.mu2},
                   {"q1", p.q1},
                   {"q2", p.q2},
                   {"gammas", c.gammas}};
  if (c.schedule_kind == "theoretical") {
    const auto& k = c.theoretical.constants;
    j["schedule"]["rho"] = c.theoretical.rho;
    j["schedule"]["eps"] = c.theoretical.eps;
    j["schedule"]["lipschitz_x"] = k.lipschitz_x;
    j["schedule"]["lipschitz_y"] = k.lipschitz_y;
    j["schedule"]["grad_bound"] = k.grad_bound;
    j["schedule"]["sigma_y"] = k.sigma_y;
    j["schedule"]["objective_max"] = k.objective_max;
    j["schedule"]["objective_min"] = k.objective_min;
  }
  j["baseline"] = {{"alpha", c.baseline_alpha}, {"beta", c.baseline_beta}};
  j["stop"] = {{"max_iters", c.stop.max_iters}, {"gap_check_period", c.stop.gap_check_period}};
  if (c.stop.max_queries) j["stop"]["max_queries"] = *c.stop.max_queries;
  if (c.stop.gap_threshold) j["stop"]["gap_threshold"] = *c.stop.gap_threshold;
  j["diagnostics"] = {{"gap", c.gap_mode}};
  if (c.q_diag) j["diagnostics"]["q_diag"] = *c.q_diag;
  if (c.mu_diag) j["diagnostics"]["mu_diag"] = *c.mu_diag;
  return j;
}

}  // namespace zominmax
