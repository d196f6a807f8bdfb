#include "zominmax/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "zominmax/errors.hpp"
#include "zominmax/estimator.hpp"
#include "zominmax/rng.hpp"

namespace zominmax {

double StationarityGap::gap_x_norm() const {
  double sum = 0.0;
  for (double g : gap_x) sum += g * g;
  return std::sqrt(sum);
}

GapParams GapParams::from_stepsizes(double alpha, double beta, Index blocks) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("GapParams: stepsizes must be positive");
  return GapParams{std::vector<double>(static_cast<std::size_t>(blocks), 1.0 / alpha), beta};
}

SurrogateConfig SurrogateConfig::defaults_for(Index dim, std::uint64_t seed) {
  SurrogateConfig cfg;
  cfg.q_diag = static_cast<std::int64_t>(
      std::ceil(1000.0 * std::max(1.0, static_cast<double>(dim) / 10.0)));
  cfg.mu_diag = 1e-6;
  cfg.seed = seed;
  return cfg;
}

GapOracle GapOracle::surrogate(SurrogateConfig cfg) {
  if (cfg.q_diag < 1) throw ConfigError("GapOracle: surrogate q_diag must be >= 1");
  if (!(cfg.mu_diag > 0.0)) throw ConfigError("GapOracle: surrogate mu_diag must be > 0");
  return GapOracle(cfg);
}

const SurrogateConfig& GapOracle::surrogate_config() const {
  if (!surrogate_) throw ConfigError("GapOracle: analytic oracle has no surrogate config");
  return *surrogate_;
}

namespace {

struct Gradients {
  Vector x;
  Vector y;
};

Gradients gradients_for_gap(const BlockPoint& x, const Vector& y, MinimaxProblem& problem,
                            const GapOracle& oracle, std::uint64_t iteration) {
  if (!oracle.is_surrogate()) {
    if (!problem.has_gradients()) {
      throw ConfigError("gap: analytic gap requested but problem '" + problem.name +
                        "' has no analytic gradients; use a surrogate GapOracle");
    }
    return {problem.grad_x(x.concatenated(), y), problem.grad_y(x.concatenated(), y)};
  }
  const SurrogateConfig& cfg = oracle.surrogate_config();
  const EstimatorConfig est{cfg.mu_diag, cfg.q_diag};
  Gradients g{Vector(x.dim()), Vector()};
  const DirectionSampler x_sampler(x.block_dim(), cfg.seed, Phase::Diagnostics);
  for (Index k = 0; k < x.blocks(); ++k) {
    g.x.segment(k * x.block_dim(), x.block_dim()) =
        estimate_grad_block_phase(problem.objective, x, k, y, est, x_sampler, {iteration, 0},
                                  Phase::Diagnostics)
            .vector;
  }
  const DirectionSampler y_sampler(y.size(), cfg.seed, Phase::Diagnostics);
  const SampleIndex y_at{iteration, static_cast<std::uint32_t>(x.blocks())};
  g.y = estimate_grad_y_phase(problem.objective, x.concatenated(), y, est, y_sampler, y_at,
                              Phase::Diagnostics)
            .vector;
  return g;
}

StationarityGap assemble(const BlockPoint& x, const Vector& y, const MinimaxProblem& problem,
                         const GapParams& params, const Gradients& grad, GapMode mode) {
  if (static_cast<Index>(params.block_coef.size()) != x.blocks()) {
    throw ConfigError("gap: expected " + std::to_string(x.blocks()) + " block coefficients, got " +
                      std::to_string(params.block_coef.size()));
  }
  if (!(params.rho > 0.0)) throw ConfigError("gap: rho must be positive");
  StationarityGap gap;
  gap.mode = mode;
  gap.x_residual.resize(x.dim());
  double sum = 0.0;
  for (Index k = 0; k < x.blocks(); ++k) {
    const double coef = params.block_coef[static_cast<std::size_t>(k)];
    if (!(coef > 0.0)) throw ConfigError("gap: block coefficients must be positive");
    const Index d = x.block_dim();
    const Vector xk = x.block(k);
    const Vector step = xk - grad.x.segment(k * d, d) / coef;
    const Vector row = coef * (xk - prox_block(problem.x_terms[static_cast<std::size_t>(k)],
                                               problem.x_sets[static_cast<std::size_t>(k)], step,
                                               coef));
    gap.x_residual.segment(k * d, d) = row;
    const double n = row.norm();
    gap.gap_x.push_back(n);
    sum += n * n;
  }
  gap.y_residual = (y - prox_y(problem.y_term, problem.y_set, y + params.rho * grad.y, params.rho)) /
                   params.rho;
  gap.gap_y = gap.y_residual.norm();
  sum += gap.gap_y * gap.gap_y;
  gap.total = std::sqrt(sum);
  return gap;
}

}  // namespace

StationarityGap gap_G(const BlockPoint& x, const Vector& y, MinimaxProblem& problem,
                      const GapParams& params, const GapOracle& oracle, std::uint64_t iteration) {
  const Gradients g = gradients_for_gap(x, y, problem, oracle, iteration);
  return assemble(x, y, problem, params, g,
                  oracle.is_surrogate() ? GapMode::SurrogateZo : GapMode::ExactGradient);
}

StationarityGap gap_G_tilde(const BlockPoint& x, const Vector& y, MinimaxProblem& problem,
                            const GapParams& params, double lambda, const GapOracle& oracle,
                            std::uint64_t iteration) {
  Gradients g = gradients_for_gap(x, y, problem, oracle, iteration);
  if (lambda != 0.0) g.y -= lambda * y;
  return assemble(x, y, problem, params, g,
                  oracle.is_surrogate() ? GapMode::SurrogateZo : GapMode::ExactGradient);
}

std::string trace_csv(std::span<const TraceRecord> trace) {
  std::ostringstream os;
  os.precision(17);
  os << kTraceCsvHeader << '\n';
  for (const TraceRecord& r : trace) {
    os << r.iter << ',' << r.queries << ',' << r.f_value << ',' << r.gap_total << ',' << r.gap_x
       << ',' << r.gap_y << ',' << r.wall_ms << '\n';
  }
  return os.str();
}

void write_trace(std::span<const TraceRecord> trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace: cannot open " + path.string());
  out << trace_csv(trace);
  if (!out) throw std::runtime_error("write_trace: write failed for " + path.string());
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  s.count = static_cast<std::int64_t>(values.size());
  if (values.empty()) return s;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(sorted.size());
  if (sorted.size() > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(sorted.size() - 1));
  }
  s.median = quantile_sorted(sorted, 0.5);
  s.q1 = quantile_sorted(sorted, 0.25);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.iqr = s.q3 - s.q1;
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

double median(std::span<const double> values) {
  if (values.empty()) throw ConfigError("median: empty input");
  return summarize(values).median;
}

nlohmann::json to_json(const SummaryStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"std", s.stddev}, {"median", s.median},
          {"q1", s.q1},       {"q3", s.q3},     {"iqr", s.iqr},    {"min", s.min},
          {"max", s.max}};
}

nlohmann::json summary_json(const nlohmann::json& config_echo,
                            std::span<const TrialOutcome> trials) {
  nlohmann::json doc;
  doc["config"] = config_echo;
  nlohmann::json per_trial = nlohmann::json::array();
  std::vector<double> gaps;
  std::vector<double> queries;
  for (const TrialOutcome& t : trials) {
    per_trial.push_back({{"seed", t.seed},
                         {"iterations", t.final_record.iter},
                         {"final_gap", t.final_record.gap_total},
                         {"final_gap_tilde", t.final_record.gap_tilde_total},
                         {"total_queries", t.final_record.queries},
                         {"final_f_value", t.final_record.f_value}});
    gaps.push_back(t.final_record.gap_total);
    queries.push_back(static_cast<double>(t.final_record.queries));
  }
  doc["trials"] = per_trial;
  doc["final_gap"] = to_json(summarize(gaps));
  doc["total_queries"] = to_json(summarize(queries));
  return doc;
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_json: cannot open " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write_json: write failed for " + path.string());
}

double estimate_grad_bound(const MinimaxProblem& problem, int samples, std::uint64_t seed) {
  if (!problem.has_gradients()) {
    throw ConfigError("estimate_grad_bound: problem '" + problem.name + "' has no analytic gradients");
  }
  if (samples < 1) throw ConfigError("estimate_grad_bound: samples must be >= 1");
  CounterRng rng(StreamKey{seed, static_cast<std::uint32_t>(Phase::Diagnostics), 0, 0, 1});
  auto draw = [&](const FeasibleSet& set) {
    const double r = set.max_norm();
    Vector p(set.dim());
    for (Index i = 0; i < p.size(); ++i) p[i] = r * (2.0 * rng.uniform() - 1.0);
    return project(set, p);
  };
  double best = 0.0;
  for (int n = 0; n < samples; ++n) {
    Vector x(problem.blocks() * problem.block_dim());
    for (Index k = 0; k < problem.blocks(); ++k) {
      x.segment(k * problem.block_dim(), problem.block_dim()) = draw(problem.x_sets[static_cast<std::size_t>(k)]);
    }
    const Vector y = draw(problem.y_set);
    best = std::max({best, problem.grad_x(x, y).norm(), problem.grad_y(x, y).norm()});
  }
  return best;
}

}  // namespace zominmax
