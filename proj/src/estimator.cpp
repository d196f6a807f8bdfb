#include "zominmax/estimator.hpp"

#include <cmath>

#include "zominmax/errors.hpp"

namespace zominmax {

DirectionSampler::DirectionSampler(Index dim, std::uint64_t seed, Phase phase)
    : dim_(dim), seed_(seed), phase_(phase) {
  if (dim_ < 1) throw ConfigError("DirectionSampler: dim must be >= 1");
}

StreamKey DirectionSampler::key(SampleIndex at, std::uint64_t sample) const {
  return StreamKey{seed_, static_cast<std::uint32_t>(phase_), at.iteration, at.block, sample};
}

Vector DirectionSampler::direction(SampleIndex at, std::uint64_t sample) const {
  CounterRng rng(key(at, sample));
  Vector u(dim_);
  double norm2 = 0.0;
  // A zero Gaussian vector has probability zero; redraw rather than divide by it.
  do {
    for (Index i = 0; i < dim_; ++i) u[i] = rng.normal();
    norm2 = u.squaredNorm();
  } while (norm2 == 0.0);
  return u / std::sqrt(norm2);
}

Vector DirectionSampler::ball_point(SampleIndex at, std::uint64_t sample) const {
  CounterRng rng(key(at, sample));
  Vector u(dim_);
  double norm2 = 0.0;
  do {
    for (Index i = 0; i < dim_; ++i) u[i] = rng.normal();
    norm2 = u.squaredNorm();
  } while (norm2 == 0.0);
  const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(dim_));
  return u * (radius / std::sqrt(norm2));
}

void EstimatorConfig::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ConfigError("EstimatorConfig: mu must be positive and finite, got " + std::to_string(mu));
  }
  if (q < 1) throw ConfigError("EstimatorConfig: q must be >= 1, got " + std::to_string(q));
}

namespace {

void check_directions(std::span<const Vector> directions, const EstimatorConfig& cfg, Index dim) {
  if (directions.empty()) return;
  if (static_cast<std::int64_t>(directions.size()) != cfg.q) {
    throw ConfigError("estimator: injected " + std::to_string(directions.size()) +
                      " directions for batch size q=" + std::to_string(cfg.q));
  }
  for (const Vector& u : directions) {
    if (u.size() != dim) throw ConfigError("estimator: injected direction has wrong dimension");
  }
}

// `value_at(u)` returns f at the base point displaced by mu*u along the
// estimated coordinates.
template <class ValueAt>
GradEstimate batched_estimate(Index dim, double base_value, const EstimatorConfig& cfg,
                              const DirectionSampler& sampler, SampleIndex at,
                              std::span<const Vector> directions, ValueAt&& value_at) {
  const double scale = static_cast<double>(dim);
  Vector sum = Vector::Zero(dim);
  for (std::int64_t i = 0; i < cfg.q; ++i) {
    const Vector u = directions.empty() ? sampler.direction(at, static_cast<std::uint64_t>(i))
                                        : directions[static_cast<std::size_t>(i)];
    const double shifted = value_at(u);
    const double coeff = scale * (shifted - base_value) / cfg.mu;
    sum += coeff * u;
  }
  GradEstimate est;
  est.vector = sum / static_cast<double>(cfg.q);
  est.mu_used = cfg.mu;
  est.q_used = cfg.q;
  est.queries_spent = cfg.q + 1;
  return est;
}

}  // namespace

GradEstimate estimate_grad_block_phase(BlackBoxObjective& obj, const BlockPoint& w, Index k,
                                       const Vector& y, const EstimatorConfig& cfg,
                                       const DirectionSampler& sampler, SampleIndex at,
                                       Phase phase, std::span<const Vector> directions) {
  cfg.validate();
  if (k < 0 || k >= w.blocks()) {
    throw ConfigError("estimate_grad_block: block index " + std::to_string(k) +
                      " out of range for K=" + std::to_string(w.blocks()));
  }
  if (directions.empty() && sampler.dim() != w.block_dim()) {
    throw ConfigError("estimate_grad_block: sampler dim does not match block dim");
  }
  check_directions(directions, cfg, w.block_dim());
  at.block = static_cast<std::uint32_t>(k);

  const Vector& base = w.concatenated();
  const double f0 = obj.evaluate(base, y, phase);
  const Index offset = k * w.block_dim();
  Vector shifted = base;
  return batched_estimate(w.block_dim(), f0, cfg, sampler, at, directions, [&](const Vector& u) {
    shifted.segment(offset, w.block_dim()) = base.segment(offset, w.block_dim()) + cfg.mu * u;
    return obj.evaluate(shifted, y, phase);
  });
}

GradEstimate estimate_grad_block(BlackBoxObjective& obj, const BlockPoint& w, Index k,
                                 const Vector& y, const EstimatorConfig& cfg,
                                 const DirectionSampler& sampler, SampleIndex at,
                                 std::span<const Vector> directions) {
  return estimate_grad_block_phase(obj, w, k, y, cfg, sampler, at, Phase::XEstimation,
                                   directions);
}

GradEstimate estimate_grad_x(BlackBoxObjective& obj, const Vector& x, const Vector& y,
                             const EstimatorConfig& cfg, const DirectionSampler& sampler,
                             SampleIndex at, std::span<const Vector> directions) {
  return estimate_grad_block(obj, BlockPoint(x, 1), 0, y, cfg, sampler, at, directions);
}

GradEstimate estimate_grad_y_phase(BlackBoxObjective& obj, const Vector& x, const Vector& y,
                                   const EstimatorConfig& cfg, const DirectionSampler& sampler,
                                   SampleIndex at, Phase phase,
                                   std::span<const Vector> directions) {
  cfg.validate();
  if (directions.empty() && sampler.dim() != y.size()) {
    throw ConfigError("estimate_grad_y: sampler dim does not match d_y");
  }
  check_directions(directions, cfg, y.size());
  const double f0 = obj.evaluate(x, y, phase);
  return batched_estimate(y.size(), f0, cfg, sampler, at, directions, [&](const Vector& v) {
    return obj.evaluate(x, y + cfg.mu * v, phase);
  });
}

GradEstimate estimate_grad_y(BlackBoxObjective& obj, const Vector& x, const Vector& y,
                             const EstimatorConfig& cfg, const DirectionSampler& sampler,
                             SampleIndex at, std::span<const Vector> directions) {
  return estimate_grad_y_phase(obj, x, y, cfg, sampler, at, Phase::YEstimation, directions);
}

SmoothedValue mc_smoothed_value(BlackBoxObjective& obj, const Vector& x, const Vector& y,
                                double mu, std::int64_t n_samples,
                                const DirectionSampler& sampler, SmoothingSide side) {
  if (n_samples < 1) throw ConfigError("mc_smoothed_value: n_samples must be >= 1");
  if (!(mu >= 0.0)) throw ConfigError("mc_smoothed_value: mu must be nonnegative");
  const Index dim = side == SmoothingSide::X ? x.size() : y.size();
  if (sampler.dim() != dim) throw ConfigError("mc_smoothed_value: sampler dim mismatch");

  // Welford accumulation keeps the variance accurate when mu is tiny.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const Vector u = sampler.ball_point({}, static_cast<std::uint64_t>(i));
    const double value = side == SmoothingSide::X
                             ? obj.evaluate(x + mu * u, y, Phase::Diagnostics)
                             : obj.evaluate(x, y + mu * u, Phase::Diagnostics);
    const double delta = value - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (value - mean);
  }
  SmoothedValue out;
  out.mean = mean;
  out.samples = n_samples;
  if (n_samples > 1) {
    const double var = m2 / static_cast<double>(n_samples - 1);
    out.std_error = std::sqrt(var / static_cast<double>(n_samples));
  }
  return out;
}

}  // namespace zominmax
