#pragma once

#include <cstdint>
#include <span>

#include "zominmax/block_point.hpp"
#include "zominmax/oracle.hpp"
#include "zominmax/rng.hpp"

namespace zominmax {

/// Position of a batch inside a run; part of every direction's stream key.
struct SampleIndex {
  std::uint64_t iteration = 0;
  std::uint32_t block = 0;
};

/// Emits random directions for one (seed, phase) pair. Direction i of batch
/// (iteration, block) is a pure function of those five numbers.
class DirectionSampler {
 public:
  DirectionSampler(Index dim, std::uint64_t seed, Phase phase);

  /// Uniform on the unit sphere (normalized Gaussian).
  Vector direction(SampleIndex at, std::uint64_t sample) const;
  /// Uniform in the unit ball.
  Vector ball_point(SampleIndex at, std::uint64_t sample) const;

  Index dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  Phase phase() const { return phase_; }

 private:
  StreamKey key(SampleIndex at, std::uint64_t sample) const;

  Index dim_;
  std::uint64_t seed_;
  Phase phase_;
};

struct EstimatorConfig {
  double mu = 0.005;
  std::int64_t q = 1;

  void validate() const;
};

struct GradEstimate {
  Vector vector;
  double mu_used = 0.0;
  std::int64_t q_used = 0;
  std::int64_t queries_spent = 0;
};

/// (1/q) sum_i d_x [f(x + mu u_i, y) - f(x, y)] / mu * u_i, with f(x, y)
/// evaluated once. Queries are ledgered under Phase::XEstimation. When
/// `directions` is non-empty it must hold exactly q unit vectors and replaces
/// the sampler.
GradEstimate estimate_grad_x(BlackBoxObjective& obj, const Vector& x, const Vector& y,
                             const EstimatorConfig& cfg, const DirectionSampler& sampler,
                             SampleIndex at = {}, std::span<const Vector> directions = {});

/// Mirror of estimate_grad_x over y, ledgered under Phase::YEstimation.
GradEstimate estimate_grad_y(BlackBoxObjective& obj, const Vector& x, const Vector& y,
                             const EstimatorConfig& cfg, const DirectionSampler& sampler,
                             SampleIndex at = {}, std::span<const Vector> directions = {});

/// Estimate of the block-k partial gradient at w (0-based k), perturbing only
/// block k. `at.block` is overridden with k.
GradEstimate estimate_grad_block(BlackBoxObjective& obj, const BlockPoint& w, Index k,
                                 const Vector& y, const EstimatorConfig& cfg,
                                 const DirectionSampler& sampler, SampleIndex at = {},
                                 std::span<const Vector> directions = {});

/// Same as the above but with an explicit ledger phase; the diagnostics
/// surrogate uses this to keep its queries out of the algorithm count.
GradEstimate estimate_grad_block_phase(BlackBoxObjective& obj, const BlockPoint& w, Index k,
                                       const Vector& y, const EstimatorConfig& cfg,
                                       const DirectionSampler& sampler, SampleIndex at,
                                       Phase phase, std::span<const Vector> directions = {});
GradEstimate estimate_grad_y_phase(BlackBoxObjective& obj, const Vector& x, const Vector& y,
                                   const EstimatorConfig& cfg, const DirectionSampler& sampler,
                                   SampleIndex at, Phase phase,
                                   std::span<const Vector> directions = {});

enum class SmoothingSide { X, Y };

struct SmoothedValue {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

/// Monte-Carlo estimate of f_mu(x, y) = E_u f(x + mu u, y), u uniform in the
/// unit ball (or the y-flavour). Queries are ledgered as diagnostics.
SmoothedValue mc_smoothed_value(BlackBoxObjective& obj, const Vector& x, const Vector& y,
                                double mu, std::int64_t n_samples,
                                const DirectionSampler& sampler,
                                SmoothingSide side = SmoothingSide::X);

}  // namespace zominmax
