#include "zominmax/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zominmax/errors.hpp"

namespace zominmax {

namespace {

double quarter_root(std::int64_t t) { return std::sqrt(std::sqrt(static_cast<double>(t))); }

void check_iteration(std::int64_t t) {
  if (t < 1) throw ConfigError("schedule: iteration index must be >= 1, got " + std::to_string(t));
}

std::int64_t round_up_batch(double q, const char* which) {
  if (!std::isfinite(q) || q > 9.0e18) {
    throw ConfigError(std::string("schedule: batch size ") + which + " overflows (" +
                      std::to_string(q) + ")");
  }
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(q)));
}

}  // namespace

void ProblemConstants::validate() const {
  if (!(lipschitz_x > 0.0) || !(lipschitz_y > 0.0)) {
    throw ConfigError("ProblemConstants: lipschitz_x and lipschitz_y must be positive");
  }
  if (!(grad_bound >= 0.0) || !(sigma_y >= 0.0) || !std::isfinite(sigma_y)) {
    throw ConfigError("ProblemConstants: grad_bound and sigma_y must be finite and >= 0");
  }
  if (blocks < 1 || dim_x < 1 || dim_y < 1) {
    throw ConfigError("ProblemConstants: blocks, dim_x and dim_y must be >= 1");
  }
  if (!(gamma_min >= 0.0) || gamma_max < gamma_min) {
    throw ConfigError("ProblemConstants: need 0 <= gamma_min <= gamma_max");
  }
  if (objective_max < objective_min) {
    throw ConfigError("ProblemConstants: objective_max must be >= objective_min");
  }
}

DerivedConstants derived_constants(const ProblemConstants& k, double rho) {
  k.validate();
  const double bound = 1.0 / (10.0 * k.lipschitz_y);
  if (!(rho > 0.0) || rho > bound) {
    throw ConfigError("derived_constants: rho=" + std::to_string(rho) +
                      " must lie in (0, 1/(10 L_y)] = (0, " + std::to_string(bound) + "]");
  }
  const double lx = k.lipschitz_x;
  const double ly = k.lipschitz_y;
  const double ly2 = ly * ly;
  const double kk = static_cast<double>(k.blocks);

  DerivedConstants d;
  const double shift = lx / 2.0 + 3.0 * rho * ly2 / 2.0 - k.gamma_min + k.gamma_max;
  const double denom = 384.0 * 400.0 * rho * ly2;
  d.theta = 32.0 + std::pow(9.0, 4) * (8.0 * shift * shift + 4.0 * kk * lx * lx + 9.0 * ly2) /
                       (denom * denom);

  d.s_closed_form = 27.0 * 27.0 / (448.0 * 400.0 * rho * rho * ly2);
  const double lambda1 = 9.0 / (20.0 * rho);
  const double m1 = 384.0 * ly2 / (rho * lambda1 * lambda1);
  d.s_from_m1 = 54.0 / (7.0 * rho * m1);
  d.s = std::max({d.theta, d.s_closed_form, d.s_from_m1});

  d.c1 = 27.0 / (128.0 * 400.0 * rho * ly2);
  d.c2 = std::max(7.0 * rho / 54.0, d.c1 / d.theta);
  d.c3 = 27.0 / (256.0 * 400.0 * rho * ly2);
  d.c = k.objective_max - k.objective_min + 196.0 / rho * k.sigma_y * k.sigma_y;
  return d;
}

TheoreticalSchedule::TheoreticalSchedule(ProblemConstants consts, double rho, double eps_target)
    : consts_(consts), rho_(rho), eps_(eps_target), derived_(derived_constants(consts, rho)) {
  if (!(eps_ > 0.0) || !(eps_ < 1.0)) {
    throw ConfigError("TheoreticalSchedule: eps_target must lie in (0, 1), got " +
                      std::to_string(eps_));
  }
}

double TheoreticalSchedule::lambda(std::int64_t t) const {
  check_iteration(t);
  return 9.0 / (20.0 * rho_ * quarter_root(t));
}

double TheoreticalSchedule::tau(std::int64_t t) const {
  const double lam = lambda(t);
  const double ly2 = consts_.lipschitz_y * consts_.lipschitz_y;
  return consts_.lipschitz_x / 2.0 + 768.0 / (rho_ * lam * lam) * ly2 + 3.0 * rho_ * ly2 / 2.0 -
         consts_.gamma_min;
}

std::pair<double, double> TheoreticalSchedule::mu(std::int64_t t) const {
  check_iteration(t);
  const auto& d = derived_;
  const double lx = consts_.lipschitz_x;
  const double ly = consts_.lipschitz_y;
  const double dx = static_cast<double>(consts_.dim_x);
  const double dy = static_cast<double>(consts_.dim_y);
  const double kk = static_cast<double>(consts_.blocks);

  const double mu1 = eps_ / quarter_root(t) *
                     std::sqrt(d.c1 / (448.0 * d.s * kk * std::max(lx, lx * lx * dx * dx * d.c2)));
  const double mu2 =
      eps_ / (ly * dy * std::sqrt(static_cast<double>(t + 1))) *
      std::sqrt(d.c1 / (448.0 * d.s * std::max(5120.0 / (81.0 * ly), 9.0 / 4.0 * d.c2)));
  return {mu1, mu2};
}

std::pair<double, double> TheoreticalSchedule::q_unrounded(std::int64_t t) const {
  const auto [mu1, mu2] = mu(t);
  const auto& d = derived_;
  const double lx = consts_.lipschitz_x;
  const double ly = consts_.lipschitz_y;
  const double dx = static_cast<double>(consts_.dim_x);
  const double dy = static_cast<double>(consts_.dim_y);
  const double kk = static_cast<double>(consts_.blocks);
  const double eta2 = consts_.grad_bound * consts_.grad_bound;
  const double eps2 = eps_ * eps_;

  const double q1 = 224.0 * d.s * kk * (4.0 * dx * eta2 + mu1 * mu1 * lx * lx * dx * dx) *
                    std::max(d.c3, 4.0 * d.c2) * std::sqrt(static_cast<double>(t)) / (eps2 * d.c1);
  const double q2 = 224.0 * d.s * (4.0 * dy * eta2 + mu2 * mu2 * ly * ly * dy * dy) *
                    std::max(5120.0 / (9.0 * ly), 9.0 * d.c2) * static_cast<double>(t + 1) /
                    (eps2 * d.c1);
  return {q1, q2};
}

std::pair<std::int64_t, std::int64_t> TheoreticalSchedule::q(std::int64_t t) const {
  const auto [q1, q2] = q_unrounded(t);
  return {round_up_batch(q1, "q1"), round_up_batch(q2, "q2")};
}

double closed_form_lambda(double lipschitz_y, std::int64_t t) {
  check_iteration(t);
  return 9.0 * lipschitz_y / (2.0 * quarter_root(t));
}

double closed_form_tau_plus_gamma(double lipschitz_x, double lipschitz_y, std::int64_t t) {
  check_iteration(t);
  return lipschitz_x / 2.0 + 10240.0 * lipschitz_y / 27.0 * std::sqrt(static_cast<double>(t)) +
         3.0 * lipschitz_y / 20.0;
}

void PracticalSchedule::validate() const {
  if (!(alpha_numerator > 0.0) || alpha_offset < 0.0 || alpha_sqrt_coeff < 0.0 ||
      !(alpha_offset + alpha_sqrt_coeff > 0.0)) {
    throw ConfigError(
        "PracticalSchedule: need alpha_numerator > 0, alpha_offset >= 0, alpha_sqrt_coeff >= 0 "
        "and a positive denominator");
  }
  if (!(beta > 0.0)) throw ConfigError("PracticalSchedule: beta must be positive");
  if (eta_numerator < 0.0 || eta_power < 0.0) {
    throw ConfigError("PracticalSchedule: eta_numerator and eta_power must be >= 0");
  }
  if (!(mu1 > 0.0) || !(mu2 > 0.0)) throw ConfigError("PracticalSchedule: mu1, mu2 must be > 0");
  if (q1 < 1 || q2 < 1) throw ConfigError("PracticalSchedule: q1, q2 must be >= 1");
}

PracticalSchedule PracticalSchedule::constant(double alpha, double beta, double mu,
                                              std::int64_t q) {
  PracticalSchedule p;
  p.alpha_numerator = alpha;
  p.alpha_offset = 1.0;
  p.alpha_sqrt_coeff = 0.0;
  p.beta = beta;
  p.eta_numerator = 0.0;
  p.mu1 = p.mu2 = mu;
  p.q1 = p.q2 = q;
  return p;
}

PracticalParams practical_params(const PracticalSchedule& p, std::int64_t t) {
  check_iteration(t);
  const double td = static_cast<double>(t);
  PracticalParams out;
  out.alpha = p.alpha_numerator / (p.alpha_offset + p.alpha_sqrt_coeff * std::sqrt(td));
  out.beta = p.beta;
  out.eta = p.eta_power == 0.25 ? p.eta_numerator / quarter_root(t)
                                : p.eta_numerator / std::pow(td, p.eta_power);
  out.mu1 = p.mu1;
  out.mu2 = p.mu2;
  out.q1 = p.q1;
  out.q2 = p.q2;
  return out;
}

}  // namespace zominmax
