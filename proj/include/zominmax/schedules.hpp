#pragma once

#include <cstdint>
#include <utility>

namespace zominmax {

/// Problem constants entering the theoretical parameter schedule.
struct ProblemConstants {
  double lipschitz_x = 1.0;  ///< L_x, max over blocks
  double lipschitz_y = 1.0;  ///< L_y
  double grad_bound = 1.0;   ///< eta: sup of ||grad_x f|| and ||grad_y f||
  double sigma_y = 1.0;      ///< max ||y|| over Y
  int blocks = 1;            ///< K
  std::int64_t dim_x = 1;    ///< per-block dimension
  std::int64_t dim_y = 1;
  double gamma_max = 0.0;
  double gamma_min = 0.0;
  double objective_max = 0.0;  ///< upper bound of l
  double objective_min = 0.0;  ///< lower bound of l

  void validate() const;
};

struct DerivedConstants {
  double theta = 0.0;
  double s = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c = 0.0;
  /// The two expressions whose max is s besides theta; they coincide
  /// algebraically and are kept for cross-checking.
  double s_closed_form = 0.0;
  double s_from_m1 = 0.0;
};

/// Throws ConfigError when rho exceeds 1 / (10 L_y).
DerivedConstants derived_constants(const ProblemConstants& consts, double rho);

/// The convergence-theory schedule for the block proximal method:
/// lambda_t = 9 / (20 rho t^{1/4}) and the matching tau_t, smoothing radii
/// and direction batch sizes for a target accuracy eps in (0, 1).
class TheoreticalSchedule {
 public:
  TheoreticalSchedule(ProblemConstants consts, double rho, double eps_target);

  double lambda(std::int64_t t) const;
  /// tau_t itself (the block coefficient is tau_t + gamma_k).
  double tau(std::int64_t t) const;
  double tau_plus_gamma_min(std::int64_t t) const { return tau(t) + consts_.gamma_min; }

  std::pair<double, double> mu(std::int64_t t) const;
  /// Real-valued batch sizes before rounding.
  std::pair<double, double> q_unrounded(std::int64_t t) const;
  std::pair<std::int64_t, std::int64_t> q(std::int64_t t) const;

  double rho() const { return rho_; }
  double eps_target() const { return eps_; }
  const ProblemConstants& constants() const { return consts_; }
  const DerivedConstants& derived() const { return derived_; }

 private:
  ProblemConstants consts_;
  double rho_;
  double eps_;
  DerivedConstants derived_;
};

inline double lambda_t(const TheoreticalSchedule& sched, std::int64_t t) { return sched.lambda(t); }
inline double tau_t(const TheoreticalSchedule& sched, std::int64_t t) { return sched.tau(t); }

/// Closed forms obtained with rho = 1 / (10 L_y).
double closed_form_lambda(double lipschitz_y, std::int64_t t);
double closed_form_tau_plus_gamma(double lipschitz_x, double lipschitz_y, std::int64_t t);

/// Hand-tuned schedule used in experiments:
///   alpha_t = alpha_numerator / (alpha_offset + alpha_sqrt_coeff * sqrt(t))
///   eta_t   = eta_numerator / t^{eta_power}
/// Defaults are the values used for the poisoning benchmark. A constant
/// stepsize a is alpha_numerator = a, alpha_offset = 1, alpha_sqrt_coeff = 0.
struct PracticalSchedule {
  double alpha_numerator = 5.0;
  double alpha_offset = 100.0;
  double alpha_sqrt_coeff = 1.0;
  double beta = 0.02;
  double eta_numerator = 0.1;
  double eta_power = 0.25;
  double mu1 = 0.005;
  double mu2 = 0.005;
  std::int64_t q1 = 20;
  std::int64_t q2 = 20;

  void validate() const;
  static PracticalSchedule constant(double alpha, double beta, double mu, std::int64_t q);
};

struct PracticalParams {
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  std::int64_t q1 = 1;
  std::int64_t q2 = 1;
};

PracticalParams practical_params(const PracticalSchedule& sched, std::int64_t t);

}  // namespace zominmax
