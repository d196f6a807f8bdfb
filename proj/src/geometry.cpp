#include "zominmax/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "zominmax/errors.hpp"

namespace zominmax {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_dim(const FeasibleSet& set, const Vector& p, const char* who) {
  if (p.size() != set.dim()) {
    throw ConfigError(std::string(who) + ": point has dimension " + std::to_string(p.size()) +
                      ", set " + set.describe() + " has dimension " + std::to_string(set.dim()));
  }
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

Vector project_ball(const EuclideanBall& b, const Vector& p) {
  const Vector diff = p - b.center;
  const double norm = diff.norm();
  // Slack of a few ulps keeps projected points fixed under re-projection.
  if (norm <= b.radius * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) return p;
  return b.center + diff * (b.radius / norm);
}

Vector clamp(const Vector& p, const Vector& lo, const Vector& hi) {
  return p.cwiseMax(lo).cwiseMin(hi);
}

// Separable minimizer of a|x| + (b/2)x^2 + (c/2)(x - w)^2, coordinatewise.
Vector separable_prox(const ProxTerm& h, const Vector& w, double coef) {
  Vector out(w.size());
  const double a = h.l1_weight();
  const double b = h.sq_weight();
  for (Index i = 0; i < w.size(); ++i) {
    if (b == 0.0) {
      out[i] = soft_threshold(w[i], a / coef);
    } else {
      out[i] = soft_threshold(coef * w[i], a) / (b + coef);
    }
  }
  return out;
}

// Ball constraint with an l1 term: the KKT multiplier nu >= 0 of the ball
// constraint enters as an extra quadratic pulling toward the center, which
// stays separable; ||x(nu) - center|| is nonincreasing in nu, so bisect.
Vector prox_ball_l1(const ProxTerm& h, const EuclideanBall& ball, const Vector& w, double coef) {
  const double a = h.l1_weight();
  const double b = h.sq_weight();
  auto point_at = [&](double nu) {
    Vector x(w.size());
    for (Index i = 0; i < w.size(); ++i) {
      x[i] = soft_threshold(coef * w[i] + nu * ball.center[i], a) / (b + coef + nu);
    }
    return x;
  };
  auto outside = [&](double nu) { return (point_at(nu) - ball.center).norm() > ball.radius; };

  if (!outside(0.0)) return point_at(0.0);
  double lo = 0.0;
  double hi = std::max(1.0, coef + b);
  while (outside(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) break;
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (outside(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return project_ball(ball, point_at(hi));
}

}  // namespace

FeasibleSet FeasibleSet::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size() || lo.size() < 1) {
    throw ConfigError("Box: lo and hi must have the same positive dimension");
  }
  if (!all_finite(lo) || !all_finite(hi)) throw ConfigError("Box: bounds must be finite");
  for (Index i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) {
      throw ConfigError("Box: lo[" + std::to_string(i) + "] > hi[" + std::to_string(i) + "]");
    }
  }
  return FeasibleSet(Box{std::move(lo), std::move(hi)});
}

FeasibleSet FeasibleSet::box(Index dim, double lo, double hi) {
  return box(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
}

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
  if (center.size() < 1) throw ConfigError("EuclideanBall: dimension must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ConfigError("EuclideanBall: radius must be positive and finite");
  }
  return FeasibleSet(EuclideanBall{std::move(center), radius});
}

FeasibleSet FeasibleSet::simplex(Index dim) {
  if (dim < 1) throw ConfigError("Simplex: dimension must be positive");
  return FeasibleSet(Simplex{dim});
}

FeasibleSet FeasibleSet::full_space(Index dim, double bound) {
  if (dim < 1) throw ConfigError("FullSpaceWithBoxGuard: dimension must be positive");
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw ConfigError("FullSpaceWithBoxGuard: bound must be positive and finite");
  }
  return FeasibleSet(FullSpaceWithBoxGuard{dim, bound});
}

Index FeasibleSet::dim() const {
  return std::visit(Overloaded{[](const Box& b) { return b.lo.size(); },
                               [](const EuclideanBall& b) { return b.center.size(); },
                               [](const Simplex& s) { return s.dim; },
                               [](const FullSpaceWithBoxGuard& g) { return g.dim; }},
                    set_);
}

bool FeasibleSet::contains(const Vector& p, double tol) const {
  if (p.size() != dim()) return false;
  return std::visit(
      Overloaded{[&](const Box& b) {
                   return ((p - b.lo).array() >= -tol).all() && ((b.hi - p).array() >= -tol).all();
                 },
                 [&](const EuclideanBall& b) { return (p - b.center).norm() <= b.radius + tol; },
                 [&](const Simplex&) {
                   return (p.array() >= -tol).all() && std::abs(p.sum() - 1.0) <= tol + 1e-12;
                 },
                 [&](const FullSpaceWithBoxGuard& g) {
                   return (p.array().abs() <= g.bound + tol).all();
                 }},
      set_);
}

double FeasibleSet::max_norm() const {
  return std::visit(
      Overloaded{[](const Box& b) { return b.lo.cwiseAbs().cwiseMax(b.hi.cwiseAbs()).norm(); },
                 [](const EuclideanBall& b) { return b.center.norm() + b.radius; },
                 [](const Simplex&) { return 1.0; },
                 [](const FullSpaceWithBoxGuard& g) {
                   return g.bound * std::sqrt(static_cast<double>(g.dim));
                 }},
      set_);
}

std::string FeasibleSet::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{[&](const Box& b) { os << "Box(dim=" << b.lo.size() << ")"; },
                        [&](const EuclideanBall& b) {
                          os << "Ball(dim=" << b.center.size() << ", r=" << b.radius << ")";
                        },
                        [&](const Simplex& s) { os << "Simplex(dim=" << s.dim << ")"; },
                        [&](const FullSpaceWithBoxGuard& g) {
                          os << "FullSpace(dim=" << g.dim << ", guard=" << g.bound << ")";
                        }},
             set_);
  return os.str();
}

ProxTerm ProxTerm::l1(double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw ConfigError("L1 weight must be >= 0");
  return ProxTerm(weight, 0.0);
}

ProxTerm ProxTerm::squared_l2(double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw ConfigError("SquaredL2 weight must be >= 0");
  }
  return ProxTerm(0.0, weight);
}

double ProxTerm::value(const Vector& x) const {
  double v = 0.0;
  if (l1_ != 0.0) v += l1_ * x.lpNorm<1>();
  if (sq_ != 0.0) v += 0.5 * sq_ * x.squaredNorm();
  return v;
}

std::string ProxTerm::describe() const {
  if (is_zero()) return "Zero";
  std::ostringstream os;
  if (l1_ != 0.0) os << "L1(" << l1_ << ")";
  if (l1_ != 0.0 && sq_ != 0.0) os << "+";
  if (sq_ != 0.0) os << "SquaredL2(" << sq_ << ")";
  return os.str();
}

Vector project_simplex(const Vector& p) {
  const Index n = p.size();
  if ((p.array() >= 0.0).all() &&
      std::abs(p.sum() - 1.0) <= 4.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon()) {
    return p;
  }
  std::vector<double> sorted(p.data(), p.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumulative += sorted[static_cast<std::size_t>(j)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) threshold = candidate;
  }
  return (p.array() - threshold).cwiseMax(0.0).matrix();
}

Vector project(const FeasibleSet& set, const Vector& p) {
  check_dim(set, p, "project");
  return std::visit(Overloaded{[&](const Box& b) { return clamp(p, b.lo, b.hi); },
                               [&](const EuclideanBall& b) { return project_ball(b, p); },
                               [&](const Simplex&) { return project_simplex(p); },
                               [&](const FullSpaceWithBoxGuard& g) {
                                 return Vector(p.cwiseMax(-g.bound).cwiseMin(g.bound));
                               }},
                    set.variant());
}

Vector prox_block(const ProxTerm& h, const FeasibleSet& set, const Vector& w, double coef) {
  if (!(coef > 0.0) || !std::isfinite(coef)) {
    throw ConfigError("prox_block: coefficient must be positive, got " + std::to_string(coef));
  }
  check_dim(set, w, "prox_block");
  if (h.is_zero()) return project(set, w);

  return std::visit(
      Overloaded{
          [&](const Box& b) { return clamp(separable_prox(h, w, coef), b.lo, b.hi); },
          [&](const FullSpaceWithBoxGuard& g) {
            return Vector(separable_prox(h, w, coef).cwiseMax(-g.bound).cwiseMin(g.bound));
          },
          [&](const Simplex&) {
            // ||x||_1 == 1 on the simplex, so only the quadratic part matters.
            return project_simplex(coef * w / (h.sq_weight() + coef));
          },
          [&](const EuclideanBall& b) {
            if (h.l1_weight() == 0.0) return project_ball(b, coef * w / (h.sq_weight() + coef));
            return prox_ball_l1(h, b, w, coef);
          }},
      set.variant());
}

Vector prox_y(const ProxTerm& g, const FeasibleSet& set, const Vector& z, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ConfigError("prox_y: rho must be positive, got " + std::to_string(rho));
  }
  check_dim(set, z, "prox_y");
  if (g.is_zero()) return project(set, z);
  return prox_block(g, set, z, 1.0 / rho);
}

}  // namespace zominmax
