#pragma once

#include <string>
#include <variant>

#include "zominmax/types.hpp"

namespace zominmax {

struct Box {
  Vector lo;
  Vector hi;
};

struct EuclideanBall {
  Vector center;
  double radius = 1.0;
};

/// Probability simplex {x >= 0, sum x = 1}.
struct Simplex {
  Index dim = 1;
};

/// Stand-in for an unconstrained block: the box [-bound, bound]^dim.
struct FullSpaceWithBoxGuard {
  Index dim = 1;
  double bound = 1e6;
};

/// Closed, convex, nonempty set supporting exact Euclidean projection.
class FeasibleSet {
 public:
  using Variant = std::variant<Box, EuclideanBall, Simplex, FullSpaceWithBoxGuard>;

  static FeasibleSet box(Vector lo, Vector hi);
  static FeasibleSet box(Index dim, double lo, double hi);
  static FeasibleSet ball(Vector center, double radius);
  static FeasibleSet simplex(Index dim);
  static FeasibleSet full_space(Index dim, double bound = 1e6);

  Index dim() const;
  bool contains(const Vector& p, double tol = 0.0) const;
  /// Largest Euclidean norm over the set (sigma_y when used for Y).
  double max_norm() const;
  std::string describe() const;

  const Variant& variant() const { return set_; }

 private:
  explicit FeasibleSet(Variant set) : set_(std::move(set)) {}
  Variant set_;
};

/// h(x) = l1_weight * ||x||_1 + (sq_weight / 2) * ||x||^2. Both weights >= 0;
/// zero() is the indicator-free case where prox reduces to projection.
class ProxTerm {
 public:
  static ProxTerm zero() { return ProxTerm(0.0, 0.0); }
  static ProxTerm l1(double weight);
  static ProxTerm squared_l2(double weight);

  ProxTerm operator+(const ProxTerm& other) const {
    return ProxTerm(l1_ + other.l1_, sq_ + other.sq_);
  }

  double value(const Vector& x) const;
  bool is_zero() const { return l1_ == 0.0 && sq_ == 0.0; }
  double l1_weight() const { return l1_; }
  double sq_weight() const { return sq_; }
  std::string describe() const;

 private:
  ProxTerm(double l1, double sq) : l1_(l1), sq_(sq) {}
  double l1_;
  double sq_;
};

Vector project(const FeasibleSet& set, const Vector& p);

/// argmin_{x in set} h(x) + (coef / 2) ||x - w||^2, coef > 0.
Vector prox_block(const ProxTerm& h, const FeasibleSet& set, const Vector& w, double coef);

/// argmax_{y in set} -g(y) - (1 / (2 rho)) ||y - z||^2, rho > 0.
Vector prox_y(const ProxTerm& g, const FeasibleSet& set, const Vector& z, double rho);

/// Sort-and-threshold projection onto the probability simplex.
Vector project_simplex(const Vector& p);

}  // namespace zominmax
