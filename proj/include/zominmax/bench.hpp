#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "zominmax/problem.hpp"

namespace zominmax {

struct DatasetConfig {
  Index samples = 1000;  ///< k
  Index dim = 100;       ///< d
  std::uint64_t seed = 0;
  double noise_var = 1e-3;
  double poison_ratio = 0.1;
  double train_frac = 0.9;

  void validate() const;
};

/// Gaussian features with labels t_i = 1[sigmoid(z_i . theta* + nu_i) > 0.5].
struct SyntheticDataset {
  Eigen::MatrixXd features;  ///< k x d, one sample per row
  std::vector<int> labels;
  Vector theta_star;
  std::vector<Index> train;
  std::vector<Index> test;
  std::vector<Index> poison;  ///< subset of train
  DatasetConfig config;

  Index samples() const { return features.rows(); }
  Index dim() const { return features.cols(); }
  /// Training indices that are not poisoned.
  std::vector<Index> clean_train() const;
};

/// Pure function of the config: same config, bitwise-identical dataset.
SyntheticDataset generate_dataset(const DatasetConfig& cfg);

/// Sigmoid outputs are clamped to [kProbClamp, 1 - kProbClamp] before the log.
inline constexpr double kProbClamp = 1e-12;

/// Mean cross-entropy of sigmoid((z_i + x) . theta) over `subset`; x is added
/// to the features only when `poisoned` is set. Empty subsets contribute 0.
double logistic_loss(const SyntheticDataset& data, const Vector& perturbation, const Vector& theta,
                     std::span<const Index> subset, bool poisoned);

/// Fraction of test samples with 1[sigmoid(z . theta) > 0.5] == label. A tie
/// at exactly 0.5 predicts class 0.
double test_accuracy(const Vector& theta, const SyntheticDataset& data);

/// Training loss F_tr(x, theta) = h(x, theta; D_tr1) + h(0, theta; D_tr2) of
/// the poisoning attack, where D_tr1 is the poisoned subset.
class PoisoningProblem {
 public:
  PoisoningProblem(SyntheticDataset data, double epsilon = 2.0, double theta_bound = 100.0);

  double training_loss(const Vector& x, const Vector& theta) const;
  Vector grad_x(const Vector& x, const Vector& theta) const;
  Vector grad_theta(const Vector& x, const Vector& theta) const;

  const SyntheticDataset& dataset() const { return *data_; }
  double epsilon() const { return epsilon_; }
  double theta_bound() const { return theta_bound_; }

 private:
  struct Split;
  std::shared_ptr<const SyntheticDataset> data_;
  std::shared_ptr<const Split> split_;
  double epsilon_;
  double theta_bound_;
};

/// The attack as a min-max problem for the solvers: x (perturbation, in
/// ||x||_inf <= epsilon) minimizes and theta (in the guard box) maximizes
/// f(x, theta) = -F_tr(x, theta). Minimizing -F_tr over x raises the training
/// loss; maximizing it over theta trains the model.
MinimaxProblem attack_objective(const PoisoningProblem& problem);

/// Same objective with x pinned to `fixed_x` (a degenerate box). Running a
/// first-order solver on it retrains theta against a fixed perturbation.
MinimaxProblem retraining_objective(const PoisoningProblem& problem, const Vector& fixed_x);

struct StationaryPoint {
  Vector x;
  Vector y;
};

/// Analytic validation instance with known stationary points.
struct ToyProblem {
  std::string name;
  Index blocks = 1;
  Index block_dim = 1;
  Index dim_y = 1;
  std::function<double(const Vector&, const Vector&)> f;
  GradientFn grad_x;
  GradientFn grad_y;
  std::vector<FeasibleSet> x_sets;
  FeasibleSet y_set;
  std::vector<StationaryPoint> stationary_points;

  MinimaxProblem make_problem() const;
};

/// Names: saddle (x^2 + 2xy - y^2 on [-1,1]^2), bilinear, quadratic,
/// double-well, block-quadratic. `dim` and `blocks` apply where meaningful.
/// Gradients are checked against central differences at construction.
ToyProblem make_toy(const std::string& name, Index dim = 1, Index blocks = 1);
std::vector<std::string> toy_names();

/// Largest (over `points` random feasible points) of
/// ||grad - central_difference|| / max(1, ||grad||), step 1e-5.
double max_gradient_error(const ToyProblem& toy, int points, std::uint64_t seed);

}  // namespace zominmax
