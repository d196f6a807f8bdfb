#include "zominmax/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zominmax/errors.hpp"
#include "zominmax/rng.hpp"

namespace zominmax {

namespace {

// Stream tags for dataset generation; independent of solver phases.
enum DatasetStream : std::uint32_t {
  kThetaStream = 1000,
  kFeatureStream = 1001,
  kNoiseStream = 1002,
  kSplitStream = 1003,
  kPoisonStream = 1004,
};

void shuffle(std::vector<Index>& v, CounterRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(v[i - 1], v[j]);
  }
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const Index> rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

Vector gather_labels(const std::vector<int>& labels, std::span<const Index> rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[static_cast<Index>(i)] = labels[static_cast<std::size_t>(rows[i])];
  }
  return out;
}

double clamped_sigmoid(double a) {
  const double s = 1.0 / (1.0 + std::exp(-a));
  return std::clamp(s, kProbClamp, 1.0 - kProbClamp);
}

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// Mean cross-entropy for precomputed logits.
double mean_cross_entropy(const Vector& logits, const Vector& labels) {
  if (logits.size() == 0) return 0.0;
  double sum = 0.0;
  for (Index i = 0; i < logits.size(); ++i) {
    const double p = clamped_sigmoid(logits[i]);
    sum += labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
  }
  return -sum / static_cast<double>(logits.size());
}

// d/d(logit) of the mean cross-entropy: (sigmoid - t) / n.
Vector logit_residuals(const Vector& logits, const Vector& labels) {
  Vector r(logits.size());
  const double n = static_cast<double>(logits.size());
  for (Index i = 0; i < logits.size(); ++i) r[i] = (sigmoid(logits[i]) - labels[i]) / n;
  return r;
}

}  // namespace

void DatasetConfig::validate() const {
  if (samples < 1 || dim < 1) throw ConfigError("dataset: samples and dim must be >= 1");
  if (!(noise_var >= 0.0)) throw ConfigError("dataset: noise_var must be >= 0");
  if (!(poison_ratio >= 0.0 && poison_ratio <= 1.0)) {
    throw ConfigError("dataset: poison_ratio must lie in [0, 1]");
  }
  if (!(train_frac > 0.0 && train_frac <= 1.0)) {
    throw ConfigError("dataset: train_frac must lie in (0, 1]");
  }
}

std::vector<Index> SyntheticDataset::clean_train() const {
  std::vector<Index> sorted_poison = poison;
  std::sort(sorted_poison.begin(), sorted_poison.end());
  std::vector<Index> out;
  for (Index i : train) {
    if (!std::binary_search(sorted_poison.begin(), sorted_poison.end(), i)) out.push_back(i);
  }
  return out;
}

SyntheticDataset generate_dataset(const DatasetConfig& cfg) {
  cfg.validate();
  SyntheticDataset data;
  data.config = cfg;
  const Index k = cfg.samples;
  const Index d = cfg.dim;

  CounterRng theta_rng(StreamKey{cfg.seed, kThetaStream, 0, 0, 0});
  data.theta_star.resize(d);
  for (Index j = 0; j < d; ++j) data.theta_star[j] = theta_rng.normal();

  data.features.resize(k, d);
  data.labels.resize(static_cast<std::size_t>(k));
  const double noise_sd = std::sqrt(cfg.noise_var);
  for (Index i = 0; i < k; ++i) {
    CounterRng row_rng(StreamKey{cfg.seed, kFeatureStream, static_cast<std::uint64_t>(i), 0, 0});
    for (Index j = 0; j < d; ++j) data.features(i, j) = row_rng.normal();
    CounterRng noise_rng(StreamKey{cfg.seed, kNoiseStream, static_cast<std::uint64_t>(i), 0, 0});
    const double nu = noise_sd > 0.0 ? noise_sd * noise_rng.normal() : 0.0;
    // sigmoid(a) > 0.5 exactly when a > 0.
    const double logit = data.features.row(i).dot(data.theta_star) + nu;
    data.labels[static_cast<std::size_t>(i)] = logit > 0.0 ? 1 : 0;
  }

  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  CounterRng split_rng(StreamKey{cfg.seed, kSplitStream, 0, 0, 0});
  shuffle(order, split_rng);
  const auto n_train = static_cast<std::size_t>(
      std::clamp<long long>(std::llround(cfg.train_frac * static_cast<double>(k)), 1, k));
  data.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  data.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

  std::vector<Index> train_order = data.train;
  CounterRng poison_rng(StreamKey{cfg.seed, kPoisonStream, 0, 0, 0});
  shuffle(train_order, poison_rng);
  const auto n_poison = static_cast<std::size_t>(
      std::llround(cfg.poison_ratio * static_cast<double>(data.train.size())));
  data.poison.assign(train_order.begin(),
                     train_order.begin() + static_cast<std::ptrdiff_t>(n_poison));
  std::sort(data.poison.begin(), data.poison.end());
  return data;
}

double logistic_loss(const SyntheticDataset& data, const Vector& perturbation, const Vector& theta,
                     std::span<const Index> subset, bool poisoned) {
  if (theta.size() != data.dim() || perturbation.size() != data.dim()) {
    throw ConfigError("logistic_loss: dimension mismatch");
  }
  if (subset.empty()) return 0.0;
  const Eigen::MatrixXd z = gather_rows(data.features, subset);
  Vector logits = z * theta;
  if (poisoned) logits.array() += perturbation.dot(theta);
  return mean_cross_entropy(logits, gather_labels(data.labels, subset));
}

double test_accuracy(const Vector& theta, const SyntheticDataset& data) {
  if (data.test.empty()) throw ConfigError("test_accuracy: empty test split");
  Index correct = 0;
  for (Index i : data.test) {
    const int predicted = data.features.row(i).dot(theta) > 0.0 ? 1 : 0;
    if (predicted == data.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.test.size());
}

struct PoisoningProblem::Split {
  Eigen::MatrixXd poisoned_features;
  Vector poisoned_labels;
  Eigen::MatrixXd clean_features;
  Vector clean_labels;
};

PoisoningProblem::PoisoningProblem(SyntheticDataset data, double epsilon, double theta_bound)
    : data_(std::make_shared<const SyntheticDataset>(std::move(data))),
      epsilon_(epsilon),
      theta_bound_(theta_bound) {
  if (!(epsilon_ >= 0.0)) throw ConfigError("PoisoningProblem: epsilon must be >= 0");
  if (!(theta_bound_ > 0.0)) throw ConfigError("PoisoningProblem: theta_bound must be > 0");
  auto split = std::make_shared<Split>();
  const std::vector<Index> clean = data_->clean_train();
  split->poisoned_features = gather_rows(data_->features, data_->poison);
  split->poisoned_labels = gather_labels(data_->labels, data_->poison);
  split->clean_features = gather_rows(data_->features, clean);
  split->clean_labels = gather_labels(data_->labels, clean);
  split_ = std::move(split);
}

double PoisoningProblem::training_loss(const Vector& x, const Vector& theta) const {
  const Split& s = *split_;
  Vector poisoned_logits = s.poisoned_features * theta;
  poisoned_logits.array() += x.dot(theta);
  return mean_cross_entropy(poisoned_logits, s.poisoned_labels) +
         mean_cross_entropy(s.clean_features * theta, s.clean_labels);
}

Vector PoisoningProblem::grad_x(const Vector& x, const Vector& theta) const {
  const Split& s = *split_;
  if (s.poisoned_labels.size() == 0) return Vector::Zero(theta.size());
  Vector logits = s.poisoned_features * theta;
  logits.array() += x.dot(theta);
  return logit_residuals(logits, s.poisoned_labels).sum() * theta;
}

Vector PoisoningProblem::grad_theta(const Vector& x, const Vector& theta) const {
  const Split& s = *split_;
  Vector g = Vector::Zero(theta.size());
  if (s.poisoned_labels.size() > 0) {
    Vector logits = s.poisoned_features * theta;
    logits.array() += x.dot(theta);
    const Vector r = logit_residuals(logits, s.poisoned_labels);
    g += s.poisoned_features.transpose() * r + r.sum() * x;
  }
  if (s.clean_labels.size() > 0) {
    g += s.clean_features.transpose() * logit_residuals(s.clean_features * theta, s.clean_labels);
  }
  return g;
}

namespace {

MinimaxProblem poisoning_minimax(const PoisoningProblem& problem, FeasibleSet x_set,
                                 std::string name) {
  const Index d = problem.dataset().dim();
  auto shared = std::make_shared<const PoisoningProblem>(problem);
  BlackBoxObjective obj(d, d, [shared](const Vector& x, const Vector& theta) {
    return -shared->training_loss(x, theta);
  });
  return MinimaxProblem::smooth(
      std::move(obj), std::move(x_set), FeasibleSet::full_space(d, problem.theta_bound()),
      [shared](const Vector& x, const Vector& theta) { return Vector(-shared->grad_x(x, theta)); },
      [shared](const Vector& x, const Vector& theta) {
        return Vector(-shared->grad_theta(x, theta));
      },
      std::move(name));
}

}  // namespace

MinimaxProblem attack_objective(const PoisoningProblem& problem) {
  const Index d = problem.dataset().dim();
  return poisoning_minimax(problem, FeasibleSet::box(d, -problem.epsilon(), problem.epsilon()),
                           "poison");
}

MinimaxProblem retraining_objective(const PoisoningProblem& problem, const Vector& fixed_x) {
  return poisoning_minimax(problem, FeasibleSet::box(fixed_x, fixed_x), "poison-retrain");
}

MinimaxProblem ToyProblem::make_problem() const {
  BlackBoxObjective obj(blocks * block_dim, dim_y, f);
  MinimaxProblem p{std::move(obj),
                   x_sets,
                   std::vector<ProxTerm>(static_cast<std::size_t>(blocks), ProxTerm::zero()),
                   y_set,
                   ProxTerm::zero(),
                   grad_x,
                   grad_y,
                   name};
  p.validate();
  return p;
}

std::vector<std::string> toy_names() {
  return {"saddle", "bilinear", "quadratic", "double-well", "block-quadratic"};
}

namespace {

Vector random_point(const FeasibleSet& set, CounterRng& rng) {
  Vector p(set.dim());
  for (Index i = 0; i < p.size(); ++i) p[i] = 2.0 * rng.uniform() - 1.0;
  return project(set, p);
}

Vector central_difference(const std::function<double(const Vector&)>& g, const Vector& at,
                          double h) {
  Vector out(at.size());
  Vector p = at;
  for (Index i = 0; i < at.size(); ++i) {
    p[i] = at[i] + h;
    const double up = g(p);
    p[i] = at[i] - h;
    const double down = g(p);
    p[i] = at[i];
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

}  // namespace

double max_gradient_error(const ToyProblem& toy, int points, std::uint64_t seed) {
  CounterRng rng(seed);
  double worst = 0.0;
  for (int n = 0; n < points; ++n) {
    Vector x(toy.blocks * toy.block_dim);
    for (Index k = 0; k < toy.blocks; ++k) {
      x.segment(k * toy.block_dim, toy.block_dim) =
          random_point(toy.x_sets[static_cast<std::size_t>(k)], rng);
    }
    const Vector y = random_point(toy.y_set, rng);
    const Vector gx = toy.grad_x(x, y);
    const Vector gy = toy.grad_y(x, y);
    const Vector fx = central_difference([&](const Vector& p) { return toy.f(p, y); }, x, 1e-5);
    const Vector fy = central_difference([&](const Vector& p) { return toy.f(x, p); }, y, 1e-5);
    worst = std::max(worst, (gx - fx).norm() / std::max(1.0, gx.norm()));
    worst = std::max(worst, (gy - fy).norm() / std::max(1.0, gy.norm()));
  }
  return worst;
}

ToyProblem make_toy(const std::string& name, Index dim, Index blocks) {
  if (dim < 1 || blocks < 1) throw ConfigError("make_toy: dim and blocks must be >= 1");
  auto box = [](Index d, double r) { return FeasibleSet::box(d, -r, r); };

  ToyProblem toy{name, 1, 1, 1, {}, {}, {}, {}, box(1, 1.0), {}};
  if (name == "saddle") {
    toy.f = [](const Vector& x, const Vector& y) {
      return x[0] * x[0] + 2.0 * x[0] * y[0] - y[0] * y[0];
    };
    toy.grad_x = [](const Vector& x, const Vector& y) {
      return Vector::Constant(1, 2.0 * x[0] + 2.0 * y[0]);
    };
    toy.grad_y = [](const Vector& x, const Vector& y) {
      return Vector::Constant(1, 2.0 * x[0] - 2.0 * y[0]);
    };
    toy.x_sets = {box(1, 1.0)};
  } else if (name == "bilinear") {
    toy.block_dim = toy.dim_y = dim;
    toy.f = [](const Vector& x, const Vector& y) { return x.dot(y); };
    toy.grad_x = [](const Vector&, const Vector& y) { return y; };
    toy.grad_y = [](const Vector& x, const Vector&) { return x; };
    toy.x_sets = {box(dim, 1.0)};
    toy.y_set = box(dim, 1.0);
  } else if (name == "quadratic") {
    // 1/2 |x|^2 + x.y - 1/2 |y|^2
    toy.block_dim = toy.dim_y = dim;
    toy.f = [](const Vector& x, const Vector& y) {
      return 0.5 * x.squaredNorm() + x.dot(y) - 0.5 * y.squaredNorm();
    };
    toy.grad_x = [](const Vector& x, const Vector& y) { return Vector(x + y); };
    toy.grad_y = [](const Vector& x, const Vector& y) { return Vector(x - y); };
    toy.x_sets = {box(dim, 1.0)};
    toy.y_set = box(dim, 1.0);
  } else if (name == "double-well") {
    // sum (x_i^2 - 1)^2 / 4 + x.y - 1/2 |y|^2: nonconvex in x, strongly concave in y.
    toy.block_dim = toy.dim_y = dim;
    toy.f = [](const Vector& x, const Vector& y) {
      const Eigen::ArrayXd w = x.array().square() - 1.0;
      return 0.25 * w.square().sum() + x.dot(y) - 0.5 * y.squaredNorm();
    };
    toy.grad_x = [](const Vector& x, const Vector& y) {
      return Vector(x.array().cube() - x.array() + y.array());
    };
    toy.grad_y = [](const Vector& x, const Vector& y) { return Vector(x - y); };
    toy.x_sets = {box(dim, 2.0)};
    toy.y_set = box(dim, 2.0);
  } else if (name == "block-quadratic") {
    // sum_k 1/2 |x^k|^2 + (1/K) (sum_k x^k).y - 1/2 |y|^2
    toy.blocks = blocks;
    toy.block_dim = toy.dim_y = dim;
    const double inv_k = 1.0 / static_cast<double>(blocks);
    auto block_sum = [dim, blocks](const Vector& x) {
      Vector s = Vector::Zero(dim);
      for (Index k = 0; k < blocks; ++k) s += x.segment(k * dim, dim);
      return s;
    };
    toy.f = [=](const Vector& x, const Vector& y) {
      return 0.5 * x.squaredNorm() + inv_k * block_sum(x).dot(y) - 0.5 * y.squaredNorm();
    };
    toy.grad_x = [=](const Vector& x, const Vector& y) {
      Vector g = x;
      for (Index k = 0; k < blocks; ++k) g.segment(k * dim, dim) += inv_k * y;
      return g;
    };
    toy.grad_y = [=](const Vector& x, const Vector& y) {
      return Vector(inv_k * block_sum(x) - y);
    };
    toy.x_sets.assign(static_cast<std::size_t>(blocks), box(dim, 1.0));
    toy.y_set = box(dim, 1.0);
  } else {
    throw ConfigError("unknown toy problem '" + name +
                      "' (expected saddle, bilinear, quadratic, double-well, block-quadratic)");
  }
  toy.stationary_points = {
      StationaryPoint{Vector::Zero(toy.blocks * toy.block_dim), Vector::Zero(toy.dim_y)}};

  const double err = max_gradient_error(toy, 5, 0x70795eedULL);
  if (!(err < 1e-5)) {
    throw ConfigError("make_toy: analytic gradients of '" + name +
                      "' disagree with finite differences (" + std::to_string(err) + ")");
  }
  return toy;
}

}  // namespace zominmax
