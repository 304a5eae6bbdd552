#include "fedsched/fl_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedsched {

std::vector<int> Partition::sample_counts() const {
  std::vector<int> counts;
  counts.reserve(devices.size());
  for (const DeviceData& d : devices) counts.push_back(d.size());
  return counts;
}

std::vector<int> split_counts(std::span<const double> factors, int total) {
  const int n = static_cast<int>(factors.size());
  if (n == 0 || total < n) {
    throw std::invalid_argument("split_counts: need total >= number of devices");
  }
  const double sum = std::accumulate(factors.begin(), factors.end(), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(n));
  std::vector<double> remainder(static_cast<std::size_t>(n));
  int assigned = 0;
  for (int i = 0; i < n; ++i) {
    const double share = total * factors[i] / sum;
    counts[i] = static_cast<int>(std::floor(share));
    remainder[i] = share - counts[i];
    assigned += counts[i];
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int i = 0; assigned < total; ++i, ++assigned) ++counts[order[i % n]];

  // Empty devices borrow from the largest one.
  for (int i = 0; i < n; ++i) {
    if (counts[i] == 0) {
      auto largest = std::max_element(counts.begin(), counts.end());
      --*largest;
      counts[i] = 1;
    }
  }
  return counts;
}

Partition partition_data(Rng& rng, int num_devices, int total_samples, int dim,
                         TaskKind kind, double label_noise) {
  Partition part;
  part.factors.resize(static_cast<std::size_t>(num_devices));
  for (double& c : part.factors) c = draw_uniform(rng, 1.0, 10.0);
  const std::vector<int> counts = split_counts(part.factors, total_samples);

  part.ground_truth.resize(dim);
  for (int j = 0; j < dim; ++j) part.ground_truth[j] = draw_normal(rng);

  for (int n = 0; n < num_devices; ++n) {
    DeviceData d;
    d.features.resize(counts[n], dim);
    d.labels.resize(counts[n]);
    for (int i = 0; i < counts[n]; ++i) {
      for (int j = 0; j < dim; ++j) d.features(i, j) = draw_normal(rng);
      const double clean = d.features.row(i).dot(part.ground_truth);
      const double y = clean + label_noise * draw_normal(rng);
      d.labels[i] = kind == TaskKind::kRidge ? y : (y >= 0.0 ? 1.0 : -1.0);
    }
    part.devices.push_back(std::move(d));
  }
  return part;
}

namespace {

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) {
  return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

int total_samples(std::span<const DeviceData> data) {
  int total = 0;
  for (const DeviceData& d : data) total += d.size();
  return total;
}

}  // namespace

double sample_loss(const LearningTask& task, const Model& w,
                   const Eigen::Ref<const Eigen::VectorXd>& x, double y) {
  const double reg = 0.5 * task.regularization * w.squaredNorm();
  const double z = x.dot(w);
  if (task.kind == TaskKind::kRidge) {
    const double r = z - y;
    return 0.5 * r * r + reg;
  }
  return softplus_neg(y * z) + reg;
}

Model sample_gradient(const LearningTask& task, const Model& w,
                      const Eigen::Ref<const Eigen::VectorXd>& x, double y) {
  const double z = x.dot(w);
  const double scale =
      task.kind == TaskKind::kRidge ? z - y : -y * sigmoid(-y * z);
  return scale * x + task.regularization * w;
}

double local_loss(const LearningTask& task, const Model& w,
                  const DeviceData& data) {
  const Eigen::VectorXd z = data.features * w;
  double sum = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const double y = data.labels[i];
    if (task.kind == TaskKind::kRidge) {
      const double r = z[i] - y;
      sum += 0.5 * r * r;
    } else {
      sum += softplus_neg(y * z[i]);
    }
  }
  return sum / data.size() + 0.5 * task.regularization * w.squaredNorm();
}

Model local_gradient(const LearningTask& task, const Model& w,
                     const DeviceData& data) {
  const Eigen::VectorXd z = data.features * w;
  Eigen::VectorXd scale(data.size());
  for (int i = 0; i < data.size(); ++i) {
    const double y = data.labels[i];
    scale[i] = task.kind == TaskKind::kRidge ? z[i] - y
                                             : -y * sigmoid(-y * z[i]);
  }
  return data.features.transpose() * scale / data.size() +
         task.regularization * w;
}

double global_loss(const LearningTask& task, const Model& w,
                   std::span<const DeviceData> data) {
  double sum = 0.0;
  for (const DeviceData& d : data) sum += d.size() * local_loss(task, w, d);
  return sum / total_samples(data);
}

Model global_gradient(const LearningTask& task, const Model& w,
                      std::span<const DeviceData> data) {
  Model g = Model::Zero(w.size());
  for (const DeviceData& d : data) g += d.size() * local_gradient(task, w, d);
  return g / total_samples(data);
}

Model local_update(const LearningTask& task, const Model& global,
                   const DeviceData& data, double learning_rate) {
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("local_update: learning rate must be positive");
  }
  return global - learning_rate * local_gradient(task, global, data);
}

std::optional<Model> aggregate(std::span<const Model> local_models,
                               std::span<const int> samples,
                               const std::vector<bool>& participating) {
  if (local_models.size() != samples.size() ||
      participating.size() != samples.size()) {
    throw std::invalid_argument("aggregate: length mismatch");
  }
  std::optional<Model> sum;
  double weight = 0.0;
  for (std::size_t n = 0; n < local_models.size(); ++n) {
    if (!participating[n]) continue;
    if (!sum) sum = Model::Zero(local_models[n].size());
    *sum += samples[n] * local_models[n];
    weight += samples[n];
  }
  if (sum) *sum /= weight;
  return sum;
}

LearnerConstants learner_constants(const LearningTask& task,
                                   std::span<const DeviceData> data) {
  if (data.empty()) throw std::invalid_argument("learner_constants: no data");
  const int dim = static_cast<int>(data.front().features.cols());
  const int total = total_samples(data);

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd moment = Eigen::VectorXd::Zero(dim);
  for (const DeviceData& d : data) {
    gram += d.features.transpose() * d.features;
    moment += d.features.transpose() * d.labels;
  }
  gram /= total;
  moment /= total;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);

  LearnerConstants c;
  if (task.kind == TaskKind::kRidge) {
    c.lipschitz = hi + task.regularization;
    c.strong_convexity = lo + task.regularization;
    c.optimum = (gram + task.regularization * id).ldlt().solve(moment);
  } else {
    c.lipschitz = 0.25 * hi + task.regularization;
    c.strong_convexity = task.regularization;
    // Damped Newton from the origin; the objective is strongly convex.
    Model w = Model::Zero(dim);
    for (int it = 0; it < 100; ++it) {
      Eigen::MatrixXd hess = task.regularization * id;
      for (const DeviceData& d : data) {
        const Eigen::VectorXd z = d.features * w;
        for (int i = 0; i < d.size(); ++i) {
          const double s = sigmoid(z[i]);
          hess += (s * (1.0 - s) / total) *
                  d.features.row(i).transpose() * d.features.row(i);
        }
      }
      const Model grad = global_gradient(task, w, data);
      const Model step = hess.ldlt().solve(grad);
      double t = 1.0;
      const double f0 = global_loss(task, w, data);
      while (t > 1e-12 &&
             global_loss(task, w - t * step, data) > f0 - 0.25 * t * grad.dot(step)) {
        t *= 0.5;
      }
      w -= t * step;
      if (grad.norm() < 1e-14) break;
    }
    c.optimum = w;
  }
  c.optimal_loss = global_loss(task, c.optimum, data);
  return c;
}

double gradient_ratio(const LearningTask& task, const Model& w,
                      std::span<const DeviceData> data) {
  const double full = global_gradient(task, w, data).squaredNorm();
  if (!(full > 0.0)) return 0.0;
  double worst = 0.0;
  for (const DeviceData& d : data) {
    for (int i = 0; i < d.size(); ++i) {
      const double g =
          sample_gradient(task, w, d.features.row(i).transpose(), d.labels[i])
              .squaredNorm();
      worst = std::max(worst, g);
    }
  }
  return worst / full;
}

std::vector<double> convergence_bound(double initial_gap,
                                      std::span<const BoundRound> rounds,
                                      const LearnerConstants& constants,
                                      std::span<const int> samples) {
  const double contraction =
      1.0 - constants.strong_convexity / constants.lipschitz;
  const double total = std::accumulate(samples.begin(), samples.end(), 0.0);

  // Per-round penalty (2 rho / L) |grad F|^2 / sum beta * sum missing beta.
  std::vector<double> penalty;
  penalty.reserve(rounds.size());
  for (const BoundRound& r : rounds) {
    double missing = 0.0;
    for (std::size_t n = 0; n < samples.size(); ++n) {
      if (!r.participated[n]) missing += samples[n];
    }
    penalty.push_back(missing == 0.0
                          ? 0.0
                          : 2.0 * constants.rho / constants.lipschitz *
                                r.grad_norm_sq / total * missing);
  }

  std::vector<double> bound;
  bound.reserve(rounds.size() + 1);
  for (std::size_t t = 0; t <= rounds.size(); ++t) {
    double value = std::pow(contraction, static_cast<double>(t)) * initial_gap;
    for (std::size_t i = 1; i <= t; ++i) {
      value += std::pow(contraction, static_cast<double>(t - i)) * penalty[i - 1];
    }
    bound.push_back(value);
  }
  return bound;
}

}  // namespace fedsched
