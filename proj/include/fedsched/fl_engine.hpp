#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fedsched/rng.hpp"

namespace fedsched {

using Model = Eigen::VectorXd;

enum class TaskKind { kRidge, kLogistic };

// Per-sample loss, including the l2 term so that the global loss is exactly
// the sample mean:
//   ridge:    0.5 (x.w - y)^2        + 0.5 reg |w|^2
//   logistic: log(1 + exp(-y x.w))   + 0.5 reg |w|^2,  y in {-1, +1}
struct LearningTask {
  TaskKind kind = TaskKind::kRidge;
  double regularization = 0.01;
};

struct DeviceData {
  Eigen::MatrixXd features;  // one row per sample
  Eigen::VectorXd labels;

  int size() const { return static_cast<int>(labels.size()); }
};

struct Partition {
  std::vector<DeviceData> devices;
  std::vector<double> factors;  // c_n in [1, 10]
  Model ground_truth;

  std::vector<int> sample_counts() const;
};

// round(total * c_n / sum c) with a largest-remainder correction, so that the
// counts sum to total. Every device keeps at least one sample.
std::vector<int> split_counts(std::span<const double> factors, int total);

// Imbalanced IID partition of a synthetic dataset: standard normal features,
// labels from a fixed linear ground truth plus Gaussian noise (thresholded to
// +-1 for the logistic task).
Partition partition_data(Rng& rng, int num_devices, int total_samples, int dim,
                         TaskKind kind, double label_noise);

double sample_loss(const LearningTask& task, const Model& w,
                   const Eigen::Ref<const Eigen::VectorXd>& x, double y);
Model sample_gradient(const LearningTask& task, const Model& w,
                      const Eigen::Ref<const Eigen::VectorXd>& x, double y);

// Device-mean loss and gradient.
double local_loss(const LearningTask& task, const Model& w,
                  const DeviceData& data);
Model local_gradient(const LearningTask& task, const Model& w,
                     const DeviceData& data);

// Sample-weighted mean over all devices.
double global_loss(const LearningTask& task, const Model& w,
                   std::span<const DeviceData> data);
Model global_gradient(const LearningTask& task, const Model& w,
                      std::span<const DeviceData> data);

// One full-batch gradient step on the device's data.
Model local_update(const LearningTask& task, const Model& global,
                   const DeviceData& data, double learning_rate);

// Sample-weighted average of the participating local models; empty when
// nobody participated.
std::optional<Model> aggregate(std::span<const Model> local_models,
                               std::span<const int> samples,
                               const std::vector<bool>& participating);

struct LearnerConstants {
  double lipschitz = 0.0;         // L
  double strong_convexity = 0.0;  // mu
  double rho = 0.0;               // per-sample gradient ratio bound
  double optimal_loss = 0.0;      // F(w*)
  Model optimum;
};

// L, mu, w* and F* for the task. Exact for ridge; for logistic L is the
// standard upper bound lambda_max(H)/4 + reg and mu = reg. rho is left at 0
// and certified from a trajectory with gradient_ratio().
LearnerConstants learner_constants(const LearningTask& task,
                                   std::span<const DeviceData> data);

// max_i |grad l_i(w)|^2 / |grad F(w)|^2 over all samples; 0 when grad F = 0.
double gradient_ratio(const LearningTask& task, const Model& w,
                      std::span<const DeviceData> data);

struct BoundRound {
  double grad_norm_sq = 0.0;        // |grad F(w^(i))|^2
  std::vector<bool> participated;   // selected and holding a sub-channel
};

// Upper bound on F(w^(t+1)) - F* after t rounds, for t = 0..rounds.size():
//   (1 - mu/L)^t D1
//   + (2 rho / L) sum_{i=1..t} (1 - mu/L)^{t-i} |grad F(w^(i))|^2 / sum beta
//                               * sum_n beta_n (1 - participated_n^(i))
std::vector<double> convergence_bound(double initial_gap,
                                      std::span<const BoundRound> rounds,
                                      const LearnerConstants& constants,
                                      std::span<const int> samples);

}  // namespace fedsched
