#include "irsfl/fl_sim.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "irsfl/rng.hpp"

namespace irsfl {

namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMajorMatrix>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

ConstMatMap device_features(const SyntheticTask& task, int k) {
  return ConstMatMap(task.features[k].data(), task.samples[k], task.dim);
}

ConstVecMap device_targets(const SyntheticTask& task, int k) {
  return ConstVecMap(task.targets[k].data(), task.samples[k]);
}

}  // namespace

std::int64_t SyntheticTask::total_samples() const {
  std::int64_t total = 0;
  for (auto s : samples) total += s;
  return total;
}

SyntheticTask make_synthetic_task(const std::vector<std::int64_t>& samples_per_device,
                                  int dim, double ridge, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("task dimension must be positive");
  SyntheticTask task;
  task.dim = dim;
  task.ridge = ridge;
  task.samples = samples_per_device;

  Rng rng(seed);
  std::vector<double> scales(dim);
  for (int j = 0; j < dim; ++j) {
    scales[j] = 0.5 + 1.0 * static_cast<double>(j) / std::max(1, dim - 1);
  }
  Eigen::VectorXd w_true(dim);
  for (int j = 0; j < dim; ++j) w_true[j] = rng.gaussian();

  for (auto count : samples_per_device) {
    std::vector<double> block(static_cast<std::size_t>(count) * dim);
    std::vector<double> y(count);
    for (std::int64_t i = 0; i < count; ++i) {
      double dot = 0.0;
      for (int j = 0; j < dim; ++j) {
        const double x = scales[j] * rng.gaussian();
        block[static_cast<std::size_t>(i) * dim + j] = x;
        dot += x * w_true[j];
      }
      y[i] = dot + 0.3 * rng.gaussian();
    }
    task.features.push_back(std::move(block));
    task.targets.push_back(std::move(y));
  }

  const int K = static_cast<int>(samples_per_device.size());
  const double D = static_cast<double>(task.total_samples());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(dim);
  for (int k = 0; k < K; ++k) {
    const auto X = device_features(task, k);
    gram.noalias() += X.transpose() * X;
    xty.noalias() += X.transpose() * device_targets(task, k);
  }
  gram += static_cast<double>(K) * ridge * Eigen::MatrixXd::Identity(dim, dim);

  const Eigen::VectorXd w_star = gram.ldlt().solve(xty);
  task.optimum.assign(w_star.data(), w_star.data() + dim);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram / D);
  task.pl_constant = eig.eigenvalues().minCoeff();
  task.smoothness = eig.eigenvalues().maxCoeff();
  task.optimal_loss = global_loss(task, task.optimum);
  return task;
}

double global_loss(const SyntheticTask& task, const std::vector<double>& w) {
  const ConstVecMap wv(w.data(), task.dim);
  double sum = 0.0;
  for (std::size_t k = 0; k < task.features.size(); ++k) {
    const auto X = device_features(task, static_cast<int>(k));
    const Eigen::VectorXd r = X * wv - device_targets(task, static_cast<int>(k));
    sum += 0.5 * r.squaredNorm() + 0.5 * task.ridge * wv.squaredNorm();
  }
  return sum / static_cast<double>(task.total_samples());
}

std::vector<double> device_gradient(const SyntheticTask& task, int device,
                                    const std::vector<double>& w) {
  const ConstVecMap wv(w.data(), task.dim);
  const auto X = device_features(task, device);
  const Eigen::VectorXd r = X * wv - device_targets(task, device);
  const Eigen::VectorXd g =
      (X.transpose() * r + task.ridge * wv) / static_cast<double>(task.samples[device]);
  return {g.data(), g.data() + task.dim};
}

std::vector<double> global_gradient(const SyntheticTask& task,
                                    const std::vector<double>& w) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(task.dim);
  for (std::size_t k = 0; k < task.features.size(); ++k) {
    const auto gk = device_gradient(task, static_cast<int>(k), w);
    total += static_cast<double>(task.samples[k]) * ConstVecMap(gk.data(), task.dim);
  }
  total /= static_cast<double>(task.total_samples());
  return {total.data(), total.data() + task.dim};
}

std::vector<double> local_update(const SyntheticTask& task, int device,
                                 const std::vector<double>& w, double eta) {
  const auto g = device_gradient(task, device, w);
  std::vector<double> next(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) next[j] = w[j] - eta * g[j];
  return next;
}

std::vector<double> aggregate_models(const std::vector<std::vector<double>>& models,
                                     const Schedule& schedule,
                                     const std::vector<std::int64_t>& samples) {
  double weight_sum = 0.0;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (schedule.scheduled(k)) weight_sum += static_cast<double>(samples[k]);
  }
  if (!(weight_sum > 0.0)) {
    throw std::invalid_argument("aggregate_models: empty schedule");
  }
  std::vector<double> out(models.front().size(), 0.0);
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!schedule.scheduled(k)) continue;
    const double w = static_cast<double>(samples[k]) / weight_sum;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += w * models[k][j];
  }
  return out;
}

TrainingTrace run_training(const SyntheticTask& task,
                           const std::vector<Schedule>& schedules, double eta,
                           const std::vector<double>& w0) {
  const int K = static_cast<int>(task.features.size());
  const int dim = task.dim;
  TrainingTrace trace;
  trace.initial_gap = global_loss(task, w0) - task.optimal_loss;

  // Per-sample ||x_i||^2, fixed over the run.
  std::vector<Eigen::VectorXd> feature_norms(K);
  for (int k = 0; k < K; ++k) {
    feature_norms[k] = device_features(task, k).rowwise().squaredNorm();
  }

  std::vector<double> w = w0;
  for (const auto& schedule : schedules) {
    const ConstVecMap wv(w.data(), dim);

    // Certify the sample-gradient bound at this iterate:
    // grad f_i = x_i (x_i^T w - y_i) + (mu / D_k) w.
    for (int k = 0; k < K; ++k) {
      const auto X = device_features(task, k);
      const auto y = device_targets(task, k);
      const Eigen::VectorXd xw = X * wv;
      const Eigen::VectorXd r = xw - y;
      const double reg = task.ridge / static_cast<double>(task.samples[k]);
      const double w_sq = wv.squaredNorm();
      const Eigen::ArrayXd norms = r.array().square() * feature_norms[k].array() +
                                   2.0 * reg * r.array() * xw.array() +
                                   reg * reg * w_sq;
      trace.epsilon_observed = std::max(trace.epsilon_observed, norms.maxCoeff());
    }

    std::vector<std::vector<double>> grads(K);
    for (int k = 0; k < K; ++k) grads[k] = device_gradient(task, k, w);

    // Gradient error caused by the round's scheduling.
    Eigen::VectorXd full = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd part = Eigen::VectorXd::Zero(dim);
    double weight = 0.0;
    for (int k = 0; k < K; ++k) {
      const ConstVecMap g(grads[k].data(), dim);
      full += static_cast<double>(task.samples[k]) * g;
      if (schedule.scheduled(k)) {
        part += static_cast<double>(task.samples[k]) * g;
        weight += static_cast<double>(task.samples[k]);
      }
    }
    full /= static_cast<double>(task.total_samples());
    if (weight > 0.0) part /= weight;
    trace.error_norm_sq.push_back((full - part).squaredNorm());

    std::vector<std::vector<double>> locals(K);
    for (int k = 0; k < K; ++k) {
      if (!schedule.scheduled(k)) continue;
      locals[k].resize(dim);
      for (int j = 0; j < dim; ++j) locals[k][j] = w[j] - eta * grads[k][j];
    }
    w = aggregate_models(locals, schedule, task.samples);

    const double loss = global_loss(task, w);
    trace.loss.push_back(loss);
    trace.gap.push_back(loss - task.optimal_loss);
  }
  return trace;
}

}  // namespace irsfl
