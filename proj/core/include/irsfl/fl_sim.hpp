#ifndef IRSFL_FL_SIM_HPP_
#define IRSFL_FL_SIM_HPP_

#include <cstdint>
#include <vector>

#include "irsfl/system.hpp"

namespace irsfl {

/// Synthetic regularized least-squares task with a closed-form global
/// optimum. Smoothness and PL constants come from the exact spectrum of
/// the global Hessian, so the optimality-gap bound can be checked without
/// slack.
struct SyntheticTask {
  int dim = 0;
  double ridge = 1e-3;  // per-device l2 weight mu
  // Row-major D_k x dim feature blocks and targets, one block per device.
  std::vector<std::vector<double>> features;
  std::vector<std::vector<double>> targets;
  std::vector<std::int64_t> samples;

  // Derived on construction.
  std::vector<double> optimum;    // w*
  double optimal_loss = 0.0;      // F*
  double smoothness = 0.0;        // L = lambda_max of the global Hessian
  double pl_constant = 0.0;       // delta = lambda_min

  std::int64_t total_samples() const;
};

SyntheticTask make_synthetic_task(const std::vector<std::int64_t>& samples_per_device,
                                  int dim, double ridge, std::uint64_t seed);

double global_loss(const SyntheticTask& task, const std::vector<double>& w);
std::vector<double> global_gradient(const SyntheticTask& task,
                                    const std::vector<double>& w);
std::vector<double> device_gradient(const SyntheticTask& task, int device,
                                    const std::vector<double>& w);

/// One local gradient-descent step w - eta * grad F_k(w).
std::vector<double> local_update(const SyntheticTask& task, int device,
                                 const std::vector<double>& w, double eta);

/// Data-volume weighted aggregation over the scheduled devices; throws on
/// an empty schedule.
std::vector<double> aggregate_models(const std::vector<std::vector<double>>& models,
                                     const Schedule& schedule,
                                     const std::vector<std::int64_t>& samples);

struct TrainingTrace {
  std::vector<double> loss;             // F(w_t), t = 1..T
  std::vector<double> gap;              // F(w_t) - F*
  std::vector<double> error_norm_sq;    // ||e_t||^2 per round
  double initial_gap = 0.0;             // F(w_0) - F*
  /// Largest per-sample gradient norm^2 seen at any iterate the gradients
  /// were evaluated at (w_0 .. w_{T-1}); certifies epsilon post hoc.
  double epsilon_observed = 0.0;
};

TrainingTrace run_training(const SyntheticTask& task,
                           const std::vector<Schedule>& schedules, double eta,
                           const std::vector<double>& w0);

}  // namespace irsfl

#endif  // IRSFL_FL_SIM_HPP_
