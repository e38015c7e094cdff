// Internal helpers shared by the three protocol solvers. Not installed.
#ifndef IRSFL_SOLVER_COMMON_HPP_
#define IRSFL_SOLVER_COMMON_HPP_

#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "irsfl/system.hpp"

namespace irsfl::internal {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double total_samples(const std::vector<DeviceProfile>& devices) {
  double total = 0.0;
  for (const auto& d : devices) total += static_cast<double>(d.samples);
  return total;
}

// Energy floor below which the rate equation has no finite root:
// s * sigma^2 * ln2 / gain.
inline double upload_energy_floor(double gain, const SystemParams& params) {
  return params.model_bits * params.noise_density() * std::numbers::ln2 / gain;
}

// Remaining upload energy when local training runs at the Prop-1 frequency
// for the given tau_loc.
inline double budget_energy(const DeviceProfile& dev, double tau_loc,
                            const SystemParams& params) {
  const double cycles = dev.workload_cycles();
  return dev.energy_budget_j -
         params.energy_coeff * cycles * cycles * cycles / (tau_loc * tau_loc);
}

inline std::complex<double> cascade_dot(const cvec& cascade, const cvec& v) {
  std::complex<double> sum{0.0, 0.0};
  for (std::size_t n = 0; n < cascade.size(); ++n) sum += cascade[n] * v[n];
  return sum;
}

inline std::vector<int> scheduled_indices(const Schedule& s) {
  std::vector<int> idx;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s.scheduled(k)) idx.push_back(static_cast<int>(k));
  }
  return idx;
}

}  // namespace irsfl::internal

#endif  // IRSFL_SOLVER_COMMON_HPP_
