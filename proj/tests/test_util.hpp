#ifndef IRSFL_TESTS_TEST_UTIL_HPP_
#define IRSFL_TESTS_TEST_UTIL_HPP_

#include <vector>

#include "irsfl/channel.hpp"
#include "irsfl/rng.hpp"
#include "irsfl/system.hpp"

namespace testutil {

inline irsfl::SystemParams default_params(int devices = 0, int elements = 0) {
  irsfl::SystemParams p;
  p.bandwidth_hz = 10e6;
  p.noise_power_w = irsfl::dbm_to_watts(-80.0);
  p.model_bits = 1e6;
  p.energy_coeff = 1e-27;
  p.num_devices = devices;
  p.num_elements = elements;
  return p;
}

inline std::vector<irsfl::DeviceProfile> homogeneous_devices(
    int count, std::int64_t samples = 1000, double energy = 0.1,
    double cycles = 10.0) {
  std::vector<irsfl::DeviceProfile> devices(count);
  for (auto& d : devices) {
    d.samples = samples;
    d.cycles_per_sample = cycles;
    d.energy_budget_j = energy;
  }
  return devices;
}

inline irsfl::ScenarioSpec scenario(irsfl::ScenarioKind kind, int devices,
                                    int elements, std::uint64_t seed) {
  irsfl::ScenarioSpec spec;
  spec.kind = kind;
  spec.num_devices = devices;
  spec.num_elements = elements;
  spec.seed = seed;
  return spec;
}

inline double total_data(const std::vector<irsfl::DeviceProfile>& devices) {
  double total = 0.0;
  for (const auto& d : devices) total += static_cast<double>(d.samples);
  return total;
}

}  // namespace testutil

#endif  // IRSFL_TESTS_TEST_UTIL_HPP_
