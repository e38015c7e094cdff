#include "irsfl/system.hpp"

#include <cmath>
#include <numbers>

namespace irsfl {

void SystemParams::validate() const {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (!(noise_power_w > 0.0)) throw std::invalid_argument("noise power must be positive");
  if (!(model_bits > 0.0)) throw std::invalid_argument("model size must be positive");
  if (!(energy_coeff > 0.0)) throw std::invalid_argument("energy coefficient must be positive");
}

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::TDMA: return "tdma";
    case Protocol::FDMA: return "fdma";
    case Protocol::NOMA: return "noma";
  }
  return "?";
}

int Schedule::count() const {
  int c = 0;
  for (auto v : a) c += (v != 0);
  return c;
}

double Schedule::excluded_volume(const std::vector<DeviceProfile>& devices) const {
  double vol = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == 0) vol += static_cast<double>(devices[k].samples);
  }
  return vol;
}

LocalProfile local_profile(const DeviceProfile& device, double frequency,
                           const SystemParams& params) {
  if (!(frequency > 0.0)) {
    throw std::domain_error("local_profile: frequency must be positive");
  }
  const double cycles = device.workload_cycles();
  return LocalProfile{cycles / frequency,
                      params.energy_coeff * cycles * frequency * frequency};
}

double round_local_time(const Schedule& schedule, const std::vector<double>& times) {
  double worst = 0.0;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (schedule.scheduled(k)) worst = std::max(worst, times[k]);
  }
  return worst;
}

double uploaded_bits(double x, double energy, double gain, double fraction,
                     const SystemParams& params) {
  if (energy <= 0.0 || gain <= 0.0) return 0.0;
  const double band = fraction * params.bandwidth_hz;
  const double noise = fraction * params.noise_power_w;
  const double snr = energy * gain / (x * noise);
  return band * x * std::log1p(snr) / std::numbers::ln2;
}

bool noma_prefix_ok(const std::vector<double>& sorted_received_energy,
                    double tau, int m, const SystemParams& params) {
  if (tau <= 0.0) return false;
  double prefix = 0.0;
  for (int k = 0; k < m; ++k) prefix += sorted_received_energy[k];
  const double bits = params.bandwidth_hz * tau *
                      std::log1p(prefix / (tau * params.noise_power_w)) /
                      std::numbers::ln2;
  return bits >= static_cast<double>(m) * params.model_bits;
}

namespace {

void check_close(std::vector<std::string>& out, double got, double want,
                 double rel_tol, const std::string& what) {
  const double scale = std::max({1e-300, std::fabs(want), std::fabs(got)});
  if (std::fabs(got - want) > rel_tol * scale) {
    out.push_back(what + ": got " + std::to_string(got) + ", want " +
                  std::to_string(want));
  }
}

}  // namespace

std::vector<std::string> check_solution(const ProtocolSolution& sol,
                                        const std::vector<DeviceProfile>& devices,
                                        const SystemParams& params, double rho) {
  std::vector<std::string> bad;
  const std::size_t K = devices.size();
  if (sol.schedule.size() != K) {
    bad.push_back("schedule size mismatch");
    return bad;
  }
  if (!sol.feasible) return bad;  // nothing further to hold

  if (sol.schedule.excluded_volume(devices) > rho * (1.0 + 1e-12) + 1e-9) {
    bad.push_back("excluded data volume exceeds rho");
  }
  if (sol.empty_schedule) {
    if (sol.total_latency != 0.0) bad.push_back("empty schedule with nonzero latency");
    return bad;
  }

  check_close(bad, sol.total_latency, sol.upload_total + sol.local_time, 1e-9,
              "latency breakdown");

  for (const auto& v : sol.phases) {
    for (const auto& z : v) {
      if (std::fabs(std::abs(z) - 1.0) > 1e-9) {
        bad.push_back("phase element off the unit circle");
        break;
      }
    }
  }

  double upload_sum = 0.0;
  double fraction_sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!sol.schedule.scheduled(k)) continue;
    const double f = sol.frequencies[k];
    if (!(f > 0.0)) {
      bad.push_back("scheduled device with zero frequency");
      continue;
    }
    const auto local = local_profile(devices[k], f, params);
    check_close(bad, local.time_s, sol.local_time, 1e-9,
                "scheduled device local time != tau_loc");
    const double used = sol.upload_energies[k] + local.energy_j;
    if (used > devices[k].energy_budget_j * (1.0 + 1e-9)) {
      bad.push_back("energy budget exceeded");
    }

    const double s = params.model_bits;
    switch (sol.protocol) {
      case Protocol::TDMA: {
        const double bits = uploaded_bits(sol.upload_times[k], sol.upload_energies[k],
                                          sol.gains[k], 1.0, params);
        check_close(bad, bits, s, 1e-8, "tdma rate constraint not tight");
        upload_sum += sol.upload_times[k];
        break;
      }
      case Protocol::FDMA: {
        const double e_k = sol.upload_times[k];
        const double bits = uploaded_bits(e_k, sol.upload_energies[k], sol.gains[k],
                                          1.0, params);
        check_close(bad, bits, s, 1e-8, "fdma rate constraint not tight");
        if (sol.upload_total > 0.0) {
          check_close(bad, sol.bandwidth_fractions[k], e_k / sol.upload_total, 1e-9,
                      "bandwidth fraction inconsistent with e_k");
        }
        fraction_sum += sol.bandwidth_fractions[k];
        upload_sum += e_k;
        break;
      }
      case Protocol::NOMA:
        break;
    }
  }

  if (sol.protocol == Protocol::TDMA) {
    check_close(bad, upload_sum, sol.upload_total, 1e-9, "tdma upload sum");
  }
  if (sol.protocol == Protocol::FDMA) {
    check_close(bad, fraction_sum, 1.0, 1e-9, "fdma fractions must sum to 1");
    check_close(bad, upload_sum, sol.upload_total, 1e-9, "fdma e_k sum");
  }
  if (sol.protocol == Protocol::NOMA) {
    std::vector<double> received;
    for (std::size_t k = 0; k < K; ++k) {
      if (sol.schedule.scheduled(k)) {
        received.push_back(sol.upload_energies[k] * sol.gains[k]);
      }
    }
    std::sort(received.begin(), received.end());
    const double tau = sol.upload_total * (1.0 + 1e-9);
    for (int m = 1; m <= static_cast<int>(received.size()); ++m) {
      if (!noma_prefix_ok(received, tau, m, params)) {
        bad.push_back("noma prefix constraint violated at m=" + std::to_string(m));
      }
    }
  }

  for (std::size_t t = 1; t < sol.latency_trace.size(); ++t) {
    if (sol.latency_trace[t] > sol.latency_trace[t - 1] * (1.0 + 1e-12) + 1e-15) {
      bad.push_back("latency trace increased");
      break;
    }
  }
  return bad;
}

}  // namespace irsfl
