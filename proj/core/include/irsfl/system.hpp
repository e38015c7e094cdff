#ifndef IRSFL_SYSTEM_HPP_
#define IRSFL_SYSTEM_HPP_

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace irsfl {

using cvec = std::vector<std::complex<double>>;

/// Raised by solvers when no feasible point exists (e.g. a device that can
/// never finish its upload within the energy budget while the data-volume
/// constraint forces it to participate).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Position2D {
  double x = 0.0;
  double y = 0.0;
};

/// Global constants shared by every protocol. noise_power is the total
/// in-band noise B*sigma^2 in watts (configured in dBm); the per-Hz
/// density sigma^2 is derived where sub-band noise is needed.
struct SystemParams {
  double bandwidth_hz = 10e6;
  double noise_power_w = 1e-11;  // -80 dBm
  double model_bits = 1e6;
  double energy_coeff = 1e-27;  // J * s^2 / cycle^3
  int num_devices = 0;
  int num_elements = 0;

  double noise_density() const { return noise_power_w / bandwidth_hz; }
  void validate() const;
};

double dbm_to_watts(double dbm);

struct DeviceProfile {
  std::int64_t samples = 1;        // D_k
  double cycles_per_sample = 10.0; // C_k
  double energy_budget_j = 0.1;    // E_k^max
  Position2D position;

  double workload_cycles() const {
    return cycles_per_sample * static_cast<double>(samples);
  }
};

/// Binary participation vector for one round.
struct Schedule {
  std::vector<std::uint8_t> a;

  static Schedule all_on(std::size_t k) { return Schedule{std::vector<std::uint8_t>(k, 1)}; }
  static Schedule all_off(std::size_t k) { return Schedule{std::vector<std::uint8_t>(k, 0)}; }

  std::size_t size() const { return a.size(); }
  bool scheduled(std::size_t k) const { return a[k] != 0; }
  int count() const;
  bool empty() const { return count() == 0; }
  /// Total data volume of the devices left out of the round.
  double excluded_volume(const std::vector<DeviceProfile>& devices) const;
};

enum class Protocol { TDMA, FDMA, NOMA };

const char* protocol_name(Protocol p);

/// One protocol's optimized round: schedule, phase shifts, time/energy
/// splits and the latency breakdown. TDMA carries one phase vector per
/// device; FDMA/NOMA carry a single shared vector.
struct ProtocolSolution {
  Protocol protocol = Protocol::TDMA;
  Schedule schedule;
  std::vector<cvec> phases;          // per device (TDMA) or one shared entry
  std::vector<double> upload_times;  // per device; FDMA: e_k = b_k * tau_F
  double upload_total = 0.0;         // sum tau_k (TDMA), tau_F, or tau_N
  double local_time = 0.0;           // tau_loc
  std::vector<double> frequencies;   // f_k, zero for unscheduled devices
  std::vector<double> upload_energies;
  std::vector<double> bandwidth_fractions;  // FDMA only
  std::vector<double> gains;                // effective |h_k|^2 at the phases
  double total_latency = 0.0;
  bool empty_schedule = false;
  bool feasible = true;
  /// Accepted objective values over the solve, non-increasing.
  std::vector<double> latency_trace;
};

struct LocalProfile {
  double time_s = 0.0;
  double energy_j = 0.0;
};

/// Local training time C_k D_k / f and energy xi C_k D_k f^2.
LocalProfile local_profile(const DeviceProfile& device, double frequency,
                           const SystemParams& params);

/// Synchronous-round computation time: max over scheduled devices.
double round_local_time(const Schedule& schedule,
                        const std::vector<double>& times);

/// Bits delivered in x seconds on a `fraction` share of the band when the
/// transmitter spends `energy` joules against channel power gain `gain`:
///   fraction * B * x * log2(1 + energy*gain / (x * fraction * B sigma^2)).
/// fraction = 1 gives the TDMA form.
double uploaded_bits(double x, double energy, double gain, double fraction,
                     const SystemParams& params);

/// Prefix-capacity test for uplink NOMA with ascending received energies
/// S_1 <= ... : true iff B tau log2(1 + sum_{k<=m} S_k / (tau B sigma^2))
/// >= m * s.
bool noma_prefix_ok(const std::vector<double>& sorted_received_energy,
                    double tau, int m, const SystemParams& params);

/// Re-checks every ProtocolSolution invariant numerically and returns one
/// message per violation (empty means clean). `rho` is the data-volume
/// slack of the scheduling constraint.
std::vector<std::string> check_solution(const ProtocolSolution& sol,
                                        const std::vector<DeviceProfile>& devices,
                                        const SystemParams& params, double rho);

}  // namespace irsfl

#endif  // IRSFL_SYSTEM_HPP_
