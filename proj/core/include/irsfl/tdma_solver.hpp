#ifndef IRSFL_TDMA_SOLVER_HPP_
#define IRSFL_TDMA_SOLVER_HPP_

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "irsfl/channel.hpp"
#include "irsfl/system.hpp"

namespace irsfl {

enum class PhaseMode { Optimized, Random };

struct SolverOptions {
  int grid_points = 200;      // 1-D search resolution over tau_loc
  double golden_tol = 1e-11;  // relative width for golden-section refinement
  int sca_max_iters = 100;
  double sca_rel_tol = 1e-6;
  int restarts = 0;           // extra random phase initializations (FDMA/NOMA)
  std::uint64_t restart_seed = 0x5eedull;
  PhaseMode phase_mode = PhaseMode::Optimized;
  std::uint64_t random_phase_seed = 1;
};

struct AlignedPhases {
  cvec v;
  double gain = 0.0;  // (|h_d| + sum_n |cascade_n|)^2
};

/// Per-device optimal IRS pattern: rotate every cascade element onto the
/// direct path's phase, which meets the triangle bound with equality.
AlignedPhases align_phases(const ChannelRealization& ch, int device);

/// Unique x with B x log2(1 + received_energy / (x B sigma^2)) = bits.
/// The Lambert W_{-1} closed form is the fast path; the result is checked
/// against the residual and bisection takes over on disagreement.
/// Throws InfeasibleError when the large-x asymptote cannot deliver the
/// requested bits.
double rate_equation_time(double received_energy, double bits,
                          const SystemParams& params);

/// TDMA slot length for one device: rate_equation_time(energy * gain, s).
double upload_time(double energy, double gain, const SystemParams& params);

/// Minimize sum_k a_k * standalone_time_k subject to
/// sum_k (1 - a_k) * samples_k <= rho. Devices with an infinite standalone
/// time must be excluded; if their data volume alone exceeds rho the
/// instance is infeasible. Dual threshold + greedy repair produce the
/// incumbent, then an exact branch-and-bound pass closes the knapsack
/// corner cases so the result matches exhaustive enumeration.
Schedule schedule_devices(const std::vector<double>& standalone_times,
                          const std::vector<std::int64_t>& samples, double rho);

/// Bracket for the 1-D search over the local-computation time. lower:
/// max_k sqrt(xi C_k^3 D_k^3 / (E_k^max - s sigma^2 ln2 / gain_k));
/// upper: lower plus the optimal total upload time just above it.
std::pair<double, double> tau_loc_bounds(const std::vector<DeviceProfile>& devices,
                                         const std::vector<double>& gains,
                                         const SystemParams& params, double rho);

/// Optimal I-TDMA round: per-device aligned phases, budget-tight upload
/// energies, closed-form slot lengths, knapsack scheduling, and a 1-D
/// search over tau_loc (grid + golden refinement of the best basins).
ProtocolSolution solve_tdma(const ChannelRealization& ch,
                            const std::vector<DeviceProfile>& devices,
                            const SystemParams& params, double rho,
                            const SolverOptions& opts = {});

namespace detail {

/// Shared 1-D minimizer: grid sweep then golden-section refinement around
/// the best grid basins. Returns (argmin, min). Objective may return +inf
/// for infeasible candidates.
std::pair<double, double> minimize_scalar(
    const std::function<double(double)>& objective, double lo, double hi,
    int grid_points, double rel_tol);

cvec random_unit_vector(int n, std::uint64_t seed);

}  // namespace detail

}  // namespace irsfl

#endif  // IRSFL_TDMA_SOLVER_HPP_
