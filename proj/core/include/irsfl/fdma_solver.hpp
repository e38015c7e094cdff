#ifndef IRSFL_FDMA_SOLVER_HPP_
#define IRSFL_FDMA_SOLVER_HPP_

#include <complex>
#include <functional>
#include <vector>

#include "irsfl/channel.hpp"
#include "irsfl/system.hpp"
#include "irsfl/tdma_solver.hpp"

namespace irsfl {

/// First-order lower bound of energy * |h_direct + f^H v|^2, jointly in
/// (v, 1/energy), expanded at (v_bar, energy_bar). Exact at the expansion
/// point and a global under-estimator elsewhere (the true map is jointly
/// convex there).
double surrogate_gain(const cvec& v, double energy, const cvec& v_bar,
                      double energy_bar, const cvec& cascade,
                      std::complex<double> h_direct);

struct InnerAllocation {
  std::vector<double> e;  // per-device transmission resource e_k = b_k tau_F
  double tau_f = 0.0;     // sum of e_k
};

/// Closed-form allocation at fixed phases: each e_k is the root of the
/// per-device rate equation, tau_F their sum, b_k = e_k / tau_F. Equals
/// the TDMA slot lengths computed with the same gains.
InnerAllocation inner_allocation(const std::vector<double>& gains,
                                 const std::vector<double>& energies,
                                 const SystemParams& params);

/// Linearization point and accepted-objective trace of the shared-phase
/// SCA; the trace is non-increasing by the acceptance rule.
struct ScaState {
  cvec v;
  std::vector<double> energies;  // budget energies of the scheduled devices
  double tau_loc = 0.0;          // fixed while phases move
  double upload_total = 0.0;     // sum e_k at v
  std::vector<double> trace;     // tau_loc + upload_total after each accept
};

ScaState make_sca_state(const ChannelRealization& ch,
                        const std::vector<int>& scheduled,
                        const std::vector<double>& energies, double tau_loc,
                        cvec v, const SystemParams& params);

/// One SCA move: closed-form maximization of the latency-weighted tangent
/// of the surrogate (weights -de_k/dY_k), unit-modulus projection, global
/// rotation, then exact re-allocation. The step is kept only when the
/// total latency does not increase; returns whether it was accepted.
bool sca_phase_step(ScaState& state, const ChannelRealization& ch,
                    const std::vector<int>& scheduled,
                    const SystemParams& params);

/// Greedy single-coordinate descent on the schedule starting from full
/// participation (or `start` when supplied): apply the admissible flip
/// with the largest latency reduction until none strictly reduces it.
/// `latency_of` returns +inf for infeasible schedules.
Schedule coordinate_descent_schedule(
    const std::function<double(const Schedule&)>& latency_of,
    const std::vector<DeviceProfile>& devices, double rho,
    std::vector<double>* accepted_trace = nullptr,
    const Schedule& start = Schedule{});

/// High-quality I-FDMA round: coordinate-descent scheduling outside, and
/// per candidate set an alternation of 1-D tau_loc search, SCA phase
/// optimization and closed-form allocation.
ProtocolSolution solve_fdma(const ChannelRealization& ch,
                            const std::vector<DeviceProfile>& devices,
                            const SystemParams& params, double rho,
                            const SolverOptions& opts = {});

}  // namespace irsfl

#endif  // IRSFL_FDMA_SOLVER_HPP_
