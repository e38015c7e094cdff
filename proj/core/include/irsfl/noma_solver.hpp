#ifndef IRSFL_NOMA_SOLVER_HPP_
#define IRSFL_NOMA_SOLVER_HPP_

#include <vector>

#include "irsfl/channel.hpp"
#include "irsfl/system.hpp"
#include "irsfl/tdma_solver.hpp"

namespace irsfl {

/// Received upload energies S_k = E_k |h_k|^2 of the scheduled devices,
/// sorted ascending; `order[i]` maps sorted position i back to the device.
struct NomaGains {
  std::vector<double> sorted_received_energy;
  std::vector<int> order;
};

NomaGains make_noma_gains(const std::vector<double>& received_energy);

/// Shared-pattern ascent for the weighted sum gain
/// sum_k weight_k |h_{d,k} + f_k^H v|^2: per-element alignment of the
/// tangent plane plus an exact global-rotation line search, iterated until
/// the objective moves by less than rel_tol. The objective never
/// decreases.
cvec sum_gain_phase_opt(const ChannelRealization& ch,
                        const std::vector<int>& scheduled,
                        const std::vector<double>& weights, cvec v,
                        double rel_tol = 1e-8, int max_iters = 500);

/// Shortest tau satisfying every prefix constraint
/// B tau log2(1 + sum_{k<=m} S_k / (tau B sigma^2)) >= m s:
/// the max over m of the per-prefix roots; at least one is tight.
double noma_upload_time(const NomaGains& gains, const SystemParams& params);

/// I-NOMA round: coordinate-descent scheduling, and per candidate set a
/// 1-D search over tau_loc with sum-gain shared phases and budget-tight
/// energies.
ProtocolSolution solve_noma(const ChannelRealization& ch,
                            const std::vector<DeviceProfile>& devices,
                            const SystemParams& params, double rho,
                            const SolverOptions& opts = {});

}  // namespace irsfl

#endif  // IRSFL_NOMA_SOLVER_HPP_
