#ifndef IRSFL_TRADEOFF_HPP_
#define IRSFL_TRADEOFF_HPP_

#include <cstdint>
#include <vector>

#include "irsfl/channel.hpp"
#include "irsfl/system.hpp"
#include "irsfl/tdma_solver.hpp"

namespace irsfl {

/// Constants of the learning task driving the optimality-gap bound:
/// L-smoothness, PL constant delta, sample-gradient bound epsilon, the
/// initial gap F(w_0) - F*, and the per-round gap budget kappa.
struct ConvergenceParams {
  double smoothness = 1.0;      // L
  double pl_constant = 1.0;     // delta, 0 < delta <= L
  double gradient_bound = 1.0;  // epsilon
  double initial_gap = 1.0;
  double kappa = 0.0;

  void validate() const;
};

/// Optimality-gap bound after T rounds:
/// (1 - delta/L)^T * initial_gap + sum_t A_t (1 - delta/L)^{T-t},
/// A_t = (2 eps / (L D^2)) (sum_k (1 - a_k^t) D_k)^2.
double gap_bound(const ConvergenceParams& cp,
                 const std::vector<Schedule>& schedules,
                 const std::vector<std::int64_t>& samples);

/// Same bound evaluated after every round 1..T.
std::vector<double> gap_bound_trace(const ConvergenceParams& cp,
                                    const std::vector<Schedule>& schedules,
                                    const std::vector<std::int64_t>& samples);

/// Data-volume slack implied by the gap budget: rho = sqrt(kappa L D^2 / (2 eps)).
double rho_from_kappa(const ConvergenceParams& cp, double total_samples);

struct LossMinResult {
  double kappa = 0.0;  // smallest budget whose optimal latency fits tau_bar
  double a_t = 0.0;    // gap term achieved by the returned schedule
  ProtocolSolution solution;
};

/// Smallest kappa with tau*(kappa) <= tau_bar, found by bisection on the
/// non-increasing map kappa -> optimal latency; relative tolerance 1e-3.
LossMinResult min_loss_given_latency(Protocol protocol,
                                     const ChannelRealization& ch,
                                     const std::vector<DeviceProfile>& devices,
                                     const SystemParams& params,
                                     const ConvergenceParams& cp, double tau_bar,
                                     const SolverOptions& opts = {});

struct ElementThreshold {
  int n_min = 0;
  bool energy_ok = false;
};

/// Sufficient IRS size for full scheduling under a latency cap tau_bar
/// with local-computation budget tau_bar_loc:
///   energy_ok: every device can afford its training energy within tau_bar;
///   n_min: ceil of sqrt((2^(sK/(B tc)) - 1) tc B sigma^2 / (K E rr^2 rg^2)),
/// tc = tau_bar - tau_bar_loc, E the worst-case leftover upload energy and
/// rr*rg the smallest per-element cascade magnitude of the realization.
ElementThreshold full_scheduling_threshold(const ChannelRealization& ch,
                                           const std::vector<DeviceProfile>& devices,
                                           const SystemParams& params,
                                           double tau_bar, double tau_bar_loc);

bool detect_power_homogeneous(const ChannelRealization& ch, double rel_tol = 1e-9);
bool detect_phase_homogeneous(const ChannelRealization& ch, double rad_tol = 1e-9);

struct ComparisonOptions {
  double tol = 1e-6;          // absolute slack on the orderings
  double equality_rel = 1e-4; // relative band for the Theorem-2 equality case
  int restarts = 5;           // re-solve budget before a violation counts
  SolverOptions solver;
};

/// Paired solver runs plus the channel-structure flags that decide which
/// orderings apply. Violations are reported, never thrown, and only after
/// the heuristic side has been re-solved with random restarts.
struct ComparisonReport {
  double tau_tdma = 0.0;
  double tau_fdma = 0.0;
  double tau_noma = 0.0;
  bool power_homogeneous = false;
  bool phase_homogeneous = false;
  bool direct_blocked = false;
  bool homogeneous_devices = false;
  bool tdma_le_fdma_ok = true;               // always applicable
  bool fdma_equality_applicable = false;     // phase homogeneous
  bool fdma_equality_ok = true;
  bool tdma_le_noma_applicable = false;      // power homog + blocked + homog devices
  bool tdma_le_noma_ok = true;
  bool noma_le_tdma_applicable = false;      // phase homogeneous
  bool noma_le_tdma_ok = true;
  bool noma_le_fdma_ok = true;               // always applicable
  int restarts_used = 0;
};

ComparisonReport compare_protocols(const ChannelRealization& ch,
                                   const std::vector<DeviceProfile>& devices,
                                   const SystemParams& params, double rho,
                                   const ComparisonOptions& opts = {});

}  // namespace irsfl

#endif  // IRSFL_TRADEOFF_HPP_
