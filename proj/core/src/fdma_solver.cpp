#include "irsfl/fdma_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "irsfl/noma_solver.hpp"
#include "irsfl/rng.hpp"
#include "solver_common.hpp"

namespace irsfl {

namespace {

using internal::budget_energy;
using internal::cascade_dot;
using internal::kInf;
using internal::total_samples;
using internal::upload_energy_floor;

struct PhasePointEval {
  bool feasible = false;
  double latency = kInf;
  double tau_loc = 0.0;
  double upload = 0.0;          // tau_F
  std::vector<double> e;        // per scheduled device
  std::vector<double> energies;
  std::vector<double> gains;
};

PhasePointEval eval_fdma_at_phases(const ChannelRealization& ch,
                                   const std::vector<DeviceProfile>& devices,
                                   const SystemParams& params,
                                   const std::vector<int>& scheduled,
                                   const cvec& v, const SolverOptions& opts) {
  PhasePointEval out;
  const std::size_t M = scheduled.size();
  if (M == 0) {
    out.feasible = true;
    out.latency = 0.0;
    return out;
  }

  std::vector<DeviceProfile> subset(M);
  std::vector<double> gains(M);
  for (std::size_t i = 0; i < M; ++i) {
    subset[i] = devices[scheduled[i]];
    gains[i] = effective_gain(ch, scheduled[i], v);
  }

  double lo = 0.0, hi = 0.0;
  try {
    std::tie(lo, hi) = tau_loc_bounds(subset, gains, params, 0.0);
  } catch (const InfeasibleError&) {
    return out;
  }

  auto objective = [&](double tau_loc) {
    double total = tau_loc;
    for (std::size_t i = 0; i < M; ++i) {
      const double e = budget_energy(subset[i], tau_loc, params);
      if (e <= upload_energy_floor(gains[i], params)) return kInf;
      total += upload_time(e, gains[i], params);
    }
    return total;
  };

  const auto [tau_best, latency] = detail::minimize_scalar(
      objective, lo, hi, opts.grid_points, opts.golden_tol);
  if (!std::isfinite(latency)) return out;

  out.feasible = true;
  out.latency = latency;
  out.tau_loc = tau_best;
  out.gains = gains;
  out.energies.resize(M);
  for (std::size_t i = 0; i < M; ++i) {
    out.energies[i] = budget_energy(subset[i], tau_best, params);
  }
  const auto alloc = inner_allocation(gains, out.energies, params);
  out.e = alloc.e;
  out.upload = alloc.tau_f;
  return out;
}

struct InnerSolution {
  PhasePointEval point;
  cvec v;
};

std::optional<InnerSolution> fdma_inner(const ChannelRealization& ch,
                                        const std::vector<DeviceProfile>& devices,
                                        const SystemParams& params,
                                        const std::vector<int>& scheduled,
                                        cvec v_init, const SolverOptions& opts,
                                        std::vector<double>* trace) {
  if (scheduled.empty()) {
    InnerSolution s;
    s.point.feasible = true;
    s.point.latency = 0.0;
    return s;
  }

  cvec v = std::move(v_init);
  if (v.empty()) {
    if (opts.phase_mode == PhaseMode::Random) {
      v = detail::random_unit_vector(ch.num_elements, opts.random_phase_seed);
    } else {
      std::vector<double> weights(scheduled.size());
      for (std::size_t i = 0; i < scheduled.size(); ++i) {
        weights[i] = devices[scheduled[i]].energy_budget_j;
      }
      v = sum_gain_phase_opt(ch, scheduled, weights, cvec(ch.num_elements, {1.0, 0.0}));
    }
  }

  InnerSolution best;
  best.point = eval_fdma_at_phases(ch, devices, params, scheduled, v, opts);
  best.v = v;
  if (!best.point.feasible) return std::nullopt;
  if (trace) trace->push_back(best.point.latency);
  if (opts.phase_mode == PhaseMode::Random) return best;

  for (int iter = 0; iter < 8; ++iter) {
    // Phase refinement at the current tau_loc, then a fresh tau_loc search
    // at the refined phases; both stages only ever accept improvements.
    ScaState state = make_sca_state(ch, scheduled, best.point.energies,
                                    best.point.tau_loc, best.v, params);
    for (int step = 0; step < opts.sca_max_iters; ++step) {
      if (!sca_phase_step(state, ch, scheduled, params)) break;
      const auto& tr = state.trace;
      if (tr.size() >= 2 &&
          tr[tr.size() - 2] - tr.back() <=
              opts.sca_rel_tol * std::max(tr.back(), 1e-12)) {
        break;
      }
    }

    auto cand = eval_fdma_at_phases(ch, devices, params, scheduled, state.v, opts);
    if (!cand.feasible || cand.latency > best.point.latency) break;
    const double gain = best.point.latency - cand.latency;
    best.point = std::move(cand);
    best.v = state.v;
    if (trace) trace->push_back(best.point.latency);
    if (gain <= opts.sca_rel_tol * std::max(best.point.latency, 1e-12)) break;
  }
  return best;
}

}  // namespace

double surrogate_gain(const cvec& v, double energy, const cvec& v_bar,
                      double energy_bar, const cvec& cascade,
                      std::complex<double> h_direct) {
  const auto t_bar = cascade_dot(cascade, v_bar);
  const auto t = cascade_dot(cascade, v);
  const auto u_bar = h_direct + t_bar;
  const double gain_bar = std::norm(u_bar);
  return -energy_bar * energy_bar / energy * gain_bar +
         2.0 * energy_bar * gain_bar +
         2.0 * energy_bar * std::real(std::conj(u_bar) * (t - t_bar));
}

InnerAllocation inner_allocation(const std::vector<double>& gains,
                                 const std::vector<double>& energies,
                                 const SystemParams& params) {
  InnerAllocation alloc;
  alloc.e.resize(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) {
    alloc.e[i] = upload_time(energies[i], gains[i], params);
    alloc.tau_f += alloc.e[i];
  }
  return alloc;
}

ScaState make_sca_state(const ChannelRealization& ch,
                        const std::vector<int>& scheduled,
                        const std::vector<double>& energies, double tau_loc,
                        cvec v, const SystemParams& params) {
  ScaState state;
  state.v = std::move(v);
  state.energies = energies;
  state.tau_loc = tau_loc;
  std::vector<double> gains(scheduled.size());
  for (std::size_t i = 0; i < scheduled.size(); ++i) {
    gains[i] = effective_gain(ch, scheduled[i], state.v);
  }
  state.upload_total = inner_allocation(gains, energies, params).tau_f;
  state.trace = {tau_loc + state.upload_total};
  return state;
}

bool sca_phase_step(ScaState& state, const ChannelRealization& ch,
                    const std::vector<int>& scheduled,
                    const SystemParams& params) {
  const int N = ch.num_elements;
  const std::size_t M = scheduled.size();
  const double noise = params.noise_power_w;

  // Marginal latency per unit of surrogate received energy: w = -de/dY of
  // the rate equation B e log2(1 + Y/(e B sigma^2)) = s.
  cvec d(N, {0.0, 0.0});
  for (std::size_t i = 0; i < M; ++i) {
    const int k = scheduled[i];
    const auto u = ch.h_direct[k] + cascade_dot(ch.cascade[k], state.v);
    const double received = state.energies[i] * std::norm(u);
    double e_i;
    try {
      e_i = rate_equation_time(received, params.model_bits, params);
    } catch (const InfeasibleError&) {
      return false;
    }
    const double snr = received / (e_i * noise);
    const double denom = noise * ((1.0 + snr) * std::log1p(snr) - snr);
    const double w = denom > 0.0 ? 1.0 / denom : 0.0;
    const auto scale = w * state.energies[i] * u;
    for (int n = 0; n < N; ++n) {
      d[n] += std::conj(ch.cascade[k][n]) * scale;
    }
  }

  cvec cand(N);
  for (int n = 0; n < N; ++n) {
    cand[n] = std::abs(d[n]) > 0.0 ? std::polar(1.0, std::arg(d[n])) : state.v[n];
  }
  std::complex<double> rot{0.0, 0.0};
  for (std::size_t i = 0; i < M; ++i) {
    const int k = scheduled[i];
    rot += state.energies[i] * std::conj(ch.h_direct[k]) *
           cascade_dot(ch.cascade[k], cand);
  }
  if (std::abs(rot) > 0.0) {
    const auto spin = std::polar(1.0, -std::arg(rot));
    for (auto& z : cand) z *= spin;
  }

  double new_total = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    const double gain = effective_gain(ch, scheduled[i], cand);
    try {
      new_total += upload_time(state.energies[i], gain, params);
    } catch (const InfeasibleError&) {
      return false;
    }
  }
  if (new_total > state.upload_total) return false;

  state.v = std::move(cand);
  state.upload_total = new_total;
  state.trace.push_back(state.tau_loc + new_total);
  return true;
}

Schedule coordinate_descent_schedule(
    const std::function<double(const Schedule&)>& latency_of,
    const std::vector<DeviceProfile>& devices, double rho,
    std::vector<double>* accepted_trace, const Schedule& start) {
  const std::size_t K = devices.size();
  Schedule a = start.size() == K ? start : Schedule::all_on(K);
  if (a.excluded_volume(devices) > rho * (1.0 + 1e-12) + 1e-9) {
    throw InfeasibleError(
        "coordinate_descent_schedule: start violates the data-volume slack");
  }

  double current = latency_of(a);
  if (accepted_trace && std::isfinite(current)) accepted_trace->push_back(current);

  for (std::size_t round = 0; round <= 2 * K; ++round) {
    int best_flip = -1;
    double best_latency = current;
    for (std::size_t k = 0; k < K; ++k) {
      Schedule cand = a;
      cand.a[k] = cand.a[k] ? 0 : 1;
      if (cand.excluded_volume(devices) > rho * (1.0 + 1e-12) + 1e-9) continue;
      const double lat = latency_of(cand);
      if (lat < best_latency - 1e-12 * std::max(1.0, std::fabs(best_latency))) {
        best_latency = lat;
        best_flip = static_cast<int>(k);
      }
    }
    if (best_flip < 0) break;
    a.a[best_flip] = a.a[best_flip] ? 0 : 1;
    current = best_latency;
    if (accepted_trace) accepted_trace->push_back(current);
  }
  return a;
}

ProtocolSolution solve_fdma(const ChannelRealization& ch,
                            const std::vector<DeviceProfile>& devices,
                            const SystemParams& params, double rho,
                            const SolverOptions& opts) {
  params.validate();
  const std::size_t K = devices.size();

  ProtocolSolution sol;
  sol.protocol = Protocol::FDMA;
  sol.schedule = Schedule::all_off(K);
  sol.upload_times.assign(K, 0.0);
  sol.frequencies.assign(K, 0.0);
  sol.upload_energies.assign(K, 0.0);
  sol.bandwidth_fractions.assign(K, 0.0);
  sol.gains.assign(K, 0.0);

  if (rho >= total_samples(devices) - 1e-9) {
    sol.empty_schedule = true;
    sol.latency_trace = {0.0};
    return sol;
  }

  Schedule start = Schedule::all_on(K);
  double forced = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double best_gain = align_phases(ch, static_cast<int>(k)).gain;
    if (devices[k].energy_budget_j <= upload_energy_floor(best_gain, params)) {
      start.a[k] = 0;
      forced += static_cast<double>(devices[k].samples);
    }
  }
  if (forced > rho * (1.0 + 1e-12) + 1e-9) {
    throw InfeasibleError("solve_fdma: undeliverable devices exceed the data-volume slack");
  }

  struct Attempt {
    double latency = kInf;
    Schedule schedule;
    InnerSolution inner;
    std::vector<double> trace;
  };

  Attempt best_attempt;
  const int runs = 1 + std::max(0, opts.restarts);
  for (int run = 0; run < runs; ++run) {
    cvec warm;
    if (run > 0) {
      warm = detail::random_unit_vector(
          ch.num_elements, opts.restart_seed + 0x9e3779b97f4a7c15ull * run);
    }

    std::vector<double> trace;
    InnerSolution current_inner;
    auto latency_of = [&](const Schedule& s) {
      auto idx = internal::scheduled_indices(s);
      auto inner = fdma_inner(ch, devices, params, idx, warm, opts, nullptr);
      if (!inner) return kInf;
      current_inner = std::move(*inner);
      return current_inner.point.latency;
    };

    Schedule sched;
    try {
      sched = coordinate_descent_schedule(latency_of, devices, rho, &trace, start);
    } catch (const InfeasibleError&) {
      continue;
    }
    const double lat = latency_of(sched);
    if (!std::isfinite(lat)) continue;
    if (lat < best_attempt.latency) {
      best_attempt.latency = lat;
      best_attempt.schedule = sched;
      best_attempt.inner = current_inner;
      best_attempt.trace = trace;
    }
  }

  if (!std::isfinite(best_attempt.latency)) {
    throw InfeasibleError("solve_fdma: no feasible schedule found");
  }

  const auto& inner = best_attempt.inner;
  sol.schedule = best_attempt.schedule;
  sol.phases = {inner.v};
  sol.local_time = inner.point.tau_loc;
  sol.upload_total = inner.point.upload;
  sol.total_latency = best_attempt.latency;
  sol.empty_schedule = sol.schedule.empty();
  const auto idx = internal::scheduled_indices(sol.schedule);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int k = idx[i];
    sol.upload_times[k] = inner.point.e[i];
    sol.upload_energies[k] = inner.point.energies[i];
    sol.gains[k] = inner.point.gains[i];
    sol.frequencies[k] = devices[k].workload_cycles() / inner.point.tau_loc;
    sol.bandwidth_fractions[k] =
        inner.point.upload > 0.0 ? inner.point.e[i] / inner.point.upload : 0.0;
  }
  sol.latency_trace = best_attempt.trace.empty()
                          ? std::vector<double>{sol.total_latency}
                          : best_attempt.trace;
  return sol;
}

}  // namespace irsfl
