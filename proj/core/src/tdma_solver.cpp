#include "irsfl/tdma_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "irsfl/math_kernels.hpp"
#include "irsfl/rng.hpp"
#include "solver_common.hpp"

namespace irsfl {

namespace {

using internal::budget_energy;
using internal::kInf;
using internal::total_samples;
using internal::upload_energy_floor;

struct InnerResult {
  bool feasible = false;
  double upload_total = kInf;
  Schedule schedule;
  std::vector<double> times;     // standalone slot lengths, +inf if undeliverable
  std::vector<double> energies;  // budget-tight upload energies
};

// Inner problem at a fixed tau_loc: budget-tight energies, closed-form slot
// lengths, then the scheduling knapsack.
InnerResult tdma_inner(const std::vector<DeviceProfile>& devices,
                       const std::vector<double>& gains,
                       const SystemParams& params, double rho, double tau_loc) {
  const std::size_t K = devices.size();
  InnerResult res;
  res.times.assign(K, kInf);
  res.energies.assign(K, 0.0);
  std::vector<std::int64_t> samples(K);
  for (std::size_t k = 0; k < K; ++k) {
    samples[k] = devices[k].samples;
    const double e = budget_energy(devices[k], tau_loc, params);
    if (e <= 0.0 || gains[k] <= 0.0) continue;
    if (e <= upload_energy_floor(gains[k], params)) continue;
    res.energies[k] = e;
    res.times[k] = upload_time(e, gains[k], params);
  }
  try {
    res.schedule = schedule_devices(res.times, samples, rho);
  } catch (const InfeasibleError&) {
    return res;
  }
  res.feasible = true;
  res.upload_total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (res.schedule.scheduled(k)) res.upload_total += res.times[k];
  }
  return res;
}

double golden_refine(const std::function<double(double)>& objective, double a,
                     double b, double rel_tol, double* best_x, double* best_f) {
  static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto consider = [&](double x, double f) {
    if (f < *best_f) {
      *best_f = f;
      *best_x = x;
    }
  };
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  consider(x1, f1);
  consider(x2, f2);
  for (int it = 0; it < 200; ++it) {
    if ((b - a) <= rel_tol * std::max({1e-300, std::fabs(a), std::fabs(b)})) break;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = objective(x1);
      consider(x1, f1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = objective(x2);
      consider(x2, f2);
    }
  }
  return *best_f;
}

}  // namespace

namespace detail {

std::pair<double, double> minimize_scalar(
    const std::function<double(double)>& objective, double lo, double hi,
    int grid_points, double rel_tol) {
  if (!(hi > lo)) return {lo, objective(lo)};
  const int n = std::max(2, grid_points);
  std::vector<double> xs(n + 1), fs(n + 1);
  for (int i = 0; i <= n; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / n;
    fs[i] = objective(xs[i]);
  }

  double best_x = xs[0];
  double best_f = fs[0];
  for (int i = 1; i <= n; ++i) {
    if (fs[i] < best_f) {
      best_f = fs[i];
      best_x = xs[i];
    }
  }

  // Refine the few best grid basins; the objective is piecewise smooth in
  // tau_loc (schedule switches create kinks), so a single basin is not
  // guaranteed to hold the optimum.
  std::vector<int> candidates;
  for (int i = 0; i <= n; ++i) {
    if (!std::isfinite(fs[i])) continue;
    const bool left_ok = (i == 0) || fs[i] <= fs[i - 1];
    const bool right_ok = (i == n) || fs[i] <= fs[i + 1];
    if (left_ok && right_ok) candidates.push_back(i);
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](int a, int b) { return fs[a] < fs[b]; });
  if (candidates.size() > 3) candidates.resize(3);

  for (int i : candidates) {
    const double a = xs[std::max(0, i - 1)];
    const double b = xs[std::min(n, i + 1)];
    golden_refine(objective, a, b, rel_tol, &best_x, &best_f);
  }
  return {best_x, best_f};
}

cvec random_unit_vector(int n, std::uint64_t seed) {
  Rng rng(seed);
  cvec v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
  }
  return v;
}

}  // namespace detail

AlignedPhases align_phases(const ChannelRealization& ch, int device) {
  const auto& cascade = ch.cascade[device];
  const double ref = std::abs(ch.h_direct[device]) > 0.0
                         ? std::arg(ch.h_direct[device])
                         : 0.0;
  AlignedPhases out;
  out.v.resize(cascade.size());
  double amplitude = std::abs(ch.h_direct[device]);
  for (std::size_t n = 0; n < cascade.size(); ++n) {
    out.v[n] = std::polar(1.0, ref - std::arg(cascade[n]));
    amplitude += std::abs(cascade[n]);
  }
  out.gain = amplitude * amplitude;
  return out;
}

double rate_equation_time(double received_energy, double bits,
                          const SystemParams& params) {
  if (!(received_energy > 0.0)) {
    throw InfeasibleError("rate equation: no received energy");
  }
  const double noise = params.noise_power_w;
  const double cap_bits =
      params.bandwidth_hz * received_energy / (noise * std::numbers::ln2);
  if (!(cap_bits > bits)) {
    throw InfeasibleError(
        "rate equation: asymptotic bit count below the requested payload");
  }

  auto delivered = [&](double x) {
    return uploaded_bits(x, received_energy, 1.0, 1.0, params);
  };
  const double c = received_energy / noise;  // x * SNR(x)

  // Lambert fast path. beta in (0,1) by the feasibility check above.
  const double beta = bits / (cap_bits);
  double x = kInf;
  {
    const double w = lambert_w_m1(std::max(-std::exp(-1.0), -beta * std::exp(-beta)));
    const double snr = -w / beta - 1.0;
    if (snr > 0.0) x = c / snr;
  }

  // Two Newton polish steps recover the precision lost to cancellation in
  // (z - 1) when beta is close to 1.
  for (int it = 0; it < 2 && std::isfinite(x); ++it) {
    const double f = delivered(x) - bits;
    const double deriv = params.bandwidth_hz *
                         (std::log1p(c / x) / std::numbers::ln2 -
                          c / (std::numbers::ln2 * (x + c)));
    if (!(deriv > 0.0)) break;
    const double next = x - f / deriv;
    if (next > 0.0 && std::isfinite(next)) x = next;
  }

  if (std::isfinite(x) && std::fabs(delivered(x) - bits) <= 1e-10 * bits) {
    return x;
  }

  // Bisection is authoritative when the closed form disagrees.
  double lo = std::isfinite(x) ? x : c;
  double hi = lo;
  for (int it = 0; it < 4000 && delivered(lo) > bits; ++it) lo *= 0.5;
  for (int it = 0; it < 4000 && delivered(hi) < bits; ++it) hi *= 2.0;
  BracketedRootProblem p;
  p.evaluator = delivered;
  p.target = bits;
  p.lo = lo;
  p.hi = hi;
  p.tol = 1e-12;
  return solve_monotone(p);
}

double upload_time(double energy, double gain, const SystemParams& params) {
  return rate_equation_time(energy * gain, params.model_bits, params);
}

namespace {

struct KnapsackItem {
  double value = 0.0;   // standalone slot length saved by excluding
  double weight = 0.0;  // data volume consumed from rho
  int index = 0;
};

// Exact 0/1 knapsack refinement (maximize value, capacity cap) with a
// fractional upper bound; items arrive sorted by density.
struct KnapsackSearch {
  const std::vector<KnapsackItem>& items;
  double cap;
  double best_value = 0.0;
  std::vector<char> best_take;
  std::vector<char> take;
  long long nodes = 0;
  static constexpr long long kNodeBudget = 4'000'000;

  explicit KnapsackSearch(const std::vector<KnapsackItem>& it, double c)
      : items(it), cap(c), best_take(it.size(), 0), take(it.size(), 0) {}

  double fractional_bound(std::size_t i, double room) const {
    double bound = 0.0;
    for (; i < items.size(); ++i) {
      if (items[i].weight <= room) {
        room -= items[i].weight;
        bound += items[i].value;
      } else {
        bound += items[i].value * room / items[i].weight;
        break;
      }
    }
    return bound;
  }

  void dfs(std::size_t i, double room, double value) {
    if (++nodes > kNodeBudget) return;
    if (value > best_value) {
      best_value = value;
      best_take.assign(take.begin(), take.end());
      std::fill(best_take.begin() + i, best_take.end(), 0);
    }
    if (i >= items.size()) return;
    if (value + fractional_bound(i, room) <= best_value * (1.0 + 1e-15)) return;
    if (items[i].weight <= room) {
      take[i] = 1;
      dfs(i + 1, room - items[i].weight, value + items[i].value);
      take[i] = 0;
    }
    dfs(i + 1, room, value);
  }
};

}  // namespace

Schedule schedule_devices(const std::vector<double>& standalone_times,
                          const std::vector<std::int64_t>& samples, double rho) {
  const std::size_t K = standalone_times.size();
  Schedule out = Schedule::all_on(K);

  double forced_volume = 0.0;
  std::vector<KnapsackItem> items;
  for (std::size_t k = 0; k < K; ++k) {
    if (!std::isfinite(standalone_times[k])) {
      out.a[k] = 0;
      forced_volume += static_cast<double>(samples[k]);
    } else {
      items.push_back({standalone_times[k], static_cast<double>(samples[k]),
                       static_cast<int>(k)});
    }
  }
  if (forced_volume > rho * (1.0 + 1e-12) + 1e-9) {
    throw InfeasibleError(
        "schedule_devices: undeliverable devices exceed the data-volume slack");
  }
  const double cap = std::max(0.0, rho - forced_volume);
  if (items.empty() || cap <= 0.0) return out;

  std::sort(items.begin(), items.end(), [](const KnapsackItem& a, const KnapsackItem& b) {
    return a.value * b.weight > b.value * a.weight;
  });

  // Dual threshold: exclude k iff time_k > lambda * D_k; the smallest
  // feasible multiplier is found by bisection, ties staying scheduled.
  double lambda_hi = 0.0;
  for (const auto& it : items) lambda_hi = std::max(lambda_hi, it.value / it.weight);
  lambda_hi = lambda_hi * (1.0 + 1e-9) + 1e-300;
  double lambda_lo = 0.0;
  auto excluded_volume = [&](double lambda) {
    double vol = 0.0;
    for (const auto& it : items) {
      if (it.value - lambda * it.weight > 0.0) vol += it.weight;
    }
    return vol;
  };
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lambda_lo + lambda_hi);
    if (excluded_volume(mid) <= cap) {
      lambda_hi = mid;
    } else {
      lambda_lo = mid;
    }
  }

  std::vector<char> excluded(items.size(), 0);
  double used = 0.0;
  double incumbent = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].value - lambda_hi * items[i].weight > 0.0 &&
        used + items[i].weight <= cap) {
      excluded[i] = 1;
      used += items[i].weight;
      incumbent += items[i].value;
    }
  }
  // Greedy repair: spend whatever slack the threshold left.
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!excluded[i] && used + items[i].weight <= cap) {
      excluded[i] = 1;
      used += items[i].weight;
      incumbent += items[i].value;
    }
  }

  // The single-constraint LP can round badly at one fractional corner;
  // close the gap exactly.
  KnapsackSearch search(items, cap);
  search.best_value = incumbent;
  search.best_take.assign(excluded.begin(), excluded.end());
  search.dfs(0, cap, 0.0);

  for (std::size_t i = 0; i < items.size(); ++i) {
    if (search.best_take[i]) out.a[items[i].index] = 0;
  }
  return out;
}

std::pair<double, double> tau_loc_bounds(const std::vector<DeviceProfile>& devices,
                                         const std::vector<double>& gains,
                                         const SystemParams& params, double rho) {
  double tau_low = 0.0;
  double hopeless_volume = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < devices.size(); ++k) {
    const double floor = gains[k] > 0.0 ? upload_energy_floor(gains[k], params) : kInf;
    const double denom = devices[k].energy_budget_j - floor;
    if (denom <= 0.0) {
      hopeless_volume += static_cast<double>(devices[k].samples);
      continue;
    }
    const double cycles = devices[k].workload_cycles();
    tau_low = std::max(tau_low, std::sqrt(params.energy_coeff * cycles * cycles *
                                          cycles / denom));
    any = true;
  }
  if (hopeless_volume > rho * (1.0 + 1e-12) + 1e-9) {
    throw InfeasibleError(
        "tau_loc_bounds: devices that can never upload exceed the data-volume slack");
  }
  if (!any) {
    throw InfeasibleError("tau_loc_bounds: no device can ever upload");
  }

  // The inner optimum diverges at tau_low exactly (the binding device's
  // slot length goes to infinity), so the upper bound is evaluated a hair
  // above it; any feasible probe upper-bounds the optimal objective.
  double probe = tau_low * (1.0 + 1e-6);
  for (int attempt = 0; attempt < 60; ++attempt) {
    const auto inner = tdma_inner(devices, gains, params, rho, probe);
    if (inner.feasible && std::isfinite(inner.upload_total)) {
      return {tau_low, probe + inner.upload_total};
    }
    probe *= 2.0;
  }
  throw InfeasibleError("tau_loc_bounds: no feasible local-time candidate found");
}

ProtocolSolution solve_tdma(const ChannelRealization& ch,
                            const std::vector<DeviceProfile>& devices,
                            const SystemParams& params, double rho,
                            const SolverOptions& opts) {
  params.validate();
  const std::size_t K = devices.size();

  ProtocolSolution sol;
  sol.protocol = Protocol::TDMA;
  sol.schedule = Schedule::all_off(K);
  sol.upload_times.assign(K, 0.0);
  sol.frequencies.assign(K, 0.0);
  sol.upload_energies.assign(K, 0.0);
  sol.gains.assign(K, 0.0);
  sol.phases.resize(K);

  std::vector<double> gains(K);
  for (std::size_t k = 0; k < K; ++k) {
    if (opts.phase_mode == PhaseMode::Random) {
      sol.phases[k] = detail::random_unit_vector(
          ch.num_elements, opts.random_phase_seed * 0x9e3779b97f4a7c15ull + k);
      gains[k] = effective_gain(ch, static_cast<int>(k), sol.phases[k]);
    } else {
      auto aligned = align_phases(ch, static_cast<int>(k));
      gains[k] = aligned.gain;
      sol.phases[k] = std::move(aligned.v);
    }
    sol.gains[k] = gains[k];
  }

  if (rho >= total_samples(devices) - 1e-9) {
    sol.empty_schedule = true;
    sol.latency_trace = {0.0};
    return sol;
  }

  const auto [tau_low, tau_up] = tau_loc_bounds(devices, gains, params, rho);
  auto objective = [&](double tau) {
    const auto inner = tdma_inner(devices, gains, params, rho, tau);
    return inner.feasible ? tau + inner.upload_total : kInf;
  };
  const auto [tau_best, latency] = detail::minimize_scalar(
      objective, tau_low, tau_up, opts.grid_points, opts.golden_tol);
  if (!std::isfinite(latency)) {
    throw InfeasibleError("solve_tdma: no feasible tau_loc in the bracket");
  }

  const auto inner = tdma_inner(devices, gains, params, rho, tau_best);
  sol.schedule = inner.schedule;
  sol.local_time = tau_best;
  sol.upload_total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!inner.schedule.scheduled(k)) continue;
    sol.upload_times[k] = inner.times[k];
    sol.upload_energies[k] = inner.energies[k];
    sol.frequencies[k] = devices[k].workload_cycles() / tau_best;
    sol.upload_total += inner.times[k];
  }
  sol.total_latency = sol.upload_total + sol.local_time;
  sol.latency_trace = {sol.total_latency};
  return sol;
}

}  // namespace irsfl
