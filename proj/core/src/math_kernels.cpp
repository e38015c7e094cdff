#include "irsfl/math_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace irsfl {

namespace {

// Residual of w e^w = x, kept in this form so the stopping test below is
// a direct relative-residual check.
inline double wexp_residual(double w, double x) { return w * std::exp(w) - x; }

// Halley step for f(w) = w e^w - x.
inline double halley_step(double w, double x) {
  const double ew = std::exp(w);
  const double f = w * ew - x;
  const double fp = ew * (w + 1.0);
  const double fpp = ew * (w + 2.0);
  const double denom = fp - 0.5 * f * fpp / fp;
  if (denom == 0.0 || !std::isfinite(denom)) return w;
  return w - f / denom;
}

}  // namespace

double lambert_w_m1(double x) {
  const double branch_point = -std::exp(-1.0);
  if (x < branch_point || x >= 0.0) {
    throw std::domain_error("lambert_w_m1: argument outside [-1/e, 0)");
  }
  if (x == branch_point) return -1.0;

  // Initial guess: branch-point series for arguments near -1/e, otherwise
  // the asymptotic form ln(-x) - ln(-ln(-x)) which is accurate near 0-.
  double w;
  const double radicand = std::max(0.0, 2.0 * (1.0 + std::exp(1.0) * x));
  const double q = std::sqrt(radicand);
  if (q < 0.3) {
    w = -1.0 - q - q * q / 3.0 - 11.0 / 72.0 * q * q * q;
  } else {
    const double l1 = std::log(-x);
    w = l1 - std::log(-l1);
  }

  const double tol = 1e-13 * std::fabs(x);
  for (int it = 0; it < 40; ++it) {
    if (std::fabs(wexp_residual(w, x)) <= tol) break;
    const double next = std::min(halley_step(w, x), -1.0);
    if (next == w) break;
    w = next;
  }

  if (std::fabs(wexp_residual(w, x)) > 1e-12 * std::fabs(x)) {
    // Halley stalled (only happens essentially at the branch point);
    // fall back to bisection on the monotone segment w <= -1.
    double lo = w;
    while (wexp_residual(lo, x) > 0.0 && lo > -750.0) lo = 2.0 * lo - 1.0;
    BracketedRootProblem p;
    p.evaluator = [x](double t) { return wexp_residual(t, x); };
    p.target = 0.0;
    p.lo = lo;
    p.hi = -1.0;
    p.tol = 1e-13 * std::fabs(x);
    w = solve_monotone(p);
  }
  return w;
}

double solve_monotone(const BracketedRootProblem& problem) {
  double lo = problem.lo;
  double hi = problem.hi;
  if (!(lo <= hi)) throw std::invalid_argument("solve_monotone: lo > hi");

  const double target = problem.target;
  double flo = problem.evaluator(lo) - target;
  double fhi = problem.evaluator(hi) - target;
  const double ftol =
      std::fabs(problem.tol) * std::max(1.0, std::fabs(target));

  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi)) {
    throw std::invalid_argument(
        "solve_monotone: no sign change over the bracket");
  }

  double best = 0.5 * (lo + hi);
  double fbest = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    // Secant proposal, clipped to the interior of the bracket; fall back
    // to the midpoint whenever it degenerates.
    double mid = 0.5 * (lo + hi);
    if (fhi != flo) {
      const double sec = lo - flo * (hi - lo) / (fhi - flo);
      const double margin = 0.01 * (hi - lo);
      if (sec > lo + margin && sec < hi - margin && (it % 2 == 0)) mid = sec;
    }
    const double fmid = problem.evaluator(mid) - target;
    if (std::fabs(fmid) < std::fabs(fbest)) {
      best = mid;
      fbest = fmid;
    }
    if (std::fabs(fmid) <= ftol) return mid;
    if (std::signbit(fmid) == std::signbit(flo)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
      fhi = fmid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                       std::max(std::fabs(lo), std::fabs(hi))) {
      break;
    }
  }
  return best;
}

}  // namespace irsfl
