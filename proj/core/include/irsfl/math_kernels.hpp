#ifndef IRSFL_MATH_KERNELS_HPP_
#define IRSFL_MATH_KERNELS_HPP_

#include <functional>

namespace irsfl {

/// Secondary real branch W_{-1} of the Lambert W function on [-1/e, 0).
///
/// Returns the w <= -1 satisfying w * exp(w) = x to a relative residual
/// of about 1e-13. Throws std::domain_error outside [-1/e, 0).
double lambert_w_m1(double x);

/// A scalar root problem on a bracket where the evaluator is strictly
/// monotone (either direction) and evaluator(lo), evaluator(hi) straddle
/// the target.
struct BracketedRootProblem {
  std::function<double(double)> evaluator;
  double target = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  /// Relative tolerance on the function value; the solver stops once
  /// |evaluator(x) - target| <= tol * max(1, |target|) or the bracket
  /// has collapsed to machine precision.
  double tol = 1e-12;
};

/// Safeguarded bisection with secant acceleration. The returned root is
/// always inside [lo, hi]; every accepted step keeps a sign change in
/// the bracket, so the bisection answer is authoritative even when the
/// secant step is rejected. Throws std::invalid_argument when the
/// endpoints do not straddle the target.
double solve_monotone(const BracketedRootProblem& problem);

}  // namespace irsfl

#endif  // IRSFL_MATH_KERNELS_HPP_
