#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "irsfl/math_kernels.hpp"
#include "irsfl/rng.hpp"

using irsfl::BracketedRootProblem;
using irsfl::lambert_w_m1;
using irsfl::solve_monotone;

namespace {

// Independent oracle: bisection on w e^w = x over (-700, -1], then two
// Newton polish steps.
double lambert_oracle(double x) {
  auto f = [x](double w) { return w * std::exp(w) - x; };
  double lo = -700.0, hi = -1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    // w e^w decreases on w <= -1, so f(lo) >= 0 >= f(hi).
    if (f(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double w = 0.5 * (lo + hi);
  for (int it = 0; it < 2; ++it) {
    const double deriv = std::exp(w) * (1.0 + w);
    if (deriv != 0.0) w -= f(w) / deriv;
  }
  return w;
}

}  // namespace

TEST_SUITE("math_kernels") {

TEST_CASE("lambert branch point maps to -1") {
  CHECK(lambert_w_m1(-std::exp(-1.0)) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("lambert inverts w = -2") {
  const double x = -2.0 * std::exp(-2.0);
  CHECK(lambert_w_m1(x) == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("lambert matches the bisection oracle at x = -0.05") {
  // Frozen from the oracle below (and cross-checked against mpmath).
  const double expected = -4.499755288523487536;
  CHECK(lambert_oracle(-0.05) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(lambert_w_m1(-0.05) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("lambert domain errors") {
  CHECK_THROWS_AS(lambert_w_m1(-0.5), std::domain_error);
  CHECK_THROWS_AS(lambert_w_m1(0.0), std::domain_error);
  CHECK_THROWS_AS(lambert_w_m1(1e-3), std::domain_error);
}

TEST_CASE("lambert residual property on 1000 random points") {
  irsfl::Rng rng(7);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = -rng.uniform() * std::exp(-1.0);
  for (double x : xs) {
    const double w = lambert_w_m1(x);
    CHECK(w <= -1.0);
    CHECK(std::fabs(w * std::exp(w) - x) <= 1e-10 * std::fabs(x));
  }
  SUBCASE("monotone increasing on its domain") {
    std::sort(xs.begin(), xs.end());
    double prev = lambert_w_m1(xs.front());
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double cur = lambert_w_m1(xs[i]);
      CHECK(cur >= prev - 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("solve_monotone on trivial problems") {
  BracketedRootProblem p;
  p.evaluator = [](double x) { return x; };
  p.target = 0.5;
  p.lo = 0.0;
  p.hi = 1.0;
  p.tol = 1e-12;
  CHECK(solve_monotone(p) == doctest::Approx(0.5).epsilon(1e-12));

  p.evaluator = [](double x) { return x * x; };
  p.target = 4.0;
  p.lo = 0.0;
  p.hi = 10.0;
  CHECK(solve_monotone(p) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("solve_monotone matches the cross-checked rate-shaped root") {
  BracketedRootProblem p;
  p.evaluator = [](double x) { return x * std::log2(1.0 + 1.0 / x); };
  p.target = 0.9;
  p.lo = 1e-9;
  p.hi = 1e3;
  p.tol = 1e-12;
  const double root = solve_monotone(p);
  // Frozen from the same bisection at tol 1e-12, cross-checked at 1e-10.
  CHECK(root == doctest::Approx(0.70916454310186352282).epsilon(1e-10));
  p.tol = 1e-10;
  CHECK(solve_monotone(p) == doctest::Approx(root).epsilon(1e-9));
  CHECK(root >= p.lo);
  CHECK(root <= p.hi);
}

TEST_CASE("solve_monotone rejects brackets without a sign change") {
  BracketedRootProblem p;
  p.evaluator = [](double x) { return x; };
  p.target = 5.0;
  p.lo = 0.0;
  p.hi = 1.0;
  CHECK_THROWS_AS(solve_monotone(p), std::invalid_argument);
}

TEST_CASE("solve_monotone handles decreasing evaluators") {
  BracketedRootProblem p;
  p.evaluator = [](double x) { return 1.0 / x; };
  p.target = 0.25;
  p.lo = 1.0;
  p.hi = 10.0;
  p.tol = 1e-12;
  CHECK(solve_monotone(p) == doctest::Approx(4.0).epsilon(1e-10));
}

}  // TEST_SUITE
