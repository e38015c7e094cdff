#include <cmath>
#include <numbers>

#include "doctest.h"
#include "irsfl/rng.hpp"
#include "irsfl/system.hpp"
#include "test_util.hpp"

using namespace irsfl;

TEST_SUITE("system") {

TEST_CASE("local profile formulas") {
  const auto params = testutil::default_params();
  DeviceProfile dev;
  dev.samples = 1000;
  dev.cycles_per_sample = 10.0;

  CHECK(local_profile(dev, 1e5, params).time_s == doctest::Approx(0.1));
  CHECK(local_profile(dev, 1e8, params).energy_j == doctest::Approx(1e-7));

  const auto once = local_profile(dev, 2e6, params);
  const auto twice = local_profile(dev, 4e6, params);
  CHECK(twice.time_s == doctest::Approx(0.5 * once.time_s));
  CHECK(twice.energy_j == doctest::Approx(4.0 * once.energy_j));

  CHECK_THROWS_AS(local_profile(dev, 0.0, params), std::domain_error);
  CHECK_THROWS_AS(local_profile(dev, -1.0, params), std::domain_error);
}

TEST_CASE("round local time masks unscheduled devices") {
  CHECK(round_local_time(Schedule{{1, 1}}, {0.1, 0.2}) == doctest::Approx(0.2));
  CHECK(round_local_time(Schedule{{0, 1}}, {0.9, 0.2}) == doctest::Approx(0.2));
  CHECK(round_local_time(Schedule{{0, 0}}, {0.9, 0.2}) == 0.0);
}

TEST_CASE("uploaded bits basics") {
  const auto params = testutil::default_params();
  CHECK(uploaded_bits(1.0, 0.0, 1e-9, 1.0, params) == 0.0);

  SUBCASE("large-x limit approaches energy*gain / (sigma^2 ln2)") {
    const double energy = 0.1, gain = 1e-9;
    const double asym = params.bandwidth_hz * energy * gain /
                        (params.noise_power_w * std::numbers::ln2);
    const double bits = uploaded_bits(1e6, energy, gain, 1.0, params);
    CHECK(bits == doctest::Approx(asym).epsilon(1e-3));
    CHECK(bits < asym);
  }

  SUBCASE("strictly increasing in x") {
    const double energy = 0.05, gain = 3e-10;
    double x = 1e-4;
    for (int i = 0; i < 40; ++i) {
      CHECK(uploaded_bits(2.0 * x, energy, gain, 1.0, params) >
            uploaded_bits(x, energy, gain, 1.0, params));
      x *= 2.0;
    }
  }

  SUBCASE("fraction = 1 reproduces the TDMA form") {
    const double b = uploaded_bits(0.01, 0.1, 1e-9, 1.0, params);
    const double manual = params.bandwidth_hz * 0.01 *
                          std::log2(1.0 + 0.1 * 1e-9 / (0.01 * params.noise_power_w));
    CHECK(b == doctest::Approx(manual).epsilon(1e-12));
  }
}

TEST_CASE("uploaded bits is concave in x (sampled second differences)") {
  const auto params = testutil::default_params();
  const double energy = 0.1, gain = 1e-9, h = 1e-4;
  for (double x = 1e-3; x < 1.0; x *= 1.35) {
    const double second = uploaded_bits(x + h, energy, gain, 1.0, params) -
                          2.0 * uploaded_bits(x, energy, gain, 1.0, params) +
                          uploaded_bits(x - h, energy, gain, 1.0, params);
    CHECK(second <= 1e-9);
  }
}

TEST_CASE("uploaded bits is jointly concave in (x, energy)") {
  const auto params = testutil::default_params();
  const double gain = 1e-9;
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const double x1 = rng.uniform(1e-3, 1.0), e1 = rng.uniform(1e-3, 0.5);
    const double x2 = rng.uniform(1e-3, 1.0), e2 = rng.uniform(1e-3, 0.5);
    const double mid = uploaded_bits(0.5 * (x1 + x2), 0.5 * (e1 + e2), gain, 1.0, params);
    const double avg = 0.5 * (uploaded_bits(x1, e1, gain, 1.0, params) +
                              uploaded_bits(x2, e2, gain, 1.0, params));
    CHECK(mid >= avg - 1e-6 * std::max(1.0, std::fabs(avg)));
  }
}

TEST_CASE("noma prefix test reduces to single-device feasibility at m=1") {
  const auto params = testutil::default_params();
  const std::vector<double> received = {2e-12, 5e-12, 9e-12};
  // tau at which the weakest device alone delivers exactly s bits.
  double lo = 1e-6, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double bits = params.bandwidth_hz * mid *
                        std::log1p(received[0] / (mid * params.noise_power_w)) /
                        std::numbers::ln2;
    (bits < params.model_bits ? lo : hi) = mid;
  }
  const double tau = 0.5 * (lo + hi);
  CHECK(noma_prefix_ok(received, tau * (1.0 + 1e-9), 1, params));
  CHECK_FALSE(noma_prefix_ok(received, tau * (1.0 - 1e-9), 1, params));
  CHECK_FALSE(noma_prefix_ok(received, 0.0, 1, params));
}

TEST_CASE("dbm conversion") {
  CHECK(dbm_to_watts(-80.0) == doctest::Approx(1e-11).epsilon(1e-12));
  CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3).epsilon(1e-12));
}

}  // TEST_SUITE
