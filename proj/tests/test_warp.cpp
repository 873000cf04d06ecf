#include <doctest.h>

#include <cmath>

#include "sgeo/errors.hpp"
#include "sgeo/warp.hpp"

using namespace sgeo;

TEST_SUITE("warp") {

TEST_CASE("power warps are conical at alpha 1 and cuspidal above") {
  CHECK(make_power_warp(1.0, 1.5).kind() == WarpKind::conical);
  CHECK(make_power_warp(2.0, 1.5).kind() == WarpKind::cuspidal);
  CHECK_THROWS_AS(make_power_warp(0.5, 1.5), InvalidInput);
  CHECK_THROWS_AS(make_power_warp(2.0, -1.0), InvalidInput);
}

TEST_CASE("power warp values and inverse") {
  const auto wf = make_power_warp(2.0, 1.5);
  CHECK(wf.f(0.3) == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(wf.f_prime(0.3) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(wf.F(0.09) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(wf.log_derivative(0.3) == doctest::Approx(2.0 / 0.3).epsilon(1e-14));
  CHECK(wf.frakF_closed_form(4.0) == doctest::Approx(std::pow(4.0, -0.5)));
}

TEST_CASE("every convex family validates on its sampling grid") {
  const WarpingFunction families[] = {
      make_power_warp(1.0, 1.5),
      make_power_warp(1.5, 1.2),
      make_power_warp(3.0, 1.0),
      make_exp_warp(ExpFamily::exp_inverse_power, 1.0, 0.5),
      make_exp_warp(ExpFamily::exp_inverse_power, 2.0, 0.5),
      make_exp_warp(ExpFamily::log_power, 2.0, 0.3),
  };
  for (const auto& wf : families) {
    CAPTURE(wf.label());
    const auto v = validate_warp(wf);
    CHECK(v.increasing);
    CHECK(v.round_trip);
    CHECK(v.derivative);
    CHECK(v.convex);
    CHECK(v.f_over_x_bound);
  }
}

TEST_CASE("f(x) <= x f'(x) on a dense grid for convex families") {
  for (const auto& wf : {make_power_warp(2.0, 1.5), make_exp_warp(ExpFamily::log_power, 2.0, 0.3)}) {
    for (const double x : sample_grid(wf, 2000)) CHECK(wf.f(x) <= x * wf.f_prime(x) * (1.0 + 1e-12));
  }
}

TEST_CASE("exponential families reject radii past convexity") {
  const double rmax = max_convex_radius(ExpFamily::exp_inverse_power, 1.0);
  CHECK(rmax == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_THROWS_AS(make_exp_warp(ExpFamily::exp_inverse_power, 1.0, 0.6), InvalidInput);
  CHECK_THROWS_AS(make_exp_warp(ExpFamily::log_power, 1.0, 0.1), InvalidInput);
  try {
    make_exp_warp(ExpFamily::exp_inverse_power, 1.0, 0.6);
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("0.5") != std::string::npos);
  }
}

TEST_CASE("exponential families keep logarithms where f underflows") {
  const auto wf = make_exp_warp(ExpFamily::exp_inverse_power, 1.0, 0.5);
  CHECK(wf.log_f(1e-3) == doctest::Approx(-1000.0));
  CHECK(wf.log_derivative(1e-3) == doctest::Approx(1e6));
  CHECK(wf.lower_sampling_bound() == doctest::Approx(1.0 / 600.0).epsilon(1e-6));
}

TEST_CASE("log-power convexity check passes at mu 2 and R 0.3") {
  const auto wf = make_exp_warp(ExpFamily::log_power, 2.0, 0.3);
  CHECK(is_convex_on_grid([&](double x) { return wf.f(x); }, sample_grid(wf)));
}

TEST_CASE("oscillating F is positive, increasing and concave above the threshold") {
  const auto wf = make_oscillating_F(0.5, 9.0);
  CHECK(wf.kind() == WarpKind::oscillating_counterexample);
  CHECK(oscillating_threshold(0.5) == doctest::Approx(9.0));
  CHECK_THROWS_AS(make_oscillating_F(0.5, 8.5), InvalidInput);
  double prev = 0.0, prev_slope = INFINITY;
  for (int i = 1; i <= 400; ++i) {
    const double x = std::pow(10.0, -8.0 + 8.0 * i / 400.0);
    CHECK(wf.F(x) > prev);
    CHECK(wf.F_prime(x) <= prev_slope * (1.0 + 1e-12));
    prev = wf.F(x);
    prev_slope = wf.F_prime(x);
  }
  CHECK(wf.radius() == doctest::Approx(9.0));
  CHECK_FALSE(wf.convex_family());
}

TEST_CASE("sqrt warp is the concave experiment") {
  const auto wf = make_concave_sqrt_warp(1.0);
  CHECK(wf.kind() == WarpKind::concave_experimental);
  CHECK_FALSE(wf.convex_family());
  CHECK(wf.f(0.25) == doctest::Approx(0.5));
  CHECK(wf.F(0.5) == doctest::Approx(0.25));
}

TEST_CASE("warp specs parse and normalise") {
  CHECK(parse_warp_spec("power:2", 1.5).label() == "power:2");
  CHECK(normalize_warp_spec("power:2.0") == "power:2");
  CHECK(normalize_warp_spec("expinv:1.000") == "expinv:1");
  CHECK(parse_warp_spec("osc:0.5:9", 0.0).kind() == WarpKind::oscillating_counterexample);
  CHECK(parse_warp_spec("sqrt", 1.0).kind() == WarpKind::concave_experimental);
  CHECK_THROWS_AS(parse_warp_spec("power", 1.5), InvalidInput);
  CHECK_THROWS_AS(parse_warp_spec("power:x", 1.5), InvalidInput);
  CHECK_THROWS_AS(parse_warp_spec("bogus:1", 1.5), InvalidInput);
}

}
