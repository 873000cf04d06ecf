#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sgeo/errors.hpp"
#include "sgeo/frakf.hpp"

using namespace sgeo;

namespace {

double beta_oracle(double a, double b) { return std::tgamma(a) * std::tgamma(b) / std::tgamma(a + b); }

}  // namespace

TEST_SUITE("frakf") {

TEST_CASE("C_f of the cone is pi") {
  const auto res = compute_Cf(make_power_warp(1.0, 1.5));
  CHECK(std::abs(res.value - std::numbers::pi) < 1e-8);
  CHECK(res.error_estimate < 1e-10);
}

TEST_CASE("C_f of power cusps against the Beta function") {
  // 𝔉(σ) = σ^{1/α − 1}, so C_f = B(1 − 1/(2α), 1/2).
  for (const double alpha : {1.5, 2.0, 3.0, 5.0}) {
    CAPTURE(alpha);
    const double oracle = beta_oracle(1.0 - 0.5 / alpha, 0.5);
    CHECK(std::abs(compute_Cf(make_power_warp(alpha, 1.5)).value - oracle) < 1e-9);
  }
  CHECK(std::abs(beta_oracle(0.75, 0.5) - 2.39628046947118441) < 1e-14);
}

TEST_CASE("C_f of the exponential cusps is 2") {
  CHECK(std::abs(compute_Cf(make_exp_warp(ExpFamily::exp_inverse_power, 1.0, 0.5)).value - 2.0) < 1e-6);
  CHECK(std::abs(compute_Cf(make_exp_warp(ExpFamily::log_power, 2.0, 0.3)).value - 2.0) < 1e-6);
}

TEST_CASE("C_f stays within [2, pi] for convex families") {
  for (const double alpha : {1.0, 1.1, 1.5, 2.0, 4.0, 10.0}) {
    const double c = compute_Cf(make_power_warp(alpha, 1.0)).value;
    CHECK(c >= 2.0 - 1e-10);
    CHECK(c <= std::numbers::pi + 1e-10);
  }
}

TEST_CASE("C_f decreases as the cusp sharpens") {
  double prev = INFINITY;
  for (const double alpha : {1.0, 1.5, 2.0, 3.0, 6.0}) {
    const double c = compute_Cf(make_power_warp(alpha, 1.0)).value;
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("ladder estimate matches the closed form for power warps") {
  const auto wf = make_power_warp(2.0, 1.5);
  for (const double sigma : {1.5, 4.0, 20.0}) {
    const auto est = estimate_frakF(wf, sigma);
    CHECK(est.verdict == FrakFVerdict::converged);
    CHECK(est.value == doctest::Approx(std::pow(sigma, -0.5)).epsilon(1e-8));
  }
}

TEST_CASE("exponential cusps have frakF equal to 1/sigma") {
  const auto wf = make_exp_warp(ExpFamily::exp_inverse_power, 1.0, 0.5);
  CHECK(frakF(wf, 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("oscillating counterexample fails off the lattice log sigma in 2 pi N") {
  const auto wf = make_oscillating_F(0.5, 9.0);
  const auto off = estimate_frakF(wf, std::exp(std::numbers::pi));
  CHECK(off.verdict == FrakFVerdict::oscillating);
  const double sigma = std::exp(2.0 * std::numbers::pi);
  const auto on = estimate_frakF(wf, sigma);
  CHECK(on.verdict == FrakFVerdict::converged);
  CHECK(on.value == doctest::Approx(std::pow(sigma, -0.5)).epsilon(1e-6));
  CHECK_THROWS_AS(compute_Cf(wf), NonOscillationError);
  CHECK_THROWS_AS(frakF(wf, std::exp(1.0)), NonOscillationError);
}

TEST_CASE("C_f monotone under f = O(f~)") {
  const auto rep = check_Cf_monotonicity(make_power_warp(3.0, 1.0), make_power_warp(2.0, 1.0));
  CHECK(rep.passed);
  CHECK(rep.Cf_small <= rep.Cf_big);
  CHECK(rep.worst_frakF_excess <= 1e-6);
  CHECK_THROWS_AS(check_Cf_monotonicity(make_power_warp(2.0, 1.0), make_power_warp(3.0, 1.0)), InvalidInput);
}

TEST_CASE("C_f rejects bad tolerances") {
  CHECK_THROWS_AS(compute_Cf(make_power_warp(2.0, 1.5), 0.0), InvalidInput);
  CHECK_THROWS_AS(compute_Cf(make_power_warp(2.0, 1.5), -1.0), InvalidInput);
}

}
