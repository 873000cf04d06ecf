#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sgeo/errors.hpp"
#include "sgeo/experiments.hpp"

using namespace sgeo;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("default ladders") {
  const auto power = default_delta_ladder(make_power_warp(2.0, 1.5));
  CHECK(power.front() == doctest::Approx(0.3));
  CHECK(power.back() == doctest::Approx(1e-4));
  CHECK(power.size() == 8);
  for (std::size_t i = 1; i < power.size(); ++i) CHECK(power[i] < power[i - 1]);
  const auto expinv = default_delta_ladder(make_exp_warp(ExpFamily::exp_inverse_power, 1.0, 0.5));
  CHECK(expinv.back() >= 1e-3);
  CHECK(expinv.back() == doctest::Approx(1.0 / 600.0).epsilon(1e-6));
}

TEST_CASE("cone sweep is near exact") {
  const auto wf = make_power_warp(1.0, 1.5);
  const auto cs = circle_section(kTwoPi, {}, 1.5);
  const std::vector<double> deltas = {0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3};
  const auto res = delta_sweep(wf, cs, deltas, default_launch(cs));
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double d = deltas[i];
    CHECK(res.normalized[i] == doctest::Approx(2.0 * std::atan(std::sqrt(2.25 - d * d) / d)).epsilon(1e-9));
  }
  CHECK(res.errors_rel.back() < 1e-3);
  CHECK(res.converged);
}

TEST_CASE("power 2 sweep approaches B(3/4, 1/2)") {
  const auto wf = make_power_warp(2.0, 1.5);
  const auto cs = circle_section(kTwoPi, {}, 1.5);
  const auto res = delta_sweep(wf, cs, default_delta_ladder(wf), default_launch(cs));
  CHECK(res.converged);
  CHECK(std::abs(res.extrapolated_limit / 2.39628046947118441 - 1.0) < 0.02);
  CHECK(res.errors_rel.back() < 0.02);
  for (std::size_t i = 0; i < res.deltas.size(); ++i) {
    if (res.deltas[i] < 0.01) {
      CHECK(res.normalized[i] >= 2.0 - 0.1);
      CHECK(res.normalized[i] <= std::numbers::pi + 0.1);
    }
  }
}

TEST_CASE("expinv sweep approaches 2") {
  const auto wf = make_exp_warp(ExpFamily::exp_inverse_power, 1.0, 0.5);
  const auto cs = circle_section(kTwoPi, {}, 0.5);
  const auto res = delta_sweep(wf, cs, default_delta_ladder(wf), default_launch(cs));
  CHECK(std::abs(res.extrapolated_limit / 2.0 - 1.0) < 0.05);
  CHECK(res.converged);
}

TEST_CASE("oscillating warp sweep is flagged not converged") {
  const auto wf = make_oscillating_F(0.5, 9.0);
  const auto cs = circle_section(kTwoPi, {}, wf.radius());
  const auto res = delta_sweep(wf, cs, default_delta_ladder(wf), default_launch(cs));
  CHECK_FALSE(res.converged);
  CHECK(std::isnan(res.reference_Cf));
  CHECK_FALSE(res.note.empty());
}

TEST_CASE("sweep rejects bad ladders") {
  const auto wf = make_power_warp(2.0, 1.5);
  const auto cs = circle_section(kTwoPi, {}, 1.5);
  const auto l = default_launch(cs);
  CHECK_THROWS_AS(delta_sweep(wf, cs, {}, l), InvalidInput);
  CHECK_THROWS_AS(delta_sweep(wf, cs, {0.1, 0.2}, l), InvalidInput);
  CHECK_THROWS_AS(delta_sweep(wf, cs, {2.0}, l), InvalidInput);
}

TEST_CASE("serial and parallel sweeps are bit identical") {
  const auto wf = make_power_warp(3.0, 1.0);
  const auto cs = sphere_section({}, 1.0);
  const auto ladder = default_delta_ladder(wf);
  const auto a = delta_sweep(wf, cs, ladder, default_launch(cs), {}, Execution::serial);
  const auto b = delta_sweep(wf, cs, ladder, default_launch(cs), {}, Execution::parallel);
  CHECK(a.lengths == b.lengths);
  CHECK(a.normalized == b.normalized);
  CHECK(a.extrapolated_limit == b.extrapolated_limit);
}

TEST_CASE("richardson tail recovers a power-law limit") {
  std::vector<double> d, v;
  for (int k = 0; k < 8; ++k) {
    d.push_back(0.3 * std::pow(10.0, -0.5 * k));
    v.push_back(2.5 - 0.7 * std::pow(d.back(), 1.5));
  }
  const auto ex = richardson_tail(d, v, 4, 1e-14);
  CHECK(ex.ok);
  CHECK(ex.rate == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(ex.limit == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("richardson tail treats a flat tail as converged") {
  const auto ex = richardson_tail({0.3, 0.1, 0.03, 0.01}, {2.0, 2.0, 2.0, 2.0}, 4, 1e-8);
  CHECK(ex.ok);
  CHECK(ex.limit == 2.0);
}

TEST_CASE("radial bounds on the cone and the perturbed circle") {
  const auto wf = make_power_warp(1.0, 1.5);
  for (const double a : {0.0, 0.1}) {
    const auto cs = circle_section(kTwoPi, {a, 0.0}, 1.5);
    const auto l = default_launch(cs);
    const auto traj = integrate(wf, cs, launch_winding(wf, cs, 0.3, l.y0, l.v0));
    const auto rep = verify_radial_bounds(traj, 0.3, cs.c_bound(), 1.5);
    CHECK(rep.passed);
    CHECK(rep.checked > 100);
  }
}

TEST_CASE("radial bounds catch a wrong delta") {
  const auto wf = make_power_warp(2.0, 1.5);
  const auto cs = circle_section(kTwoPi, {}, 1.5);
  const auto l = default_launch(cs);
  const auto traj = integrate(wf, cs, launch_winding(wf, cs, 0.3, l.y0, l.v0));
  CHECK_FALSE(verify_radial_bounds(traj, 0.1, 0.0, 1.5).passed);
}

TEST_CASE("radial bounds skip radial rays") {
  const auto wf = make_power_warp(2.0, 1.5);
  const auto cs = circle_section(kTwoPi, {}, 1.5);
  const auto traj = integrate(wf, cs, launch_radial(cs, 0.3, default_launch(cs).y0, true));
  const auto rep = verify_radial_bounds(traj, 0.3, 0.0, 1.5);
  CHECK(rep.skipped);
  CHECK_FALSE(rep.note.empty());
}

TEST_CASE("conservation report on the perturbed circle") {
  const auto wf = make_power_warp(2.0, 1.5);
  const auto cs = circle_section(kTwoPi, {0.1, 0.0}, 1.5);
  const auto l = default_launch(cs);
  const auto traj = integrate(wf, cs, launch_winding(wf, cs, 0.05, l.y0, l.v0));
  const auto rep = check_conservation(traj, cs.c_bound());
  CHECK(rep.max_shell_residual < 1e-9);
  CHECK(rep.worst_log_eta_excess <= 1e-6);
  CHECK_FALSE(rep.u_checked);
}

TEST_CASE("u grows at least at unit rate in the warped convex case") {
  const auto wf = make_power_warp(2.0, 1.5);
  const auto cs = circle_section(kTwoPi, {}, 1.5);
  const auto l = default_launch(cs);
  const auto rep = check_conservation(integrate(wf, cs, launch_winding(wf, cs, 0.05, l.y0, l.v0)), 0.0);
  CHECK(rep.u_checked);
  CHECK(rep.worst_u_rate >= 1.0 - 1e-8);
}

TEST_CASE("comparison principle examples") {
  const auto cs = circle_section(kTwoPi, {}, 1.5);
  const auto l = default_launch(cs);
  const auto cone = comparison_test(make_power_warp(1.0, 1.5), cs, 0.1, 0.2, l, l);
  CHECK(cone.passed);
  CHECK(cone.min_margin > 0.0);
  CHECK(comparison_test(make_power_warp(2.0, 1.5), cs, 0.05, 0.1, l, l).passed);
  CHECK_THROWS_AS(comparison_test(make_power_warp(2.0, 1.5), cs, 0.1, 0.1, l, l), InvalidInput);
  const auto pert = circle_section(kTwoPi, {0.1, 0.0}, 1.5);
  CHECK_THROWS_AS(comparison_test(make_power_warp(2.0, 1.5), pert, 0.05, 0.1, l, l), InvalidInput);
}

TEST_CASE("cone comparison margin matches the closed form") {
  const auto cs = circle_section(kTwoPi, {}, 1.5);
  const auto l = default_launch(cs);
  const auto rep = comparison_test(make_power_warp(1.0, 1.5), cs, 0.1, 0.2, l, l);
  const double t = rep.t_at_min;
  CHECK(rep.min_margin == doctest::Approx(std::hypot(t, 0.2) - std::hypot(t, 0.1)).epsilon(1e-7));
}

TEST_CASE("limit geodesic on the perturbed sphere") {
  const auto wf = make_power_warp(2.0, 1.5);
  const auto cs = sphere_section({0.05, 0.0}, 1.5);
  const auto rep = limit_geodesic_test(wf, cs, {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}, default_launch(cs), -2.0, 2.0);
  CHECK(rep.decreasing);
  CHECK(rep.final_below);
  CHECK(rep.sup_distances.back() < 0.05);
}

TEST_CASE("limit geodesic on the circle and the cone") {
  const auto circle = circle_section(kTwoPi, {}, 1.5);
  const auto l = default_launch(circle);
  CHECK(limit_geodesic_test(make_power_warp(2.0, 1.5), circle, {0.1, 0.01, 0.001}, l, -2.0, 2.0).passed());
  CHECK(limit_geodesic_test(make_power_warp(1.0, 1.5), circle, {0.1, 0.01, 0.001}, l, -1.2, 1.2).passed());
  CHECK_THROWS_AS(limit_geodesic_test(make_power_warp(1.0, 1.5), circle, {0.1}, l, -2.0, 2.0), InvalidInput);
  CHECK_THROWS_AS(limit_geodesic_test(make_concave_sqrt_warp(1.0), circle, {0.1}, l, -1.0, 1.0), InvalidInput);
}

TEST_CASE("limit geodesic clips wide windows with a note") {
  const auto circle = circle_section(kTwoPi, {}, 1.5);
  const auto rep = limit_geodesic_test(make_power_warp(2.0, 1.5), circle, {0.3}, default_launch(circle), -50.0, 50.0);
  CHECK_FALSE(rep.notes[0].empty());
  CHECK(rep.window_hi[0] < 50.0);
}

TEST_CASE("figure bundles") {
  const auto cone = figure1_data(FigureKind::cone);
  CHECK(std::abs(cone.swept_angle - 2.0 * std::acos(0.2)) < 1e-7);
  CHECK(cone.max_shell_residual < 1e-9);
  const auto cusp = figure1_data(FigureKind::cusp);
  CHECK(cusp.max_shell_residual < 1e-9);
  CHECK(cusp.winding_count > 0.0);
  CHECK(cusp.remark_prediction > 0.0);
  CHECK(cusp.embedded.size() == cusp.r.size());
}

TEST_CASE("small campaigns pass and are reproducible") {
  const auto a = run_bounds_campaign(24, 7, Execution::serial);
  const auto b = run_bounds_campaign(24, 7, Execution::parallel);
  CHECK(a.passed());
  REQUIRE(a.cases.size() == b.cases.size());
  for (std::size_t i = 0; i < a.cases.size(); ++i) {
    CHECK(a.cases[i].delta == b.cases[i].delta);
    CHECK(a.cases[i].margin == b.cases[i].margin);
  }
  CHECK(run_comparison_campaign(12, 7).passed());
}

TEST_CASE("verify suite on warped and perturbed sections") {
  const auto wf = make_power_warp(2.0, 1.5);
  for (const auto& spec : {"circle:6.283185307179586", "circle:6.283185307179586:pert=0.1", "sphere"}) {
    CAPTURE(spec);
    const auto cs = parse_section_spec(spec, 1.5);
    const auto rep = run_verify_suite(wf, cs, default_launch(cs));
    CHECK(rep.passed());
    CHECK(rep.items.size() >= 8);
  }
}

TEST_CASE("verify suite fails on a corrupted tolerance") {
  const auto wf = make_power_warp(2.0, 1.5);
  const auto cs = circle_section(kTwoPi, {0.1, 0.0}, 1.5);
  VerifyOptions opts;
  opts.integrator.rtol = 1e-4;
  opts.integrator.atol = 1e-6;
  CHECK_FALSE(run_verify_suite(wf, cs, default_launch(cs), opts).passed());
}

}
