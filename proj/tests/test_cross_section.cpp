#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sgeo/cross_section.hpp"
#include "sgeo/errors.hpp"
#include "sgeo/warp.hpp"

using namespace sgeo;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

TEST_SUITE("cross_section") {

TEST_CASE("unperturbed sections are warped with c = 0") {
  const auto circle = circle_section(kTwoPi, {}, 1.5);
  CHECK(circle.warped());
  CHECK(circle.c_bound() == 0.0);
  const auto sphere = sphere_section({}, 1.5);
  CHECK(sphere.warped());
  CHECK(sphere.c_bound() == 0.0);
}

TEST_CASE("perturbed circle carries a positive c with safety margin") {
  const auto cs = circle_section(kTwoPi, {0.1, 0.0}, 1.5);
  CHECK_FALSE(cs.warped());
  CHECK(cs.sampled_c() > 0.0);
  CHECK(cs.c_bound() == doctest::Approx(1.25 * cs.sampled_c()));
  CHECK(cs.radius() * cs.c_bound() < 1.0);
}

TEST_CASE("c bound dominates the generalized eigenvalue at random points") {
  const auto cs = sphere_section({0.05, 0.3}, 1.5);
  for (int i = 0; i < 200; ++i) {
    const double r = 1.5 * (i + 0.5) / 200.0;
    const auto y = make_point(cs, {0.3 + 2.5 * i / 200.0, 0.1 * i});
    const SMat h = cs.metric(r, y);
    const SMat dh = cs.d_r_metric(r, y);
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(dh, h);
    CHECK(0.5 * es.eigenvalues().cwiseAbs().maxCoeff() <= cs.c_bound());
  }
}

TEST_CASE("sections reject large R c and degenerate scale") {
  CHECK_THROWS_AS(circle_section(kTwoPi, {0.6, 0.0}, 1.5), InvalidInput);
  CHECK_THROWS_AS(circle_section(kTwoPi, {0.3, 2.0}, 1.5), InvalidInput);
  CHECK_THROWS_AS(circle_section(-1.0, {}, 1.5), InvalidInput);
}

TEST_CASE("d_r metric matches centred differences") {
  const auto cs = sphere_section({0.05, 0.2}, 1.5);
  const auto y = make_point(cs, {1.1, 0.4});
  const double r = 0.7, h = 1e-6;
  const SMat fd = (cs.metric(r + h, y) - cs.metric(r - h, y)) / (2.0 * h);
  CHECK((fd - cs.d_r_metric(r, y)).norm() < 1e-8);
}

TEST_CASE("d_y metric matches centred differences in both charts") {
  const auto cs = sphere_section({0.05, 0.2}, 1.5);
  for (const int chart : {0, 1}) {
    SectionPoint y;
    y.chart = chart;
    y.coords.resize(2);
    y.coords << 1.2, 0.7;
    for (int k = 0; k < 2; ++k) {
      SectionPoint a = y, b = y;
      a.coords[k] += 1e-6;
      b.coords[k] -= 1e-6;
      const SMat fd = (cs.metric(0.4, a) - cs.metric(0.4, b)) / 2e-6;
      CHECK((fd - cs.d_y_metric(0.4, y, k)).norm() < 1e-8);
    }
  }
}

TEST_CASE("sphere rechart preserves the point and covector pairing") {
  const auto cs = sphere_section({}, 1.5);
  SectionPoint y;
  y.chart = 0;
  y.coords.resize(2);
  y.coords << 0.2, 1.0;
  SVec eta(2), v(2);
  eta << 0.3, -0.7;
  v << 0.5, 0.25;
  const double pairing = eta.dot(v);
  const auto x = cs.model().embed(y);
  SectionPoint z = y;
  SVec eta2 = eta, v2 = v;
  REQUIRE(cs.model().rechart(z, eta2, &v2));
  CHECK(z.chart == 1);
  CHECK((cs.model().embed(z) - x).norm() < 1e-14);
  CHECK(eta2.dot(v2) == doctest::Approx(pairing).epsilon(1e-12));
  CHECK(cs.vector_norm_sq(0.0, z, v2) == doctest::Approx(cs.vector_norm_sq(0.0, y, v)).epsilon(1e-12));
}

TEST_CASE("closed-form base geodesics agree with numerical ones") {
  const auto circle = circle_section(kTwoPi, {0.05, 0.5}, 1.0);
  const auto lc = default_launch(circle);
  for (const double tau : {0.5, 2.0, 7.0}) {
    const auto a = base_geodesic(circle, lc.y0, lc.v0, tau);
    const auto b = base_geodesic_numeric(circle, lc.y0, lc.v0, tau);
    CHECK(circle.model().base_distance(a, b) < 1e-9);
  }
  const auto sphere = sphere_section({}, 1.0);
  const auto ls = make_launch(sphere, {1.0, 0.3}, {0.4, 0.9});
  for (const double tau : {0.5, 2.0, 7.0}) {
    const auto a = base_geodesic(sphere, ls.y0, ls.v0, tau);
    const auto b = base_geodesic_numeric(sphere, ls.y0, ls.v0, tau);
    CHECK(sphere.model().base_distance(a, b) < 1e-9);
  }
}

TEST_CASE("great circle closes after 2 pi") {
  const auto sphere = sphere_section({}, 1.0);
  const auto ls = make_launch(sphere, {0.9, 0.2}, {1.0, 0.0});
  const auto back = base_geodesic(sphere, ls.y0, ls.v0, kTwoPi);
  CHECK(sphere.model().base_distance(back, ls.y0) < 1e-12);
}

TEST_CASE("mean curvature of the warped slices is -dim f'/f") {
  const auto wf = make_power_warp(2.0, 1.5);
  const auto cs = sphere_section({}, 1.5);
  const auto y = default_launch(cs).y0;
  CHECK(mean_curvature_scalar(cs, wf, 0.5, y) == doctest::Approx(-2.0 * 2.0 / 0.5));
}

TEST_CASE("section specs parse and normalise") {
  CHECK(normalize_section_spec("circle:6.283185307179586:pert=0.10") == "circle:6.283185307179586:pert=0.1");
  CHECK(normalize_section_spec("sphere") == "sphere");
  CHECK(parse_section_spec("sphere:pert=0.05", 1.5).dim() == 2);
  CHECK_THROWS_AS(parse_section_spec("torus", 1.5), InvalidInput);
  CHECK_THROWS_AS(parse_section_spec("circle:1:wobble=2", 1.5), InvalidInput);
}

}
