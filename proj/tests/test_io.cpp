#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "sgeo/errors.hpp"
#include "sgeo/io.hpp"
#include "sgeo/profile.hpp"

using namespace sgeo;

namespace {

std::string fixture(const char* name) { return std::string(SGEO_FIXTURE_DIR) + "/" + name; }

RunConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RunConfig c;
  const char* warps[] = {"power:1", "power:2.5", "expinv:1", "logpow:2", "sqrt", "osc:0.5:9"};
  const char* sections[] = {"circle:6.283185307179586", "circle:3:pert=0.05", "sphere", "sphere:pert=0.02:offset=0.1"};
  c.warp = warps[rng() % std::size(warps)];
  c.section = sections[rng() % std::size(sections)];
  c.R = u(rng) < 0.5 ? 0.0 : 0.2 + u(rng);
  c.delta = 0.3 * u(rng);
  for (int i = static_cast<int>(rng() % 4); i > 0; --i) c.deltas.push_back(std::pow(10.0, -4.0 * u(rng)));
  if (u(rng) < 0.5) {
    c.y0 = {u(rng)};
    c.v0 = {1.0 / 3.0};
  }
  c.radial = u(rng) < 0.3;
  c.direction = u(rng) < 0.5 ? "both" : "forward";
  c.rtol = std::pow(10.0, -8.0 - 4.0 * u(rng));
  c.atol = c.rtol * 1e-2;
  c.output_dir = "out/" + std::to_string(rng() % 1000);
  c.formats = u(rng) < 0.5 ? std::vector<std::string>{"csv"} : std::vector<std::string>{"json", "svg"};
  c.seed = rng();
  return c;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("config round trip on random configs") {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 200; ++i) {
    const RunConfig c = random_config(rng);
    const std::string text = serialize_config(c);
    CHECK(parse_config(text) == c);
    CHECK(serialize_config(parse_config(text)) == normalize_config(text));
  }
}

TEST_CASE("normalisation canonicalises specs and numbers") {
  const auto n = normalize_config(R"({"warp":"power:2.0","section":"circle:6.0:pert=0.10","delta":0.30})");
  const auto c = parse_config(n);
  CHECK(c.warp == "power:2");
  CHECK(c.section == "circle:6:pert=0.1");
  CHECK(c.delta == 0.3);
  CHECK(normalize_config(n) == n);
}

TEST_CASE("config rejects unknown keys, wrong types and bad values") {
  CHECK_THROWS_AS(parse_config(R"({"wrap":"power:2"})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"delta":"small"})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"direction":"sideways"})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"formats":["png"]})"), InvalidInput);
  CHECK_THROWS_AS(parse_config("[1,2]"), InvalidInput);
  CHECK_THROWS_AS(parse_config("{"), InvalidInput);
}

TEST_CASE("default radii per family") {
  CHECK(default_radius("power:2") == 1.5);
  CHECK(default_radius("expinv:1") == doctest::Approx(0.5));
  CHECK(default_radius("logpow:2") == doctest::Approx(0.3));
  CHECK(default_radius("sqrt") == 1.0);
}

TEST_CASE("trajectory CSV has the documented columns") {
  const auto wf = make_power_warp(1.0, 1.5);
  const auto cs = sphere_section({}, 1.5);
  const auto l = default_launch(cs);
  const auto traj = integrate(wf, cs, launch_winding(wf, cs, 0.3, l.y0, l.v0));
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,r,theta,y0,y1,eta0,eta1,hamiltonian,clairaut,tau,rho,u,speed_Y,chart");
  std::size_t rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == traj.samples().size());
}

TEST_CASE("trajectory metadata embeds the config and the winding count") {
  const auto wf = make_power_warp(2.0, 1.5);
  const auto cs = circle_section(2.0 * std::numbers::pi, {}, 1.5);
  const auto l = default_launch(cs);
  RunConfig cfg;
  cfg.warp = "power:2";
  const auto traj = integrate(wf, cs, launch_winding(wf, cs, 0.3, l.y0, l.v0));
  const auto j = trajectory_metadata(traj, cfg);
  CHECK(j["config"]["warp"] == "power:2");
  CHECK(j["classification"] == "winding");
  CHECK(j["winding_count"].get<double>() == doctest::Approx(winding_length(traj).length / (2.0 * std::numbers::pi)));
  CHECK(j.contains("c_bound"));
}

TEST_CASE("sweep JSON writes null for missing references") {
  SweepResult s;
  s.deltas = {0.1};
  s.lengths = {1.0};
  s.normalized = {1.0};
  s.errors_rel = {NAN};
  s.reference_Cf = NAN;
  s.fitted_rate = NAN;
  const auto j = sweep_to_json(s);
  CHECK(j["reference_Cf"].is_null());
  CHECK(j["errors_rel"][0].is_null());
}

TEST_CASE("svg output is a closed document") {
  const auto svg = svg_line_plot({{"a<b", {1, 2, 3}, {1, 4, 9}}}, "t", "x", "y");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("a&lt;b") != std::string::npos);
  const auto polar = svg_polar_path({1, 2}, {0, 1}, 6.28, "p");
  CHECK(polar.find("polyline") != std::string::npos);
}

TEST_CASE("square profile converts to f ~ r^2") {
  const auto wf = parse_warp_spec("profile:" + fixture("profile_square.csv"), 0.0);
  CHECK(std::abs(wf.f(1e-3) / 1e-6 - 1.0) < 0.01);
  CHECK(validate_warp(wf).convex);
  CHECK(wf.kind() == WarpKind::cuspidal);
}

TEST_CASE("linear profile converts to r / sqrt 2") {
  const auto wf = parse_warp_spec("profile:" + fixture("profile_linear.csv"), 0.0);
  for (const double r : {1e-4, 1e-2, 0.5, 1.5, 2.0}) CHECK(std::abs(wf.f(r) - r / std::sqrt(2.0)) < 1e-10);
  CHECK(wf.radius() == doctest::Approx(1.5 * std::sqrt(2.0)));
}

TEST_CASE("non-monotone profile is rejected") {
  CHECK_THROWS_AS(load_profile_csv(fixture("profile_nonmonotone.csv")), InvalidInput);
  CHECK_THROWS_AS(load_profile_csv(fixture("missing.csv")), InvalidInput);
}

TEST_CASE("analytic power profile arclength") {
  const auto p = make_power_profile(1.0, 2.0);
  CHECK(profile_arclength(p, 2.0) == doctest::Approx(2.0 * std::sqrt(2.0)));
  const auto sq = make_power_profile(2.0, 1.0);
  const double exact = 0.5 * std::sqrt(5.0) + 0.25 * std::asinh(2.0);
  CHECK(profile_arclength(sq, 1.0) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("warp table columns") {
  std::ostringstream os;
  write_warp_table_csv(os, make_power_warp(2.0, 1.5), 16);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "r,f,f_prime,f_over_r,f_over_r2");
}

}
