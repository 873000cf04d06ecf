#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sgeo/experiments.hpp"
#include "sgeo/geodesic.hpp"
#include "sgeo/warp.hpp"

namespace sgeo {

/// Flat run configuration. Every key is optional; see README for the grammar.
struct RunConfig {
  std::string warp = "power:1";
  std::string section = "circle:6.283185307179586";
  double R = 0.0;  // <= 0 selects the family default
  double delta = 0.3;
  std::vector<double> deltas;  // empty selects the default ladder
  std::vector<double> y0;      // chart-0 coordinates; empty selects the default launch
  std::vector<double> v0;
  bool radial = false;
  std::string direction = "both";
  double rtol = 1e-12;
  double atol = 1e-14;
  double cf_tol = 1e-10;
  double slack = 1e-8;
  std::string output_dir = ".";
  std::vector<std::string> formats = {"csv", "json", "svg"};
  std::uint64_t seed = 20240601;

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::string& path);
nlohmann::json config_to_json(const RunConfig& cfg);
/// Canonical text: sorted keys, normalised specs, shortest round-trip numbers.
std::string serialize_config(const RunConfig& cfg);
std::string normalize_config(std::string_view json_text);

/// Domain radius used when the config leaves R unset.
double default_radius(std::string_view warp_spec);

IntegratorOptions integrator_options(const RunConfig& cfg);
Direction parse_direction(std::string_view s);

// ---------------------------------------------------------------------------
// Tables

/// Columns t, r, theta, y..., eta..., hamiltonian, clairaut, tau, rho, u, speed_Y, chart.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
nlohmann::json trajectory_metadata(const Trajectory& traj, const RunConfig& cfg);

void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
nlohmann::json sweep_to_json(const SweepResult& sweep);

/// Columns r, f, f_prime, f_over_r, f_over_r2 on a log grid up to
/// min(r_max, 0.999 R); r_max <= 0 means the whole domain.
void write_warp_table_csv(std::ostream& out, const WarpingFunction& wf, std::size_t n = 256, double r_max = 0.0);

// ---------------------------------------------------------------------------
// SVG

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, bool log_x = false);

/// Polar view of (r, angle) with the angle taken in units of the circle length.
std::string svg_polar_path(const std::vector<double>& r, const std::vector<double>& angle, double period,
                           const std::string& title);

}  // namespace sgeo
