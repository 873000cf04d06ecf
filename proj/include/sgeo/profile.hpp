#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sgeo/warp.hpp"

namespace sgeo {

/// Generating curve x = s(z) of a rotationally described singular surface.
struct Profile {
  RealFn s;
  RealFn s_prime;
  double z_max = 0.0;
  // Set for the s(z) = z^α fixtures; with α ≤ 2/3 s'(0) may be infinite.
  std::optional<double> power_exponent;
  // Interpolation breakpoints; s' is only piecewise smooth across them.
  std::vector<double> knots;
  std::string label;
};

Profile make_power_profile(double alpha, double z_max);

/// Two-column CSV (z, s(z)) with a header row, z strictly increasing from 0
/// and s strictly increasing. Interpolated by a monotone cubic (PCHIP).
Profile load_profile_csv(const std::string& path);

/// Warping function of the surface: f(r(z)) = s(z) with r(z) the arclength
/// ∫₀^z √(1 + s'(w)²) dw. Beyond z_max s is continued linearly.
WarpingFunction profile_to_warp(const Profile& profile, double z_max, std::size_t grid = 4096);

/// Arclength r(z) of the profile as used by profile_to_warp (for tests/tools).
double profile_arclength(const Profile& profile, double z);

}  // namespace sgeo
