#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sgeo/warp.hpp"

namespace sgeo {

enum class FrakFVerdict { converged, oscillating, inconclusive };

std::string_view to_string(FrakFVerdict verdict);

/// Ladder F'(σ ε_n) / F'(ε_n), ε_n = eps0 · ratioⁿ, and what it says about
/// the limit 𝔉(σ).
struct FrakFEstimate {
  double sigma = 1.0;
  std::vector<double> ladder_values;
  FrakFVerdict verdict = FrakFVerdict::inconclusive;
  double value = 0.0;      // meaningful when converged
  double amplitude = 0.0;  // relative spread of the tail window
  std::string diagnostic;
};

struct FrakFLadder {
  double eps0 = 0.0;  // <= 0 selects the default
  double ratio = 0.5;
  int steps = 30;
};

/// Default eps0: 1e-2 · f(R/2), pulled down so σ·eps0 stays inside f((0, R)).
double default_ladder_start(const WarpingFunction& wf, double sigma);

FrakFEstimate estimate_frakF(const WarpingFunction& wf, double sigma, double eps0, double ratio, int steps);
FrakFEstimate estimate_frakF(const WarpingFunction& wf, double sigma, const FrakFLadder& ladder = {});

/// 𝔉(σ) from the closed form when attached, from the ladder otherwise.
/// Throws NonOscillationError when the ladder does not converge.
double frakF(const WarpingFunction& wf, double sigma);

struct CfResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// C_f = ∫_{−π/2}^{π/2} 𝔉(1/cos ϑ) dϑ to absolute tolerance tol.
CfResult compute_Cf(const WarpingFunction& wf, double tol = 1e-10);

struct MonotonicityReport {
  bool passed = false;
  double Cf_small = 0.0;
  double Cf_big = 0.0;
  double worst_frakF_excess = 0.0;  // max over σ of 𝔉_small − 𝔉_big
  std::vector<double> sigmas;
};

/// Checks C_f ≤ C_f̃ and 𝔉 ≤ 𝔉̃ for f = O(f̃) near zero. Throws InvalidInput
/// when the ratio f/f̃ grows toward zero on the sampling grid.
MonotonicityReport check_Cf_monotonicity(const WarpingFunction& wf_small, const WarpingFunction& wf_big);

}  // namespace sgeo
