#include "sgeo/frakf.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "sgeo/errors.hpp"
#include "util.hpp"

namespace sgeo {

std::string_view to_string(FrakFVerdict verdict) {
  switch (verdict) {
    case FrakFVerdict::converged: return "converged";
    case FrakFVerdict::oscillating: return "oscillating";
    case FrakFVerdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

double default_ladder_start(const WarpingFunction& wf, double sigma) {
  const double R = wf.radius();
  return std::min(1e-2 * wf.f(0.5 * R), 0.5 * wf.f(0.999 * R) / sigma);
}

FrakFEstimate estimate_frakF(const WarpingFunction& wf, double sigma, double eps0, double ratio, int steps) {
  if (!(sigma >= 1.0)) throw InvalidInput("sigma must be >= 1");
  if (!(eps0 > 0.0)) throw InvalidInput("eps0 must be positive");
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidInput("ladder ratio must lie in (0, 1)");
  if (steps < 4) throw InvalidInput("ladder needs at least 4 steps");
  if (sigma * eps0 > wf.f(wf.radius())) throw InvalidInput("sigma * eps0 lies outside the range of f");

  FrakFEstimate est;
  est.sigma = sigma;
  double eps = eps0;
  for (int n = 0; n < steps; ++n, eps *= ratio) {
    const double num = wf.F_prime(sigma * eps);
    const double den = wf.F_prime(eps);
    const double q = num / den;
    if (!std::isfinite(q) || !(den > 0.0) || !(num > 0.0)) {
      est.diagnostic = "F' evaluation failed (underflow/overflow) at eps = " + detail::format_number(eps);
      break;
    }
    est.ladder_values.push_back(q);
  }
  const auto& v = est.ladder_values;
  if (v.size() < 4) {
    est.verdict = FrakFVerdict::inconclusive;
    if (est.diagnostic.empty()) est.diagnostic = "ladder too short";
    return est;
  }

  const std::size_t window = std::min(v.size(), std::max<std::size_t>(v.size() / 4, 8));
  const auto first = v.end() - static_cast<std::ptrdiff_t>(window);
  const auto [lo, hi] = std::minmax_element(first, v.end());
  double mean = 0.0;
  for (auto it = first; it != v.end(); ++it) mean += *it;
  mean /= static_cast<double>(window);
  est.amplitude = (*hi - *lo) / std::abs(mean);

  int sign_changes = 0;
  double prev_inc = 0.0;
  for (auto it = first + 1; it != v.end(); ++it) {
    const double inc = *it - *(it - 1);
    if (inc != 0.0 && prev_inc != 0.0 && (inc > 0.0) != (prev_inc > 0.0)) ++sign_changes;
    if (inc != 0.0) prev_inc = inc;
  }

  if (est.amplitude < 1e-3) {
    est.verdict = FrakFVerdict::converged;
    est.value = v.back();
  } else if (est.amplitude > 0.05 && sign_changes >= 1) {
    est.verdict = FrakFVerdict::oscillating;
  } else {
    est.verdict = FrakFVerdict::inconclusive;
  }
  if (est.verdict != FrakFVerdict::converged && !est.diagnostic.empty()) est.verdict = FrakFVerdict::inconclusive;
  return est;
}

FrakFEstimate estimate_frakF(const WarpingFunction& wf, double sigma, const FrakFLadder& ladder) {
  const double eps0 = ladder.eps0 > 0.0 ? ladder.eps0 : default_ladder_start(wf, sigma);
  return estimate_frakF(wf, sigma, eps0, ladder.ratio, ladder.steps);
}

double frakF(const WarpingFunction& wf, double sigma) {
  if (wf.has_frakF_closed_form()) return wf.frakF_closed_form(sigma);
  const auto est = estimate_frakF(wf, sigma);
  if (est.verdict != FrakFVerdict::converged) {
    throw NonOscillationError("F'(sigma eps)/F'(eps) is " + std::string(to_string(est.verdict)) +
                              " at sigma = " + detail::format_number(sigma));
  }
  return est.value;
}

CfResult compute_Cf(const WarpingFunction& wf, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
  if (!wf.has_frakF_closed_form()) {
    for (const double sigma : detail::log_space(1.0, 1e6, 16)) (void)frakF(wf, sigma);
  }

  // ϑ = π/2 − φ² on each half; the integrand is even in ϑ.
  const auto integrand = [&wf](double phi) {
    const double sigma = 1.0 / std::sin(phi * phi);
    return 4.0 * phi * frakF(wf, sigma);
  };
  CfResult out;
  const double upper = std::sqrt(std::numbers::pi / 2.0);
  out.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, upper, 20, tol / 4.0,
                                                                           &out.error_estimate);
  if (!std::isfinite(out.value) || out.error_estimate > tol) {
    throw QuadratureError("C_f quadrature did not converge (achieved " + detail::format_number(out.error_estimate) +
                              ")",
                          out.error_estimate);
  }
  if (wf.convex_family() && (out.value < 2.0 - tol || out.value > std::numbers::pi + tol)) {
    throw QuadratureError("C_f = " + detail::format_number(out.value) + " violates 2 <= C_f <= pi",
                          out.error_estimate);
  }
  return out;
}

MonotonicityReport check_Cf_monotonicity(const WarpingFunction& wf_small, const WarpingFunction& wf_big) {
  const double lo = std::max(wf_small.lower_sampling_bound(), wf_big.lower_sampling_bound());
  const double hi = 0.999 * std::min(wf_small.radius(), wf_big.radius());
  if (!(lo < hi)) throw InvalidInput("warping functions have no common sampling range");
  const auto grid = detail::log_space(lo, hi, 256);
  std::vector<double> ratio(grid.size());
  std::transform(grid.begin(), grid.end(), ratio.begin(),
                 [&](double x) { return std::exp(wf_small.log_f(x) - wf_big.log_f(x)); });
  // grid ascends, so the first quarter is the part nearest the singularity.
  const std::size_t tail = grid.size() / 4;
  const double tail_max = *std::max_element(ratio.begin(), ratio.begin() + static_cast<std::ptrdiff_t>(tail));
  const double rest_max = *std::max_element(ratio.begin() + static_cast<std::ptrdiff_t>(tail), ratio.end());
  if (tail_max > rest_max * (1.0 + 1e-4)) {
    throw InvalidInput("f = O(f~) near zero fails on the sampling grid (" + wf_small.label() + " vs " +
                       wf_big.label() + ")");
  }

  MonotonicityReport rep;
  rep.sigmas = detail::log_space(1.0, 1e6, 24);
  rep.worst_frakF_excess = -std::numeric_limits<double>::infinity();
  for (const double sigma : rep.sigmas) {
    rep.worst_frakF_excess = std::max(rep.worst_frakF_excess, frakF(wf_small, sigma) - frakF(wf_big, sigma));
  }
  rep.Cf_small = compute_Cf(wf_small).value;
  rep.Cf_big = compute_Cf(wf_big).value;
  rep.passed = rep.worst_frakF_excess <= 1e-6 && rep.Cf_small <= rep.Cf_big + 1e-6;
  return rep;
}

}  // namespace sgeo
