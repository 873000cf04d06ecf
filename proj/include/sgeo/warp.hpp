#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sgeo {

enum class WarpKind { conical, cuspidal, concave_experimental, oscillating_counterexample };

std::string_view to_string(WarpKind kind);

using RealFn = std::function<double(double)>;

/// A warping function f on (0, R) together with its inverse F = f^{-1}.
///
/// Besides f, f', F and F', every family supplies log f and the logarithmic
/// derivative f'/f directly: for the exponential cusps f(δ) underflows long
/// before f'/f does, and the geodesic integrator only needs the logarithms.
/// Instances are immutable and cheap to copy.
class WarpingFunction {
 public:
  struct Parts {
    double domain_radius = 0.0;
    RealFn f;
    RealFn f_prime;
    RealFn F;
    RealFn F_prime;
    RealFn log_f;           // defaults to log(f(x)) when empty
    RealFn log_derivative;  // defaults to f'(x)/f(x) when empty
    WarpKind kind = WarpKind::conical;
    std::optional<RealFn> frakF_closed_form;
    std::string label;
    // False when only an equivalent warp a·f is convex (z^α profiles, α ≤ 2/3).
    bool convex = true;
  };

  explicit WarpingFunction(Parts parts);

  double radius() const noexcept { return parts_.domain_radius; }
  WarpKind kind() const noexcept { return parts_.kind; }
  const std::string& label() const noexcept { return parts_.label; }
  bool convex() const noexcept { return parts_.convex; }

  double f(double x) const { return parts_.f(x); }
  double f_prime(double x) const { return parts_.f_prime(x); }
  double F(double rho) const { return parts_.F(rho); }
  double F_prime(double rho) const { return parts_.F_prime(rho); }
  double log_f(double x) const { return parts_.log_f(x); }
  double log_derivative(double x) const { return parts_.log_derivative(x); }

  bool has_frakF_closed_form() const noexcept { return parts_.frakF_closed_form.has_value(); }
  double frakF_closed_form(double sigma) const;

  /// True for the families the theorems cover (conical or cuspidal, convex).
  bool convex_family() const noexcept;

  /// Smallest x for which log f(x) stays above the representable range
  /// used by the numerics (log f > -600); R·1e-6 otherwise.
  double lower_sampling_bound() const;

 private:
  Parts parts_;
};

WarpingFunction make_power_warp(double alpha, double R);

enum class ExpFamily { log_power, exp_inverse_power };

/// Rows 2 and 3 of the standard examples: exp(-ln(1/x)^μ) and exp(-x^{-β}).
WarpingFunction make_exp_warp(ExpFamily family, double parameter, double R);

/// Largest R for which the exponential family is convex on (0, R).
double max_convex_radius(ExpFamily family, double parameter);

/// Warp whose inverse is F(x) = x^α (c + sin log x). The domain radius
/// defaults to F(1) = c, i.e. ρ ranges over (0, 1].
WarpingFunction make_oscillating_F(double alpha, double c, std::optional<double> R = std::nullopt);

/// Minimum c for which F is increasing and concave.
double oscillating_threshold(double alpha);

WarpingFunction make_concave_sqrt_warp(double R);

/// Log-spaced sampling grid over [lower_sampling_bound(), 0.999·R].
std::vector<double> sample_grid(const WarpingFunction& wf, std::size_t n = 512);

struct WarpValidation {
  bool increasing = true;
  bool round_trip = true;     // F(f(x)) = x to 1e-12 relative
  bool derivative = true;     // f' vs centred difference to 1e-6 relative
  bool convex = true;         // discrete second differences (convex families only)
  bool f_over_x_bound = true; // f(x) <= x f'(x) (convex families only)
  double worst_round_trip = 0.0;
  double worst_derivative = 0.0;
  double worst_convexity = 0.0;
  bool ok() const { return increasing && round_trip && derivative && convex && f_over_x_bound; }
};

WarpValidation validate_warp(const WarpingFunction& wf, std::size_t n = 512);

/// Discrete convexity on a log grid: consecutive slopes may not decrease by
/// more than 1e-10 relative.
bool is_convex_on_grid(const RealFn& fn, const std::vector<double>& grid, double* worst = nullptr);

/// Parses "power:2", "logpow:1.5", "expinv:1", "osc:0.5:9", "sqrt" and
/// "profile:<path>" (two-column CSV z,s(z) with header).
WarpingFunction parse_warp_spec(std::string_view spec, double R);

/// Canonical spelling of a warp spec (numbers in shortest round-trip form).
std::string normalize_warp_spec(std::string_view spec);

}  // namespace sgeo
