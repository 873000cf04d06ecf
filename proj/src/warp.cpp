#include "sgeo/warp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <memory>

#include "sgeo/errors.hpp"
#include "sgeo/profile.hpp"
#include "util.hpp"

namespace sgeo {

std::string_view to_string(WarpKind kind) {
  switch (kind) {
    case WarpKind::conical: return "conical";
    case WarpKind::cuspidal: return "cuspidal";
    case WarpKind::concave_experimental: return "concave_experimental";
    case WarpKind::oscillating_counterexample: return "oscillating_counterexample";
  }
  return "unknown";
}

WarpingFunction::WarpingFunction(Parts parts) : parts_(std::move(parts)) {
  if (!(parts_.domain_radius > 0.0)) throw InvalidInput("warping function needs a positive domain radius");
  if (!parts_.f || !parts_.f_prime || !parts_.F || !parts_.F_prime)
    throw InvalidInput("warping function is missing f, f', F or F'");
  if (!parts_.log_f) {
    parts_.log_f = [f = parts_.f](double x) { return std::log(f(x)); };
  }
  if (!parts_.log_derivative) {
    parts_.log_derivative = [f = parts_.f, fp = parts_.f_prime](double x) { return fp(x) / f(x); };
  }
}

double WarpingFunction::frakF_closed_form(double sigma) const {
  if (!parts_.frakF_closed_form) throw InvalidInput("no closed form for the limit functional of " + parts_.label);
  return (*parts_.frakF_closed_form)(sigma);
}

bool WarpingFunction::convex_family() const noexcept {
  return parts_.convex && (parts_.kind == WarpKind::conical || parts_.kind == WarpKind::cuspidal);
}

double WarpingFunction::lower_sampling_bound() const {
  constexpr double kLogFloor = -600.0;
  const double R = radius();
  double lo = R * 1e-6;
  if (log_f(lo) >= kLogFloor) return lo;
  double hi = 0.5 * R;
  if (log_f(hi) < kLogFloor) return hi;
  for (int i = 0; i < 200 && hi / lo > 1.0 + 1e-12; ++i) {
    const double mid = std::sqrt(lo * hi);
    (log_f(mid) >= kLogFloor ? hi : lo) = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------

WarpingFunction make_power_warp(double alpha, double R) {
  if (!(alpha >= 1.0)) {
    throw InvalidInput("power warp needs alpha >= 1 (use the sqrt warp for the concave experiment)");
  }
  if (!(R > 0.0)) throw InvalidInput("power warp needs R > 0");
  WarpingFunction::Parts p;
  p.domain_radius = R;
  p.f = [alpha](double x) { return std::pow(x, alpha); };
  p.f_prime = [alpha](double x) { return alpha * std::pow(x, alpha - 1.0); };
  p.F = [alpha](double rho) { return std::pow(rho, 1.0 / alpha); };
  p.F_prime = [alpha](double rho) { return std::pow(rho, 1.0 / alpha - 1.0) / alpha; };
  p.log_f = [alpha](double x) { return alpha * std::log(x); };
  p.log_derivative = [alpha](double x) { return alpha / x; };
  p.kind = alpha == 1.0 ? WarpKind::conical : WarpKind::cuspidal;
  p.frakF_closed_form = [alpha](double sigma) { return std::pow(sigma, 1.0 / alpha - 1.0); };
  p.label = "power:" + detail::format_number(alpha);
  return WarpingFunction(std::move(p));
}

double max_convex_radius(ExpFamily family, double parameter) {
  switch (family) {
    case ExpFamily::log_power:
      // μy^μ − y − (μ−1) ≥ 0 with y = ln(1/x) holds exactly for y ≥ 1.
      return std::exp(-1.0);
    case ExpFamily::exp_inverse_power:
      return std::pow(parameter / (parameter + 1.0), 1.0 / parameter);
  }
  return 0.0;
}

WarpingFunction make_exp_warp(ExpFamily family, double parameter, double R) {
  if (!(R > 0.0)) throw InvalidInput("exponential warp needs R > 0");
  WarpingFunction::Parts p;
  p.domain_radius = R;
  p.kind = WarpKind::cuspidal;
  p.frakF_closed_form = [](double sigma) { return 1.0 / sigma; };

  if (family == ExpFamily::log_power) {
    if (!(parameter > 1.0)) throw InvalidInput("log-power warp needs mu > 1");
    const double mu = parameter;
    p.log_f = [mu](double x) { return -std::pow(-std::log(x), mu); };
    p.f = [mu](double x) { return std::exp(-std::pow(-std::log(x), mu)); };
    p.log_derivative = [mu](double x) { return mu * std::pow(-std::log(x), mu - 1.0) / x; };
    p.f_prime = [mu](double x) {
      const double L = -std::log(x);
      return std::exp(-std::pow(L, mu)) * mu * std::pow(L, mu - 1.0) / x;
    };
    p.F = [mu](double rho) { return std::exp(-std::pow(-std::log(rho), 1.0 / mu)); };
    p.F_prime = [mu](double rho) {
      const double L = -std::log(rho);
      return std::exp(-std::pow(L, 1.0 / mu)) * std::pow(L, 1.0 / mu - 1.0) / (mu * rho);
    };
    p.label = "logpow:" + detail::format_number(mu);
  } else {
    if (!(parameter > 0.0)) throw InvalidInput("inverse-power exponential warp needs beta > 0");
    const double beta = parameter;
    p.log_f = [beta](double x) { return -std::pow(x, -beta); };
    p.f = [beta](double x) { return std::exp(-std::pow(x, -beta)); };
    p.log_derivative = [beta](double x) { return beta * std::pow(x, -beta - 1.0); };
    p.f_prime = [beta](double x) { return std::exp(-std::pow(x, -beta)) * beta * std::pow(x, -beta - 1.0); };
    p.F = [beta](double rho) { return std::pow(-std::log(rho), -1.0 / beta); };
    p.F_prime = [beta](double rho) {
      return std::pow(-std::log(rho), -1.0 / beta - 1.0) / (beta * rho);
    };
    p.label = "expinv:" + detail::format_number(beta);
  }

  const double r_max = max_convex_radius(family, parameter);
  if (R > r_max * (1.0 + 1e-12)) {
    throw InvalidInput(p.label + " is not convex on (0, R); largest admissible R is " +
                       detail::format_number(r_max));
  }
  return WarpingFunction(std::move(p));
}

double oscillating_threshold(double alpha) {
  return (2.0 - alpha) / (1.0 - alpha) * (1.0 + alpha) / alpha;
}

namespace {

// Inverse of an increasing function on (0, ∞) by a monotone node table and
// safeguarded Newton.
class MonotoneInverse {
 public:
  MonotoneInverse(RealFn fn, RealFn dfn, double x_lo, double x_hi, std::size_t nodes)
      : fn_(std::move(fn)), dfn_(std::move(dfn)) {
    xs_.resize(nodes);
    ys_.resize(nodes);
    const double step = std::log(x_hi / x_lo) / static_cast<double>(nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i) {
      xs_[i] = x_lo * std::exp(step * static_cast<double>(i));
      ys_[i] = fn_(xs_[i]);
      if (i > 0 && !(ys_[i] > ys_[i - 1])) throw InvalidInput("function is not increasing on the inversion table");
    }
  }

  double operator()(double y) const {
    if (!(y > 0.0)) return 0.0;
    double a = 0.0;
    double b = 0.0;
    if (y < ys_.front()) {
      b = xs_.front();
      a = b;
      while (fn_(a) > y) {
        b = a;
        a *= 0.5;
        if (a < 1e-300) return a;
      }
    } else if (y > ys_.back()) {
      a = xs_.back();
      b = a;
      while (fn_(b) < y) {
        a = b;
        b *= 2.0;
        if (!std::isfinite(b)) throw InvalidInput("inverse is out of range");
      }
    } else {
      const auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
      const auto i = static_cast<std::size_t>(std::distance(ys_.begin(), it));
      a = xs_[i - 1];
      b = i < xs_.size() ? xs_[i] : xs_[i - 1];
      if (i == xs_.size()) return xs_.back();
    }
    double x = 0.5 * (a + b);
    for (int iter = 0; iter < 200; ++iter) {
      const double g = fn_(x) - y;
      if (g == 0.0) return x;
      (g < 0.0 ? a : b) = x;
      double next = x - g / dfn_(x);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (std::abs(next - x) <= 2e-16 * x) return next;
      x = next;
      if ((b - a) <= 4e-16 * b) return x;
    }
    return x;
  }

 private:
  RealFn fn_;
  RealFn dfn_;
  std::vector<double> xs_;
  std::vector<double> ys_;
};

}  // namespace

WarpingFunction make_oscillating_F(double alpha, double c, std::optional<double> R) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("oscillating warp needs alpha in (0, 1)");
  const double threshold = oscillating_threshold(alpha);
  if (!(c >= threshold * (1.0 - 1e-12))) {
    throw InvalidInput("oscillating warp needs c >= " + detail::format_number(threshold) +
                       " for F to be increasing and concave");
  }
  RealFn F = [alpha, c](double x) { return std::pow(x, alpha) * (c + std::sin(std::log(x))); };
  RealFn F_prime = [alpha, c](double x) {
    const double L = std::log(x);
    return std::pow(x, alpha - 1.0) * (alpha * c + alpha * std::sin(L) + std::cos(L));
  };
  const double radius = R.value_or(F(1.0));
  if (!(radius > 0.0)) throw InvalidInput("oscillating warp needs R > 0");

  auto inverse = std::make_shared<MonotoneInverse>(F, F_prime, 1e-30, 1e3, 4096);
  WarpingFunction::Parts p;
  p.domain_radius = radius;
  p.F = F;
  p.F_prime = F_prime;
  p.f = [inverse](double r) { return (*inverse)(r); };
  p.f_prime = [inverse, F_prime](double r) { return 1.0 / F_prime((*inverse)(r)); };
  p.log_f = [inverse](double r) { return std::log((*inverse)(r)); };
  p.log_derivative = [inverse, F_prime](double r) {
    const double rho = (*inverse)(r);
    return 1.0 / (F_prime(rho) * rho);
  };
  p.kind = WarpKind::oscillating_counterexample;
  p.label = "osc:" + detail::format_number(alpha) + ":" + detail::format_number(c);
  return WarpingFunction(std::move(p));
}

WarpingFunction make_concave_sqrt_warp(double R) {
  if (!(R > 0.0)) throw InvalidInput("sqrt warp needs R > 0");
  WarpingFunction::Parts p;
  p.domain_radius = R;
  p.f = [](double x) { return std::sqrt(x); };
  p.f_prime = [](double x) { return 0.5 / std::sqrt(x); };
  p.F = [](double rho) { return rho * rho; };
  p.F_prime = [](double rho) { return 2.0 * rho; };
  p.log_f = [](double x) { return 0.5 * std::log(x); };
  p.log_derivative = [](double x) { return 0.5 / x; };
  p.kind = WarpKind::concave_experimental;
  p.convex = false;
  p.frakF_closed_form = [](double sigma) { return sigma; };
  p.label = "sqrt";
  return WarpingFunction(std::move(p));
}

// ---------------------------------------------------------------------------

std::vector<double> sample_grid(const WarpingFunction& wf, std::size_t n) {
  return detail::log_space(wf.lower_sampling_bound(), 0.999 * wf.radius(), n);
}

bool is_convex_on_grid(const RealFn& fn, const std::vector<double>& grid, double* worst) {
  bool ok = true;
  double worst_drop = 0.0;
  double prev_slope = std::numeric_limits<double>::quiet_NaN();
  double prev_x = grid.empty() ? 0.0 : grid.front();
  double prev_f = grid.empty() ? 0.0 : fn(prev_x);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double x = grid[i];
    const double fx = fn(x);
    const double slope = (fx - prev_f) / (x - prev_x);
    if (!std::isnan(prev_slope)) {
      const double scale = std::max({std::abs(slope), std::abs(prev_slope), 1e-300});
      const double drop = (prev_slope - slope) / scale;
      worst_drop = std::max(worst_drop, drop);
      if (drop > 1e-10) ok = false;
    }
    prev_slope = slope;
    prev_x = x;
    prev_f = fx;
  }
  if (worst) *worst = worst_drop;
  return ok;
}

WarpValidation validate_warp(const WarpingFunction& wf, std::size_t n) {
  WarpValidation v;
  const auto grid = sample_grid(wf, n);
  double prev = -std::numeric_limits<double>::infinity();
  for (const double x : grid) {
    const double fx = wf.f(x);
    if (!(fx > prev)) v.increasing = false;
    prev = fx;

    const double rt = std::abs(wf.F(fx) - x) / x;
    v.worst_round_trip = std::max(v.worst_round_trip, rt);

    // Step on the scale where f changes by a factor e, so exp cusps stay resolved.
    const double h = 1e-4 * std::min(x, 1.0 / wf.log_derivative(x));
    const double fd = (wf.f(x + h) - wf.f(x - h)) / (2.0 * h);
    const double fp = wf.f_prime(x);
    const double rel = std::abs(fd - fp) / std::abs(fp);
    v.worst_derivative = std::max(v.worst_derivative, rel);

    if (wf.convex_family() && fx > x * fp * (1.0 + 1e-12)) v.f_over_x_bound = false;
  }
  v.round_trip = v.worst_round_trip <= 1e-12;
  v.derivative = v.worst_derivative <= 1e-6;
  if (wf.convex_family()) {
    v.convex = is_convex_on_grid([&wf](double x) { return wf.f(x); }, grid, &v.worst_convexity);
  }
  return v;
}

// ---------------------------------------------------------------------------

WarpingFunction parse_warp_spec(std::string_view spec, double R) {
  const auto parts = detail::split(spec, ':');
  if (parts.empty()) throw InvalidInput("empty warp spec");
  const std::string_view family = parts[0];
  auto arg = [&](std::size_t i) {
    if (i >= parts.size()) throw InvalidInput("warp spec '" + std::string(spec) + "' is missing a parameter");
    return detail::parse_double(parts[i]);
  };
  auto expect_args = [&](std::size_t count) {
    if (parts.size() != count + 1) throw InvalidInput("warp spec '" + std::string(spec) + "' has the wrong arity");
  };
  if (family == "power") {
    expect_args(1);
    return make_power_warp(arg(1), R);
  }
  if (family == "logpow") {
    expect_args(1);
    return make_exp_warp(ExpFamily::log_power, arg(1), R);
  }
  if (family == "expinv") {
    expect_args(1);
    return make_exp_warp(ExpFamily::exp_inverse_power, arg(1), R);
  }
  if (family == "osc") {
    expect_args(2);
    return make_oscillating_F(arg(1), arg(2));
  }
  if (family == "sqrt") {
    expect_args(0);
    return make_concave_sqrt_warp(R);
  }
  if (family == "profile") {
    const auto path = spec.substr(spec.find(':') + 1);
    if (path.empty()) throw InvalidInput("profile spec needs a path");
    auto profile = load_profile_csv(std::string(path));
    return profile_to_warp(profile, profile.z_max);
  }
  throw InvalidInput("unknown warp family '" + std::string(family) + "'");
}

std::string normalize_warp_spec(std::string_view spec) {
  const auto parts = detail::split(spec, ':');
  if (parts.empty()) throw InvalidInput("empty warp spec");
  if (parts[0] == "profile") return std::string(spec);
  std::string out(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    out += ':';
    out += detail::format_number(detail::parse_double(parts[i]));
  }
  return out;
}

}  // namespace sgeo
