#include "sgeo/profile.hpp"

#include <algorithm>
#include <cmath>

// Boost 1.74's pchip calls isnan unqualified.
namespace boost::math::interpolators {
using std::isnan;
}

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <vector>

#include "sgeo/errors.hpp"
#include "util.hpp"

namespace sgeo {

namespace {

using boost::math::quadrature::gauss;
using boost::math::quadrature::tanh_sinh;

// Table segments are short and the speed is smooth inside each, so a fixed rule suffices.
double integrate_smooth(const RealFn& g, double a, double b) {
  if (b <= a) return 0.0;
  return gauss<double, 20>::integrate(g, a, b);
}

double integrate_singular_left(const RealFn& g, double b) {
  static thread_local tanh_sinh<double> ts;
  return ts.integrate(g, 0.0, b, 1e-14);
}

// Arclength table and inverse maps for one profile.
class ProfileTable {
 public:
  ProfileTable(Profile profile, double z_max, std::size_t nodes)
      : p_(std::move(profile)), z_max_(z_max) {
    const double sp0 = p_.s_prime(0.0);
    singular_ = !std::isfinite(sp0);
    s_end_ = p_.s(z_max_);
    sp_end_ = p_.s_prime(z_max_);
    g_end_ = std::sqrt(1.0 + sp_end_ * sp_end_);

    zs_ = detail::log_space(z_max_ * 1e-9, z_max_, nodes - 1);
    for (const double k : p_.knots) {
      if (k > 0.0 && k < z_max_) zs_.push_back(k);
    }
    std::sort(zs_.begin(), zs_.end());
    zs_.erase(std::unique(zs_.begin(), zs_.end()), zs_.end());
    zs_.insert(zs_.begin(), 0.0);
    rs_.assign(zs_.size(), 0.0);
    ss_.assign(zs_.size(), 0.0);
    const RealFn g = [this](double w) { return speed(w); };
    rs_[1] = singular_ ? integrate_singular_left(g, zs_[1]) : integrate_smooth(g, 0.0, zs_[1]);
    ss_[1] = p_.s(zs_[1]);
    for (std::size_t i = 2; i < zs_.size(); ++i) {
      rs_[i] = rs_[i - 1] + integrate_smooth(g, zs_[i - 1], zs_[i]);
      ss_[i] = p_.s(zs_[i]);
      if (!(rs_[i] > rs_[i - 1])) throw std::logic_error("profile arclength is not monotone");
      if (!(ss_[i] > ss_[i - 1])) throw InvalidInput("profile s(z) is not strictly increasing");
    }
  }

  double s(double z) const { return z <= z_max_ ? p_.s(z) : s_end_ + sp_end_ * (z - z_max_); }
  double s_prime(double z) const { return z <= z_max_ ? p_.s_prime(z) : sp_end_; }
  double speed(double z) const {
    const double sp = s_prime(z);
    return std::sqrt(1.0 + sp * sp);
  }

  double r_max() const { return rs_.back(); }

  double arclength(double z) const {
    if (z <= 0.0) return 0.0;
    if (z >= z_max_) return rs_.back() + g_end_ * (z - z_max_);
    const std::size_t i = segment(zs_, z);
    const RealFn g = [this](double w) { return speed(w); };
    if (i == 0) return singular_ ? integrate_singular_left(g, z) : integrate_smooth(g, 0.0, z);
    return rs_[i] + integrate_smooth(g, zs_[i], z);
  }

  double z_of_r(double r) const {
    if (r <= 0.0) return 0.0;
    if (r >= rs_.back()) return z_max_ + (r - rs_.back()) / g_end_;
    const std::size_t i = segment(rs_, r);
    return solve(zs_[i], zs_[i + 1], r, [this](double z) { return arclength(z); },
                 [this](double z) { return speed(z); });
  }

  double z_of_s(double rho) const {
    if (rho <= 0.0) return 0.0;
    if (rho >= s_end_) return z_max_ + (rho - s_end_) / sp_end_;
    const std::size_t i = segment(ss_, rho);
    return solve(zs_[i], zs_[i + 1], rho, [this](double z) { return s(z); },
                 [this](double z) { return s_prime(z); });
  }

 private:
  static std::size_t segment(const std::vector<double>& table, double v) {
    const auto it = std::upper_bound(table.begin(), table.end(), v);
    const auto i = static_cast<std::size_t>(std::distance(table.begin(), it));
    return std::min(i == 0 ? 0 : i - 1, table.size() - 2);
  }

  // Safeguarded Newton on [a, b] for an increasing fn with fn(a) <= target <= fn(b).
  template <class Fn, class Dfn>
  static double solve(double a, double b, double target, Fn&& fn, Dfn&& dfn) {
    double x = 0.5 * (a + b);
    for (int iter = 0; iter < 100; ++iter) {
      const double g = fn(x) - target;
      if (g == 0.0) return x;
      (g < 0.0 ? a : b) = x;
      const double d = dfn(x);
      double next = std::isfinite(d) && d > 0.0 ? x - g / d : 0.5 * (a + b);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (std::abs(next - x) <= 1e-16 * std::max(x, 1e-300)) return next;
      x = next;
      if (b - a <= 2e-16 * b) return x;
    }
    return x;
  }

  Profile p_;
  double z_max_;
  bool singular_ = false;
  double s_end_ = 0.0;
  double sp_end_ = 0.0;
  double g_end_ = 1.0;
  std::vector<double> zs_;
  std::vector<double> rs_;
  std::vector<double> ss_;
};

}  // namespace

Profile make_power_profile(double alpha, double z_max) {
  if (!(alpha > 0.0)) throw InvalidInput("power profile needs alpha > 0");
  Profile p;
  p.s = [alpha](double z) { return std::pow(z, alpha); };
  p.s_prime = [alpha](double z) {
    if (z == 0.0) {
      if (alpha > 1.0) return 0.0;
      if (alpha == 1.0) return 1.0;
      return std::numeric_limits<double>::infinity();
    }
    return alpha * std::pow(z, alpha - 1.0);
  };
  p.z_max = z_max;
  p.power_exponent = alpha;
  p.label = "z^" + detail::format_number(alpha);
  return p;
}

Profile load_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open profile file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("profile file '" + path + "' is empty");
  std::vector<double> zs;
  std::vector<double> ss;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (line.back() == '\r') line.pop_back();
    const auto cols = detail::split(line, ',');
    if (cols.size() != 2) throw InvalidInput("profile rows need exactly two columns: '" + line + "'");
    zs.push_back(detail::parse_double(cols[0]));
    ss.push_back(detail::parse_double(cols[1]));
  }
  if (zs.size() < 4) throw InvalidInput("profile needs at least four rows");
  if (zs.front() != 0.0 || ss.front() != 0.0) throw InvalidInput("profile must start at z = 0 with s(0) = 0");
  for (std::size_t i = 1; i < zs.size(); ++i) {
    if (!(zs[i] > zs[i - 1])) throw InvalidInput("profile z column is not strictly increasing");
    if (!(ss[i] > ss[i - 1])) throw InvalidInput("profile s(z) is not strictly increasing");
  }
  const double z_max = zs.back();
  std::vector<double> knots = zs;
  auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(zs), std::move(ss));
  Profile p;
  p.s = [spline](double z) { return (*spline)(z); };
  p.s_prime = [spline](double z) { return spline->prime(z); };
  p.z_max = z_max;
  p.knots = std::move(knots);
  p.label = path;
  return p;
}

double profile_arclength(const Profile& profile, double z) {
  static thread_local tanh_sinh<double> ts;
  const RealFn g = [&profile](double w) {
    const double sp = profile.s_prime(w);
    return std::sqrt(1.0 + sp * sp);
  };
  return ts.integrate(g, 0.0, z, 1e-14);
}

WarpingFunction profile_to_warp(const Profile& profile, double z_max, std::size_t grid) {
  if (!(z_max > 0.0)) throw InvalidInput("profile conversion needs z_max > 0");
  if (grid < 16) throw InvalidInput("profile conversion needs at least 16 table nodes");
  if (std::abs(profile.s(0.0)) > 0.0) throw InvalidInput("profile needs s(0) = 0");
  if (!(profile.s(z_max) > 0.0)) throw InvalidInput("profile needs s > 0 on (0, z_max]");

  const double sp0 = profile.s_prime(0.0);
  const bool singular = !std::isfinite(sp0);
  if (singular) {
    const bool fixture = profile.power_exponent && *profile.power_exponent > 0.0 &&
                         *profile.power_exponent <= 2.0 / 3.0;
    if (!fixture) throw InvalidInput("profile has undefined s'(0); only z^alpha with alpha in (0, 2/3] is accepted");
  }

  auto table = std::make_shared<const ProfileTable>(profile, z_max, grid);
  WarpingFunction::Parts p;
  p.domain_radius = table->r_max();
  p.f = [table](double r) { return table->s(table->z_of_r(r)); };
  p.f_prime = [table](double r) {
    const double z = table->z_of_r(r);
    return table->s_prime(z) / table->speed(z);
  };
  p.F = [table](double rho) { return table->arclength(table->z_of_s(rho)); };
  p.F_prime = [table](double rho) {
    const double z = table->z_of_s(rho);
    return table->speed(z) / table->s_prime(z);
  };
  p.log_derivative = [table](double r) {
    const double z = table->z_of_r(r);
    return table->s_prime(z) / (table->speed(z) * table->s(z));
  };
  if (singular) {
    // f(r) = r − βr^γ + …: conical, convex only up to an equivalent factor.
    p.kind = WarpKind::conical;
    p.convex = false;
  } else {
    // Sampled profiles only resolve s'(0) to the first node, so compare with the slope scale.
    const double slope_scale = std::max(std::abs(profile.s_prime(z_max)), profile.s(z_max) / z_max);
    p.kind = sp0 > 1e-4 * slope_scale ? WarpKind::conical : WarpKind::cuspidal;
  }
  p.label = "profile:" + profile.label;
  return WarpingFunction(std::move(p));
}

}  // namespace sgeo
