#include "sgeo/cross_section.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "sgeo/errors.hpp"
#include "sgeo/ode.hpp"
#include "util.hpp"

namespace sgeo {

namespace {

constexpr double kPi = std::numbers::pi;

std::string perturbation_suffix(const Perturbation& p) {
  std::string out;
  if (p.amplitude != 0.0) out += ":pert=" + detail::format_number(p.amplitude);
  if (p.offset != 0.0) out += ":offset=" + detail::format_number(p.offset);
  return out;
}

SMat scalar_matrix(double v) {
  SMat m(1, 1);
  m(0, 0) = v;
  return m;
}

class CircleModel final : public SectionModel {
 public:
  CircleModel(double length, Perturbation p) : L_(length), k_(2.0 * kPi / length), p_(p) {
    if (!(length > 0.0) || !std::isfinite(length)) throw InvalidInput("circle circumference must be positive");
  }

  int dim() const override { return 1; }
  std::string spec() const override { return "circle:" + detail::format_number(L_) + perturbation_suffix(p_); }

  double scale(double r, const SectionPoint& y) const override {
    return 1.0 + p_.amplitude * (p_.offset + std::sin(r)) * std::cos(k_ * y.coords[0]);
  }
  SMat metric(double r, const SectionPoint& y) const override {
    const double s = scale(r, y);
    return scalar_matrix(s * s);
  }
  SMat d_r_metric(double r, const SectionPoint& y) const override {
    if (p_.amplitude == 0.0) return scalar_matrix(0.0);
    const double s = scale(r, y);
    return scalar_matrix(2.0 * s * p_.amplitude * std::cos(r) * std::cos(k_ * y.coords[0]));
  }
  SMat d_y_metric(double r, const SectionPoint& y, int) const override {
    if (p_.amplitude == 0.0) return scalar_matrix(0.0);
    const double s = scale(r, y);
    const double phi = y.coords[0];
    return scalar_matrix(-2.0 * s * p_.amplitude * (p_.offset + std::sin(r)) * k_ * std::sin(k_ * phi));
  }

  Eigen::Vector3d embed(const SectionPoint& y) const override {
    const double a = k_ * y.coords[0];
    return {std::cos(a), std::sin(a), 0.0};
  }

  std::vector<SectionPoint> sample_points(std::size_t n) const override {
    std::vector<SectionPoint> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i].coords = SVec::Constant(1, L_ * static_cast<double>(i) / static_cast<double>(n));
    }
    return out;
  }

  bool flat_base() const override { return p_.amplitude * p_.offset == 0.0; }

  // h_0 arclength measured from φ = 0.
  double base_arclength(double phi) const { return phi + p_.amplitude * p_.offset * std::sin(k_ * phi) / k_; }

  double base_distance(const SectionPoint& a, const SectionPoint& b) const override {
    const double d = std::fmod(std::abs(base_arclength(b.coords[0]) - base_arclength(a.coords[0])), L_);
    return std::min(d, L_ - d);
  }

  bool closed_base_geodesic(const SectionPoint& y0, const SVec& v0, double tau, SectionPoint& out,
                            SVec* tangent) const override {
    const double target = base_arclength(y0.coords[0]) + (v0[0] >= 0.0 ? tau : -tau);
    const double ao = p_.amplitude * p_.offset;
    double phi = target;
    for (int iter = 0; iter < 60; ++iter) {
      const double g = base_arclength(phi) - target;
      const double dphi = g / (1.0 + ao * std::cos(k_ * phi));
      phi -= dphi;
      if (std::abs(dphi) <= 1e-16 * std::max(1.0, std::abs(phi))) break;
    }
    out.chart = 0;
    out.coords = SVec::Constant(1, phi);
    if (tangent) *tangent = SVec::Constant(1, (v0[0] >= 0.0 ? 1.0 : -1.0) / (1.0 + ao * std::cos(k_ * phi)));
    return true;
  }

 private:
  double L_;
  double k_;
  Perturbation p_;
};

// Round S² in two polar charts: chart 0 measures the polar angle from e_z,
// chart 1 from e_x. The perturbation bump is the height x_3.
class SphereModel final : public SectionModel {
 public:
  explicit SphereModel(Perturbation p) : p_(p) {}

  int dim() const override { return 2; }
  std::string spec() const override { return "sphere" + perturbation_suffix(p_); }

  static Eigen::Vector3d position(const SectionPoint& y) {
    const double th = y.coords[0], ps = y.coords[1];
    const double st = std::sin(th), ct = std::cos(th);
    if (y.chart == 0) return {st * std::cos(ps), st * std::sin(ps), ct};
    return {ct, st * std::cos(ps), st * std::sin(ps)};
  }

  static Eigen::Matrix<double, 3, 2> jacobian(const SectionPoint& y) {
    const double th = y.coords[0], ps = y.coords[1];
    const double st = std::sin(th), ct = std::cos(th), sp = std::sin(ps), cp = std::cos(ps);
    Eigen::Matrix<double, 3, 2> J;
    if (y.chart == 0) {
      J << ct * cp, -st * sp, ct * sp, st * cp, -st, 0.0;
    } else {
      J << -st, 0.0, ct * cp, -st * sp, ct * sp, st * cp;
    }
    return J;
  }

  static SectionPoint chart_coords(const Eigen::Vector3d& x, int chart) {
    SectionPoint y;
    y.chart = chart;
    y.coords.resize(2);
    if (chart == 0) {
      y.coords << std::atan2(std::hypot(x[0], x[1]), x[2]), std::atan2(x[1], x[0]);
    } else {
      y.coords << std::atan2(std::hypot(x[1], x[2]), x[0]), std::atan2(x[2], x[1]);
    }
    return y;
  }

  static double bump(const SectionPoint& y) { return position(y)[2]; }
  static SVec d_bump(const SectionPoint& y) {
    const double th = y.coords[0], ps = y.coords[1];
    SVec g(2);
    if (y.chart == 0) {
      g << -std::sin(th), 0.0;
    } else {
      g << std::cos(th) * std::sin(ps), std::sin(th) * std::cos(ps);
    }
    return g;
  }

  static SMat base_metric(const SectionPoint& y) {
    const double st = std::sin(y.coords[0]);
    SMat m = SMat::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = st * st;
    return m;
  }

  double scale(double r, const SectionPoint& y) const override {
    return 1.0 + p_.amplitude * (p_.offset + std::sin(r)) * bump(y);
  }
  SMat metric(double r, const SectionPoint& y) const override {
    const double s = scale(r, y);
    return s * s * base_metric(y);
  }
  SMat d_r_metric(double r, const SectionPoint& y) const override {
    if (p_.amplitude == 0.0) return SMat::Zero(2, 2);
    const double s = scale(r, y);
    return 2.0 * s * p_.amplitude * std::cos(r) * bump(y) * base_metric(y);
  }
  SMat d_y_metric(double r, const SectionPoint& y, int k) const override {
    const double s = scale(r, y);
    SMat out = SMat::Zero(2, 2);
    if (k == 0) out(1, 1) = s * s * std::sin(2.0 * y.coords[0]);
    if (p_.amplitude != 0.0) {
      out += 2.0 * s * p_.amplitude * (p_.offset + std::sin(r)) * d_bump(y)[k] * base_metric(y);
    }
    return out;
  }

  bool rechart(SectionPoint& y, SVec& eta, SVec* tangent) const override {
    const double th = y.coords[0];
    if (th >= kPi / 4 && th <= 3 * kPi / 4) return false;
    const auto J_old = jacobian(y);
    const Eigen::Vector3d x = position(y);
    SectionPoint z = chart_coords(x, 1 - y.chart);
    const auto J_new = jacobian(z);
    // v_new = M v_old with J_new v_new = J_old v_old.
    const Eigen::Matrix2d M = (J_new.transpose() * J_new).ldlt().solve(J_new.transpose() * J_old);
    if (eta.size() == 2) eta = M.transpose().partialPivLu().solve(Eigen::Vector2d(eta));
    if (tangent) *tangent = M * Eigen::Vector2d(*tangent);
    y = std::move(z);
    return true;
  }

  Eigen::Vector3d embed(const SectionPoint& y) const override { return position(y); }

  std::vector<SectionPoint> sample_points(std::size_t n) const override {
    std::vector<SectionPoint> out;
    out.reserve(n);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
      const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      const double rad = std::sqrt(1.0 - z * z);
      const double ang = golden * static_cast<double>(i);
      SectionPoint y = chart_coords({rad * std::cos(ang), rad * std::sin(ang), z}, 0);
      SVec none;
      rechart(y, none, nullptr);
      out.push_back(std::move(y));
    }
    return out;
  }

  bool flat_base() const override { return p_.amplitude * p_.offset == 0.0; }

  double base_distance(const SectionPoint& a, const SectionPoint& b) const override {
    if (!flat_base()) throw InvalidInput("h_0 distance is only available for the round sphere");
    const Eigen::Vector3d xa = position(a), xb = position(b);
    return std::atan2(xa.cross(xb).norm(), xa.dot(xb));
  }

  bool closed_base_geodesic(const SectionPoint& y0, const SVec& v0, double tau, SectionPoint& out,
                            SVec* tangent) const override {
    if (!flat_base()) return false;
    const Eigen::Vector3d x0 = position(y0);
    Eigen::Vector3d u = jacobian(y0) * Eigen::Vector2d(v0);
    u -= u.dot(x0) * x0;
    u.normalize();
    const double c = std::cos(tau), s = std::sin(tau);
    out = chart_coords(c * x0 + s * u, 0);
    SVec none;
    rechart(out, none, nullptr);
    if (tangent) {
      const auto J = jacobian(out);
      const Eigen::Vector3d w = -s * x0 + c * u;
      *tangent = (J.transpose() * J).ldlt().solve(J.transpose() * w);
    }
    return true;
  }

 private:
  Perturbation p_;
};

struct KeyValue {
  double pert = 0.0;
  double offset = 0.0;
};

KeyValue parse_options(const std::vector<std::string_view>& parts, std::size_t first, std::string_view spec) {
  KeyValue kv;
  for (std::size_t i = first; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string_view::npos) throw InvalidInput("bad section option in '" + std::string(spec) + "'");
    const auto key = parts[i].substr(0, eq);
    const double v = detail::parse_double(parts[i].substr(eq + 1));
    if (key == "pert") {
      kv.pert = v;
    } else if (key == "offset") {
      kv.offset = v;
    } else {
      throw InvalidInput("unknown section option '" + std::string(key) + "'");
    }
  }
  return kv;
}

}  // namespace

CrossSection::CrossSection(std::shared_ptr<const SectionModel> model, double R)
    : model_(std::move(model)), R_(R) {
  if (!model_) throw InvalidInput("cross section needs a model");
  if (!(R > 0.0)) throw InvalidInput("cross section needs R > 0");
  spec_ = model_->spec();

  constexpr std::size_t kGrid = 128;
  const auto points = model_->sample_points(kGrid);
  double worst = 0.0;
  for (std::size_t i = 0; i < kGrid; ++i) {
    const double r = R_ * static_cast<double>(i) / static_cast<double>(kGrid - 1);
    for (const auto& y : points) {
      const double s = model_->scale(r, y);
      if (!(s >= 0.5 && s <= 2.0)) {
        throw InvalidInput("perturbation too large: 1 + a·w = " + detail::format_number(s) + " leaves [1/2, 2]");
      }
      const SMat h = model_->metric(r, y);
      Eigen::SelfAdjointEigenSolver<SMat> eig(h, Eigen::EigenvaluesOnly);
      if (!h.allFinite() || !(eig.eigenvalues().minCoeff() > 1e-12 * eig.eigenvalues().maxCoeff())) {
        throw InvalidInput("degenerate cross-section metric at r = " + detail::format_number(r));
      }
      const SMat dh = model_->d_r_metric(r, y);
      if (dh.isZero(0.0)) continue;
      Eigen::GeneralizedSelfAdjointEigenSolver<SMat> gen(dh, h, Eigen::EigenvaluesOnly);
      worst = std::max(worst, 0.5 * gen.eigenvalues().cwiseAbs().maxCoeff());
    }
  }
  sampled_c_ = worst;
  c_bound_ = 1.25 * worst;
  warped_ = worst == 0.0;
  if (R_ * c_bound_ >= 1.0) {
    throw InvalidInput("R·c = " + detail::format_number(R_ * c_bound_) + " >= 1; shrink R or the perturbation");
  }
}

double CrossSection::covector_norm_sq(double r, const SectionPoint& y, const SVec& eta) const {
  return eta.dot(metric(r, y).ldlt().solve(eta));
}

double CrossSection::vector_norm_sq(double r, const SectionPoint& y, const SVec& v) const {
  return v.dot(metric(r, y) * v);
}

CrossSection circle_section(double circumference, Perturbation pert, double R) {
  return CrossSection(std::make_shared<CircleModel>(circumference, pert), R);
}

CrossSection sphere_section(Perturbation pert, double R) {
  return CrossSection(std::make_shared<SphereModel>(pert), R);
}

CrossSection parse_section_spec(std::string_view spec, double R) {
  const auto parts = detail::split(spec, ':');
  if (parts.empty()) throw InvalidInput("empty section spec");
  if (parts[0] == "circle") {
    if (parts.size() < 2) throw InvalidInput("circle spec needs a circumference");
    const auto kv = parse_options(parts, 2, spec);
    return circle_section(detail::parse_double(parts[1]), {kv.pert, kv.offset}, R);
  }
  if (parts[0] == "sphere") {
    const auto kv = parse_options(parts, 1, spec);
    return sphere_section({kv.pert, kv.offset}, R);
  }
  throw InvalidInput("unknown section '" + std::string(parts[0]) + "'");
}

std::string normalize_section_spec(std::string_view spec) {
  const auto parts = detail::split(spec, ':');
  if (parts.empty()) throw InvalidInput("empty section spec");
  if (parts[0] == "circle") {
    if (parts.size() < 2) throw InvalidInput("circle spec needs a circumference");
    const auto kv = parse_options(parts, 2, spec);
    return CircleModel(detail::parse_double(parts[1]), {kv.pert, kv.offset}).spec();
  }
  if (parts[0] == "sphere") {
    const auto kv = parse_options(parts, 1, spec);
    return SphereModel({kv.pert, kv.offset}).spec();
  }
  throw InvalidInput("unknown section '" + std::string(parts[0]) + "'");
}

SectionPoint base_geodesic_numeric(const CrossSection& cs, const SectionPoint& y0, const SVec& v0, double tau,
                                   double rtol) {
  using Stepper = ode::Dopri5<4>;
  const auto& model = cs.model();
  const int d = cs.dim();
  const std::size_t n = static_cast<std::size_t>(2 * d);

  SectionPoint y = y0;
  SVec v = tau < 0.0 ? SVec(-v0) : v0;
  const SMat h0 = model.metric(0.0, y);
  v /= std::sqrt(v.dot(h0 * v));
  SVec eta = h0 * v;
  const double total = std::abs(tau);

  Stepper::State X{};
  auto pack = [&] {
    for (int i = 0; i < d; ++i) {
      X[static_cast<std::size_t>(i)] = y.coords[i];
      X[static_cast<std::size_t>(d + i)] = eta[i];
    }
  };
  int chart = y.chart;
  auto rhs = [&](double, const Stepper::State& Z) {
    SectionPoint p;
    p.chart = chart;
    p.coords.resize(d);
    SVec e(d);
    for (int i = 0; i < d; ++i) {
      p.coords[i] = Z[static_cast<std::size_t>(i)];
      e[i] = Z[static_cast<std::size_t>(d + i)];
    }
    const SMat h = model.metric(0.0, p);
    const SVec u = h.ldlt().solve(e);
    Stepper::State out{};
    for (int k = 0; k < d; ++k) {
      out[static_cast<std::size_t>(k)] = u[k];
      out[static_cast<std::size_t>(d + k)] = 0.5 * u.dot(model.d_y_metric(0.0, p, k) * u);
    }
    return out;
  };

  pack();
  double t = 0.0;
  double h = std::min(0.05, total);
  Stepper::State dX = rhs(t, X);
  for (std::size_t iter = 0; t < total && iter < 1000000; ++iter) {
    const double step = std::min(h, total - t);
    const auto res = Stepper::step(rhs, t, X, dX, step, n, rtol, rtol * 1e-2, false);
    if (res.error <= 1.0) {
      t = (step == total - t) ? total : t + step;
      X = res.y;
      for (int i = 0; i < d; ++i) {
        y.coords[i] = X[static_cast<std::size_t>(i)];
        eta[i] = X[static_cast<std::size_t>(d + i)];
      }
      if (model.rechart(y, eta, nullptr)) {
        chart = y.chart;
        pack();
      }
      dX = rhs(t, X);
    }
    h = Stepper::next_step(step, res.error);
    if (h < 1e-14) throw IntegrationError("base geodesic step size underflow");
  }
  y.chart = chart;
  return y;
}

SectionPoint base_geodesic(const CrossSection& cs, const SectionPoint& y0, const SVec& v0, double tau) {
  SectionPoint out;
  if (cs.model().closed_base_geodesic(y0, v0, tau, out)) return out;
  return base_geodesic_numeric(cs, y0, v0, tau);
}

double mean_curvature_scalar(const CrossSection& cs, const WarpingFunction& wf, double r, const SectionPoint& y) {
  if (!(r > 0.0 && r < wf.radius())) throw InvalidInput("mean curvature needs 0 < r < R");
  const SMat h = cs.metric(r, y);
  const SMat dh = cs.d_r_metric(r, y);
  const double trace = h.ldlt().solve(dh).trace();
  return -cs.dim() * wf.log_derivative(r) - 0.5 * trace;
}

SectionLaunch default_launch(const CrossSection& cs) {
  SectionLaunch out;
  if (cs.dim() == 1) {
    out.y0.coords = SVec::Constant(1, 0.0);
    out.v0 = SVec::Constant(1, 1.0);
  } else {
    out.y0.coords.resize(2);
    out.y0.coords << kPi / 2, 0.0;
    out.v0.resize(2);
    out.v0 << 0.0, 1.0;
  }
  out.v0 /= std::sqrt(cs.vector_norm_sq(0.0, out.y0, out.v0));
  return out;
}

SectionPoint make_point(const CrossSection& cs, const std::vector<double>& coords) {
  return make_launch(cs, coords, std::vector<double>(coords.size(), 0.0)).y0;
}

SectionLaunch make_launch(const CrossSection& cs, const std::vector<double>& coords,
                          const std::vector<double>& velocity) {
  if (static_cast<int>(coords.size()) != cs.dim() || static_cast<int>(velocity.size()) != cs.dim()) {
    throw InvalidInput("launch point or velocity has the wrong dimension for the section");
  }
  SectionLaunch out;
  out.y0.coords.resize(cs.dim());
  out.v0.resize(cs.dim());
  for (int i = 0; i < cs.dim(); ++i) {
    out.y0.coords[i] = coords[static_cast<std::size_t>(i)];
    out.v0[i] = velocity[static_cast<std::size_t>(i)];
  }
  SVec none;
  cs.model().rechart(out.y0, none, &out.v0);
  const double n2 = cs.vector_norm_sq(0.0, out.y0, out.v0);
  if (n2 > 0.0) out.v0 /= std::sqrt(n2);
  return out;
}

}  // namespace sgeo
