#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sgeo/warp.hpp"

namespace sgeo {

// dim(Y) <= 2 for the built-in sections.
using SVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
using SMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

struct SectionPoint {
  int chart = 0;
  SVec coords;
};

/// h_r = (1 + a·w)² h_base with w = (offset + sin r)·bump(y). With offset 0
/// the metric at r = 0 is the unperturbed one.
struct Perturbation {
  double amplitude = 0.0;
  double offset = 0.0;
};

/// Metric family on one cross section. Also the extension point for other
/// closed manifolds Y.
class SectionModel {
 public:
  virtual ~SectionModel() = default;

  virtual int dim() const = 0;
  virtual std::string spec() const = 0;

  virtual SMat metric(double r, const SectionPoint& y) const = 0;
  virtual SMat d_r_metric(double r, const SectionPoint& y) const = 0;
  virtual SMat d_y_metric(double r, const SectionPoint& y, int k) const = 0;
  // 1 + a·w; the constructor requires it to stay in [1/2, 2].
  virtual double scale(double r, const SectionPoint& y) const = 0;

  /// Moves y into its preferred chart, transforming the covector eta and
  /// (if given) a tangent vector. Returns true if the chart changed.
  virtual bool rechart(SectionPoint& y, SVec& eta, SVec* tangent = nullptr) const {
    (void)y;
    (void)eta;
    (void)tangent;
    return false;
  }

  virtual Eigen::Vector3d embed(const SectionPoint& y) const = 0;
  virtual std::vector<SectionPoint> sample_points(std::size_t n) const = 0;

  /// True when h_0 is the flat circle or the round sphere.
  virtual bool flat_base() const = 0;
  /// Distance in (Y, h_0).
  virtual double base_distance(const SectionPoint& a, const SectionPoint& b) const = 0;
  /// Closed-form unit-speed geodesic of h_0 when available; `tangent`
  /// receives the velocity in the chart of `out`.
  virtual bool closed_base_geodesic(const SectionPoint& y0, const SVec& v0, double tau, SectionPoint& out,
                                    SVec* tangent = nullptr) const = 0;
};

class CrossSection {
 public:
  /// Validates the model on a 128 x 128 grid over [0, R] x Y and computes
  /// c_bound. Throws InvalidInput on a degenerate metric, a scale factor
  /// outside [1/2, 2], or R·c_bound >= 1.
  CrossSection(std::shared_ptr<const SectionModel> model, double R);

  int dim() const { return model_->dim(); }
  const std::string& spec() const noexcept { return spec_; }
  double radius() const noexcept { return R_; }
  double c_bound() const noexcept { return c_bound_; }
  /// Largest sampled generalized eigenvalue of ∂_r h against 2h, before the safety factor.
  double sampled_c() const noexcept { return sampled_c_; }
  bool warped() const noexcept { return warped_; }
  const SectionModel& model() const noexcept { return *model_; }

  SMat metric(double r, const SectionPoint& y) const { return model_->metric(r, y); }
  SMat d_r_metric(double r, const SectionPoint& y) const { return model_->d_r_metric(r, y); }
  SMat d_y_metric(double r, const SectionPoint& y, int k) const { return model_->d_y_metric(r, y, k); }

  /// |η|²_{h_r} for a covector η.
  double covector_norm_sq(double r, const SectionPoint& y, const SVec& eta) const;
  /// |v|²_{h_r} for a tangent vector v.
  double vector_norm_sq(double r, const SectionPoint& y, const SVec& v) const;

 private:
  std::shared_ptr<const SectionModel> model_;
  std::string spec_;
  double R_;
  double c_bound_ = 0.0;
  double sampled_c_ = 0.0;
  bool warped_ = true;
};

CrossSection circle_section(double circumference, Perturbation pert, double R);
CrossSection sphere_section(Perturbation pert, double R);

/// "circle:L[:pert=a][:offset=o]" or "sphere[:pert=a][:offset=o]".
CrossSection parse_section_spec(std::string_view spec, double R);
std::string normalize_section_spec(std::string_view spec);

/// Point ỹ(τ) of the unit-speed h_0 geodesic with ỹ(0) = y0, ỹ'(0) = v0.
SectionPoint base_geodesic(const CrossSection& cs, const SectionPoint& y0, const SVec& v0, double tau);

/// Numerical h_0 geodesic (used when no closed form exists, and as a check).
SectionPoint base_geodesic_numeric(const CrossSection& cs, const SectionPoint& y0, const SVec& v0, double tau,
                                   double rtol = 1e-12);

/// Scalar mean curvature of {r} x Y: −dim·f'/f − ½ Tr(h⁻¹ ∂_r h).
double mean_curvature_scalar(const CrossSection& cs, const WarpingFunction& wf, double r, const SectionPoint& y);

/// Launch point and h_0-unit direction used when the caller gives none:
/// φ = 0 moving forward on the circle, (1, 0, 0) heading east on the sphere.
struct SectionLaunch {
  SectionPoint y0;
  SVec v0;
};
SectionLaunch default_launch(const CrossSection& cs);

/// Builds a point from chart-0 coordinates and moves it to its preferred chart.
SectionPoint make_point(const CrossSection& cs, const std::vector<double>& coords);

/// Chart-0 point and velocity, moved to the preferred chart; the velocity
/// is rescaled to unit h_0 length unless it is zero.
SectionLaunch make_launch(const CrossSection& cs, const std::vector<double>& coords,
                          const std::vector<double>& velocity);

}  // namespace sgeo
