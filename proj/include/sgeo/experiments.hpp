#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sgeo/cross_section.hpp"
#include "sgeo/geodesic.hpp"
#include "sgeo/warp.hpp"

namespace sgeo {

/// Serial runs are the reference; parallel runs split independent
/// integrations over OpenMP threads and must agree bit for bit.
enum class Execution { serial, parallel };

// ---------------------------------------------------------------------------
// δ-sweeps

struct SweepOptions {
  IntegratorOptions integrator;
  double noise_floor = 1e-8;  // relative changes below this count as converged
  double cf_tol = 1e-10;
  std::size_t tail = 4;       // points used for the trend check and the fit
};

struct SweepResult {
  std::string warp;
  std::string section;
  double R = 0.0;
  std::vector<double> deltas;
  std::vector<double> lengths;
  std::vector<double> normalized;  // f'(δ)·ℓ
  std::vector<double> errors_rel;  // |normalized / C_f − 1|
  double extrapolated_limit = 0.0;
  double fitted_rate = 0.0;  // p in error ~ δ^p; NaN when the tail is flat
  double reference_Cf = 0.0; // NaN when C_f is unavailable
  bool converged = false;
  std::string note;
};

/// Geometric ladder with ratio close to 1/√10, from min(0.3, 0.6 R) down to
/// 1e-4 (1e-3 for the exponential cusps, and never below the point where
/// log f drops under −600).
std::vector<double> default_delta_ladder(const WarpingFunction& wf);

SweepResult delta_sweep(const WarpingFunction& wf, const CrossSection& cs, const std::vector<double>& deltas,
                        const SectionLaunch& launch, const SweepOptions& opts = {},
                        Execution exec = Execution::parallel);

struct Extrapolation {
  double limit = 0.0;
  double rate = 0.0;
  bool ok = false;
};

/// Fits log|N_k − N_{k−1}| against log δ_k over the last `tail` points and
/// sums the geometric remainder.
Extrapolation richardson_tail(const std::vector<double>& deltas, const std::vector<double>& values, std::size_t tail,
                              double noise_floor);

// ---------------------------------------------------------------------------
// Per-trajectory checks

struct BoundsReport {
  bool passed = true;
  bool skipped = false;
  std::string note;
  double C = 0.0;
  double worst_lower = 0.0;   // min of r − (1 − Cδ)|t|
  double worst_upper = 0.0;   // min of |t| + δ − r
  double worst_eta = 0.0;     // min of c(r − δ) − |log|η| − log f(δ)|
  double worst_strict = 0.0;  // min of r − |t| (warped only)
  double worst_t = 0.0;
  std::size_t checked = 0;
};

BoundsReport verify_radial_bounds(const Trajectory& traj, double delta, double c_bound, double R,
                                  double slack = 1e-8);

struct ConservationReport {
  double max_shell_residual = 0.0;     // max |2H − 1|
  double max_clairaut_drift = 0.0;     // warped case only meaningful
  double worst_log_eta_excess = 0.0;   // max of |Δ log|η|| − c|Δr| over sample pairs
  double worst_u_rate = 0.0;           // min discrete du/dt for t > 0 (warped convex)
  bool u_checked = false;
};

ConservationReport check_conservation(const Trajectory& traj, double c_bound);

struct ComparisonReport {
  bool passed = false;
  double min_margin = 0.0;  // min of r̄(t) − r(t)
  double t_at_min = 0.0;
  std::size_t checked = 0;
};

ComparisonReport comparison_test(const WarpingFunction& wf, const CrossSection& cs, double delta, double delta_bar,
                                 const SectionLaunch& launch, const SectionLaunch& launch_bar,
                                 const IntegratorOptions& opts = {});

struct LimitReport {
  std::vector<double> deltas;
  std::vector<double> sup_distances;
  std::vector<double> window_lo;
  std::vector<double> window_hi;
  std::vector<std::string> notes;
  bool decreasing = false;
  bool final_below = false;
  double threshold = 0.05;
  bool passed() const { return decreasing && final_below; }
};

LimitReport limit_geodesic_test(const WarpingFunction& wf, const CrossSection& cs, const std::vector<double>& ladder,
                                const SectionLaunch& launch, double tau_lo, double tau_hi,
                                const IntegratorOptions& opts = {}, Execution exec = Execution::parallel,
                                std::size_t tau_points = 257);

enum class FigureKind { cone, cusp };

struct Figure1Bundle {
  FigureKind kind = FigureKind::cone;
  double R = 1.5;
  double delta = 0.3;
  std::vector<double> t;
  std::vector<double> r;
  std::vector<double> angle;  // unwrapped circle coordinate
  std::vector<Eigen::Vector3d> embedded;
  double swept_angle = 0.0;
  double winding_count = 0.0;       // ℓ / 2π
  double remark_prediction = 0.0;   // C_f / (2π f'(δ))
  double intro_prediction = 0.0;    // π / (C_f δ)
  double max_shell_residual = 0.0;
};

/// Sample paths at R = 1.5, δ = 0.3: the cone f = r (a flat plane) and the
/// surface swept by x = z², whose warp comes from the profile conversion.
Figure1Bundle figure1_data(FigureKind kind, const IntegratorOptions& opts = {});

// ---------------------------------------------------------------------------
// Randomized campaigns

struct CaseResult {
  std::size_t index = 0;
  std::string warp;
  std::string section;
  double R = 0.0;
  double delta = 0.0;
  double delta_bar = 0.0;
  bool passed = false;
  double margin = 0.0;
  std::string detail;
};

struct CampaignReport {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<CaseResult> cases;
  std::size_t failures() const;
  bool passed() const { return failures() == 0; }
};

/// Bounds of the radial component and of |η| on n random (family, δ,
/// perturbation) cases.
CampaignReport run_bounds_campaign(std::size_t n, std::uint64_t seed, Execution exec = Execution::parallel,
                                   const IntegratorOptions& opts = {}, double slack = 1e-8);

/// r(t) < r̄(t) on n random warped convex pairs δ < δ̄.
CampaignReport run_comparison_campaign(std::size_t n, std::uint64_t seed, Execution exec = Execution::parallel,
                                       const IntegratorOptions& opts = {});

// ---------------------------------------------------------------------------
// Aggregated verification

struct VerifyOptions {
  std::vector<double> deltas;  // empty selects {0.3, 0.1, 0.03, 0.01} ∩ (0, R/2]
  IntegratorOptions integrator;
  double slack = 1e-8;
  double log_eta_slack = 1e-6;
  double conservation_tol = 1e-9;
  bool campaigns = false;
  std::size_t bounds_cases = 200;
  std::size_t comparison_cases = 100;
  std::uint64_t seed = 20240601;
  Execution exec = Execution::parallel;
};

struct VerifyItem {
  std::string check;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyItem> items;
  bool passed() const;
};

VerifyReport run_verify_suite(const WarpingFunction& wf, const CrossSection& cs, const SectionLaunch& launch,
                              const VerifyOptions& opts = {});

}  // namespace sgeo
