#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "sgeo/cross_section.hpp"
#include "sgeo/warp.hpp"

namespace sgeo {

struct IntegratorOptions {
  double rtol = 1e-12;
  double atol = 1e-14;
  std::size_t dense_samples = 2048;
  double shell_tolerance = 1e-6;  // |2H - 1| beyond this aborts the run
  std::size_t max_steps = 5'000'000;
};

/// Phase-space point on the unit-speed shell: ξ = sin θ, η a covector on Y.
struct GeodesicState {
  double t = 0.0;
  double r = 0.0;
  double theta = 0.0;
  SectionPoint y;
  SVec eta;
};

struct StateDerivative {
  double dr = 0.0;
  double dtheta = 0.0;
  SVec dy;
  SVec deta;
  double dtau = 0.0;
};

enum class Direction { forward, backward, both };
enum class TrajectoryClass { radial, winding };

std::string_view to_string(TrajectoryClass c);

struct TrajectorySample {
  double t = 0.0;
  double r = 0.0;
  double theta = 0.0;
  SectionPoint y;
  SVec eta;
  double eta_norm = 0.0;      // |η|_{h_r}
  double log_eta_norm = 0.0;
  double hamiltonian = 0.0;   // 2H = sin²θ + |η|²/f²
  double clairaut = 0.0;      // f(r) cos θ
  double clairaut_drift = 0.0;  // |cos θ − |η(0)|/f(r)|
  double speed_Y = 0.0;       // |ẏ|_{h_r}
  double tau = 0.0;           // ∫ |ẏ| dt from t = 0
  double rho = 0.0;           // f(r)
  double u = 0.0;             // sign(sin θ) F(ρ |sin θ|)
};

/// Integrated geodesic. Samples are stored at every accepted step and on a
/// uniform time grid; state_at() evaluates the stepper's dense output.
class Trajectory {
 public:
  static constexpr std::size_t kMaxState = 7;
  using State = std::array<double, kMaxState>;

  struct Segment {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double s0 = 0.0;  // step start in the integration's own time
    double h = 0.0;
    bool mirrored = false;
    int chart = 0;
    std::array<State, 5> dense{};
  };

  const std::vector<TrajectorySample>& samples() const noexcept { return samples_; }
  const std::vector<TrajectorySample>& dense() const noexcept { return dense_; }
  const std::vector<Segment>& segments() const noexcept { return segments_; }

  double t_begin() const noexcept { return t_begin_; }
  double t_end() const noexcept { return t_end_; }
  bool exits_begin() const noexcept { return exits_begin_; }
  bool exits_end() const noexcept { return exits_end_; }
  bool radial() const noexcept { return radial_; }
  double start_radius() const noexcept { return r0_; }
  /// Smallest r over the accepted steps (the launch radius for launch_winding).
  double delta() const noexcept { return delta_; }
  double log_kappa() const noexcept { return log_kappa_; }
  double log_tau_unit() const noexcept { return log_tau_unit_; }
  double max_shell_residual() const noexcept { return max_shell_; }
  double max_clairaut_drift() const noexcept { return max_clairaut_; }
  std::size_t rhs_evaluations() const noexcept { return rhs_evals_; }

  const WarpingFunction& warp() const noexcept { return wf_; }
  const CrossSection& section() const noexcept { return cs_; }

  TrajectorySample state_at(double t) const;
  /// τ / τ_unit at time t; τ_unit = 1/f'(δ) for a winding launch.
  double scaled_tau_at(double t) const;
  double scaled_tau_begin() const noexcept { return tau_bar_begin_; }
  double scaled_tau_end() const noexcept { return tau_bar_end_; }

 private:
  friend Trajectory integrate(const WarpingFunction&, const CrossSection&, const GeodesicState&, Direction,
                              const IntegratorOptions&);
  Trajectory(WarpingFunction wf, CrossSection cs) : wf_(std::move(wf)), cs_(std::move(cs)) {}

  State raw_at(double t, int& chart) const;
  TrajectorySample make_sample(double t, const State& X, int chart) const;

  WarpingFunction wf_;
  CrossSection cs_;
  std::vector<TrajectorySample> samples_;
  std::vector<TrajectorySample> dense_;
  std::vector<Segment> segments_;
  double t_begin_ = 0.0, t_end_ = 0.0;
  bool exits_begin_ = false, exits_end_ = false;
  bool radial_ = false;
  double r0_ = 0.0, theta0_ = 0.0, delta_ = 0.0;
  SectionPoint y_start_;
  // Warped sections: y follows the closed-form base geodesic at arclength τ.
  bool decoupled_ = false;
  SVec v_start_;
  double log_kappa_ = 0.0, log_tau_unit_ = 0.0;
  double tau_bar_begin_ = 0.0, tau_bar_end_ = 0.0;
  double max_shell_ = 0.0, max_clairaut_ = 0.0;
  std::size_t rhs_evals_ = 0;
};

/// Lowest point of the winding geodesic γ_{δ,y0,v0}: r = δ, θ = 0 and
/// η = f(δ)·h_δ(v̂) with v̂ = v0 normalised in h_δ, so |η|_{h_δ} = f(δ).
GeodesicState launch_winding(const WarpingFunction& wf, const CrossSection& cs, double delta, const SectionPoint& y0,
                             const SVec& v0);

/// Radial launch at r0 (η = 0), moving outward or inward.
GeodesicState launch_radial(const CrossSection& cs, double r0, const SectionPoint& y0, bool outward);

StateDerivative vector_field(const WarpingFunction& wf, const CrossSection& cs, const GeodesicState& state);

/// Adaptive DOPRI5 integration until r reaches R (refined to |r − R| < 1e-10).
/// Backward time uses the symmetry (t, θ, η) → (−t, −θ, −η). Throws
/// IntegrationError on step underflow or shell drift.
Trajectory integrate(const WarpingFunction& wf, const CrossSection& cs, const GeodesicState& start,
                     Direction direction = Direction::both, const IntegratorOptions& opts = {});

TrajectoryClass classify(const Trajectory& traj);

struct WindingLength {
  double length = 0.0;      // ℓ = ∫ |ẏ|_h dt between entry and exit
  double normalized = 0.0;  // f'(δ)·ℓ
  double delta = 0.0;
};

WindingLength winding_length(const Trajectory& traj);

struct TauSample {
  double tau = 0.0;
  double t = 0.0;
  double r = 0.0;
  SectionPoint y;
  SVec eta_bar;  // η / f(δ)
};

/// State at a given τ (bisection on the monotone map t ↦ τ).
TauSample state_at_tau(const Trajectory& traj, double tau);

/// Resampling on a uniform τ grid spanning the whole trajectory.
std::vector<TauSample> reparametrize_tau(const Trajectory& traj, std::size_t n = 1025);

}  // namespace sgeo
