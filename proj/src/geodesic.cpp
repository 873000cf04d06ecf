#include "sgeo/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sgeo/errors.hpp"
#include "sgeo/ode.hpp"
#include "util.hpp"

namespace sgeo {

namespace {

using State = Trajectory::State;
using Stepper = ode::Dopri5<Trajectory::kMaxState>;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Packed layout: r, θ, y[d], η̄[d], τ̄ with η = κ η̄ and τ = τ_unit τ̄.
struct Packing {
  int d;
  std::size_t n() const { return static_cast<std::size_t>(3 + 2 * d); }
  std::size_t y(int i) const { return static_cast<std::size_t>(2 + i); }
  std::size_t eta(int i) const { return static_cast<std::size_t>(2 + d + i); }
  std::size_t tau() const { return static_cast<std::size_t>(2 + 2 * d); }
};

struct FlowContext {
  const WarpingFunction& wf;
  const CrossSection& cs;
  Packing pk;
  double log_kappa;
  double log_tau_unit;
  bool decoupled = false;
  int chart = 0;
  std::size_t evals = 0;

  SectionPoint point(const State& X) const {
    SectionPoint p;
    p.chart = chart;
    p.coords.resize(pk.d);
    for (int i = 0; i < pk.d; ++i) p.coords[i] = X[pk.y(i)];
    return p;
  }
  SVec eta_bar(const State& X) const {
    SVec e(pk.d);
    for (int i = 0; i < pk.d; ++i) e[i] = X[pk.eta(i)];
    return e;
  }

  State operator()(double, const State& X) {
    ++evals;
    State out{};
    const double r = X[0];
    if (!(r > 0.0) || !std::isfinite(r)) {
      out.fill(kNaN);
      return out;
    }
    const double lf = wf.log_f(r);
    const double ld = wf.log_derivative(r);
    const SectionPoint p = point(X);
    const SVec eb = eta_bar(X);
    const SMat h = cs.metric(r, p);
    const SVec u = h.ldlt().solve(eb);
    const double nb2 = eb.dot(u);
    const double q = std::exp(log_kappa - 2.0 * lf);

    double pert = 0.0;
    if (!cs.warped()) pert = -u.dot(cs.d_r_metric(r, p) * u) / (2.0 * nb2);
    out[0] = std::sin(X[1]);
    out[1] = (ld - pert) * std::cos(X[1]);
    for (int k = 0; k < pk.d && !decoupled; ++k) {
      out[pk.y(k)] = q * u[k];
      out[pk.eta(k)] = 0.5 * q * u.dot(cs.d_y_metric(r, p, k) * u);
    }
    out[pk.tau()] = std::exp(log_kappa - 2.0 * lf - log_tau_unit) * std::sqrt(nb2);
    return out;
  }
};

struct LegPoint {
  double s;
  State X;
  int chart;
};

struct Leg {
  std::vector<Trajectory::Segment> segments;
  std::vector<LegPoint> points;
  bool exited = false;
};

double shell_value(const FlowContext& ctx, const State& X) {
  const SectionPoint p = ctx.point(X);
  const double nb2 = ctx.cs.covector_norm_sq(X[0], p, ctx.eta_bar(X));
  const double s = std::sin(X[1]);
  return s * s + std::exp(2.0 * (ctx.log_kappa - ctx.wf.log_f(X[0]))) * nb2;
}

void repack(FlowContext& ctx, State& X, const SectionPoint& p, const SVec& eb) {
  for (int i = 0; i < ctx.pk.d; ++i) {
    X[ctx.pk.y(i)] = p.coords[i];
    X[ctx.pk.eta(i)] = eb[i];
  }
  ctx.chart = p.chart;
}

Leg run_leg(FlowContext& ctx, State X, int chart, bool mirrored, const IntegratorOptions& opts) {
  const double R = ctx.wf.radius();
  const std::size_t n = ctx.pk.n();
  ctx.chart = chart;
  Leg leg;
  double s = 0.0;
  State dX = ctx(s, X);
  leg.points.push_back({s, X, chart});
  double h = 0.01 / ctx.wf.log_derivative(X[0]);
  std::size_t steps = 0;

  while (true) {
    const double cap = 0.1 / ctx.wf.log_derivative(X[0]);
    h = std::min(h, cap);
    auto res = Stepper::step(ctx, s, X, dX, h, n, opts.rtol, opts.atol, true);
    double taken = h;
    bool accept = res.error <= 1.0 && std::isfinite(res.y[0]);
    bool exit_now = false;
    if (accept && res.y[0] >= R) {
      // Bisect on the step length with real steps until |r − R| < 1e-10.
      double lo = 0.0, hi = h;
      auto best = res;
      double best_h = h;
      for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        auto trial = Stepper::step(ctx, s, X, dX, mid, n, opts.rtol, opts.atol, true);
        if (!std::isfinite(trial.y[0])) {
          hi = mid;
          continue;
        }
        if (std::abs(trial.y[0] - R) < std::abs(best.y[0] - R)) {
          best = trial;
          best_h = mid;
        }
        if (std::abs(trial.y[0] - R) < 1e-10) break;
        (trial.y[0] > R ? hi : lo) = mid;
        if (hi - lo <= 1e-16 * std::max(1.0, s)) break;
      }
      res = best;
      taken = best_h;
      exit_now = true;
    }
    if (accept) {
      Trajectory::Segment seg;
      seg.s0 = s;
      seg.h = taken;
      seg.mirrored = mirrored;
      seg.chart = ctx.chart;
      seg.dense = res.dense;
      leg.segments.push_back(seg);
      s += taken;
      X = res.y;
      const double shell = shell_value(ctx, X);
      if (!(std::abs(shell - 1.0) <= opts.shell_tolerance)) {
        throw IntegrationError("unit-speed shell drift " + detail::format_number(shell - 1.0) + " at t = " +
                               detail::format_number(mirrored ? -s : s));
      }
      SectionPoint p = ctx.point(X);
      SVec eb = ctx.eta_bar(X);
      if (!ctx.decoupled && ctx.cs.model().rechart(p, eb, nullptr)) {
        repack(ctx, X, p, eb);
        dX = ctx(s, X);
      } else {
        dX = res.dydt;
      }
      leg.points.push_back({s, X, ctx.chart});
      if (exit_now) {
        leg.exited = true;
        break;
      }
      if (++steps > opts.max_steps) throw IntegrationError("step budget exhausted before exit");
    }
    h = Stepper::next_step(taken, res.error);
    if (!(h > 1e-15 * std::max(1.0, s))) {
      throw IntegrationError("step size underflow at t = " + detail::format_number(mirrored ? -s : s) +
                             ", r = " + detail::format_number(X[0]));
    }
  }
  return leg;
}

}  // namespace

std::string_view to_string(TrajectoryClass c) { return c == TrajectoryClass::radial ? "radial" : "winding"; }

GeodesicState launch_winding(const WarpingFunction& wf, const CrossSection& cs, double delta, const SectionPoint& y0,
                             const SVec& v0) {
  if (!(delta > 0.0 && delta < wf.radius())) throw InvalidInput("launch needs 0 < delta < R");
  if (v0.size() != cs.dim() || y0.coords.size() != cs.dim()) throw InvalidInput("launch data has the wrong dimension");
  const SMat h = cs.metric(delta, y0);
  const double n2 = v0.dot(h * v0);
  if (!(n2 > 0.0)) throw InvalidInput("launch direction must be nonzero");
  GeodesicState st;
  st.r = delta;
  st.theta = 0.0;
  st.y = y0;
  st.eta = wf.f(delta) * (h * v0) / std::sqrt(n2);
  return st;
}

GeodesicState launch_radial(const CrossSection& cs, double r0, const SectionPoint& y0, bool outward) {
  GeodesicState st;
  st.r = r0;
  st.theta = outward ? std::numbers::pi / 2 : -std::numbers::pi / 2;
  st.y = y0;
  st.eta = SVec::Zero(cs.dim());
  return st;
}

StateDerivative vector_field(const WarpingFunction& wf, const CrossSection& cs, const GeodesicState& state) {
  if (!(state.r > 0.0 && state.r <= wf.radius())) throw InvalidInput("vector field needs 0 < r <= R");
  StateDerivative d;
  const double f = wf.f(state.r);
  const SMat h = cs.metric(state.r, state.y);
  const SVec u = h.ldlt().solve(state.eta);
  const double n2 = state.eta.dot(u);
  double pert = 0.0;
  if (n2 > 0.0 && !cs.warped()) pert = -u.dot(cs.d_r_metric(state.r, state.y) * u) / (2.0 * n2);
  d.dr = std::sin(state.theta);
  d.dtheta = (wf.log_derivative(state.r) - pert) * std::cos(state.theta);
  d.dy = u / (f * f);
  d.deta.resize(cs.dim());
  for (int k = 0; k < cs.dim(); ++k) d.deta[k] = 0.5 * u.dot(cs.d_y_metric(state.r, state.y, k) * u) / (f * f);
  d.dtau = std::sqrt(n2) / (f * f);
  return d;
}

Trajectory integrate(const WarpingFunction& wf, const CrossSection& cs, const GeodesicState& start,
                     Direction direction, const IntegratorOptions& opts) {
  const double R = wf.radius();
  if (!(start.r > 0.0 && start.r < R)) throw InvalidInput("start radius must lie in (0, R)");
  if (start.y.coords.size() != cs.dim() || start.eta.size() != cs.dim())
    throw InvalidInput("start state has the wrong dimension");

  Trajectory traj(wf, cs);
  traj.r0_ = start.r;
  traj.theta0_ = start.theta;
  traj.y_start_ = start.y;
  // Scaled so that |η|² cannot underflow for the exponential cusps.
  const double eta_scale = start.eta.size() ? start.eta.cwiseAbs().maxCoeff() : 0.0;

  if (eta_scale == 0.0) {
    // Radial: r = r0 + t sin θ0 with sin θ0 = ±1.
    const double s0 = std::sin(start.theta);
    if (std::abs(std::abs(s0) - 1.0) > 1e-12) throw InvalidInput("radial start must have theta = ±pi/2");
    traj.radial_ = true;
    const double to_outer = R - start.r, to_inner = start.r;
    const bool fwd = direction != Direction::backward, bwd = direction != Direction::forward;
    traj.t_end_ = fwd ? (s0 > 0 ? to_outer : to_inner) : 0.0;
    traj.t_begin_ = bwd ? -(s0 > 0 ? to_inner : to_outer) : 0.0;
    traj.exits_end_ = fwd && s0 > 0;
    traj.exits_begin_ = bwd && s0 < 0;
    traj.log_kappa_ = -std::numeric_limits<double>::infinity();
    traj.samples_ = {traj.state_at(traj.t_begin_), traj.state_at(traj.t_end_)};
    traj.delta_ = std::min(traj.samples_.front().r, traj.samples_.back().r);
    const std::size_t m = std::max<std::size_t>(opts.dense_samples, 2);
    for (std::size_t i = 0; i < m; ++i) {
      const double t = traj.t_begin_ + (traj.t_end_ - traj.t_begin_) * static_cast<double>(i) / static_cast<double>(m - 1);
      traj.dense_.push_back(traj.state_at(t));
    }
    return traj;
  }

  const SVec eta_unit = start.eta / eta_scale;
  const double log_kappa = std::log(eta_scale) + 0.5 * std::log(cs.covector_norm_sq(start.r, start.y, eta_unit));
  const double shell = std::pow(std::sin(start.theta), 2) + std::exp(2.0 * (log_kappa - wf.log_f(start.r)));
  if (std::abs(shell - 1.0) > 1e-8) throw InvalidInput("start state is not on the unit-speed shell");
  traj.log_kappa_ = log_kappa;
  traj.log_tau_unit_ = traj.log_kappa_ - 2.0 * wf.log_f(start.r) - std::log(wf.log_derivative(start.r));

  FlowContext ctx{wf, cs, Packing{cs.dim()}, traj.log_kappa_, traj.log_tau_unit_};
  const Packing pk = ctx.pk;
  if (cs.warped()) {
    SectionPoint probe;
    SVec v_unit = cs.metric(start.r, start.y).ldlt().solve(eta_unit);
    v_unit /= std::sqrt(cs.vector_norm_sq(start.r, start.y, v_unit));
    if (cs.model().closed_base_geodesic(start.y, v_unit, 0.0, probe)) {
      ctx.decoupled = traj.decoupled_ = true;
      traj.v_start_ = v_unit;
    }
  }
  State X0{};
  X0[0] = start.r;
  X0[1] = start.theta;
  for (int i = 0; i < pk.d; ++i) {
    X0[pk.y(i)] = start.y.coords[i];
    X0[pk.eta(i)] = eta_unit[i] * std::exp(std::log(eta_scale) - log_kappa);
  }

  Leg fwd, bwd;
  if (direction != Direction::backward) fwd = run_leg(ctx, X0, start.y.chart, false, opts);
  if (direction != Direction::forward) {
    State M = X0;
    M[1] = -M[1];
    for (int i = 0; i < pk.d; ++i) M[pk.eta(i)] = -M[pk.eta(i)];
    bwd = run_leg(ctx, M, start.y.chart, true, opts);
  }
  traj.rhs_evals_ = ctx.evals;

  auto unmirror = [&pk](State X) {
    X[1] = -X[1];
    for (int i = 0; i < pk.d; ++i) X[pk.eta(i)] = -X[pk.eta(i)];
    X[pk.tau()] = -X[pk.tau()];
    return X;
  };

  // Backward leg reversed into increasing t, then the forward leg.
  for (auto it = bwd.segments.rbegin(); it != bwd.segments.rend(); ++it) {
    auto seg = *it;
    seg.t_lo = -(seg.s0 + seg.h);
    seg.t_hi = -seg.s0;
    traj.segments_.push_back(seg);
  }
  for (auto seg : fwd.segments) {
    seg.t_lo = seg.s0;
    seg.t_hi = seg.s0 + seg.h;
    traj.segments_.push_back(seg);
  }
  for (auto it = bwd.points.rbegin(); it != bwd.points.rend(); ++it) {
    if (it->s == 0.0 && !fwd.points.empty()) continue;
    traj.samples_.push_back(traj.make_sample(-it->s, unmirror(it->X), it->chart));
  }
  for (const auto& p : fwd.points) traj.samples_.push_back(traj.make_sample(p.s, p.X, p.chart));

  traj.t_begin_ = traj.samples_.front().t;
  traj.t_end_ = traj.samples_.back().t;
  traj.exits_begin_ = bwd.exited;
  traj.exits_end_ = fwd.exited;
  traj.tau_bar_begin_ = bwd.points.empty() ? 0.0 : -bwd.points.back().X[pk.tau()];
  traj.tau_bar_end_ = fwd.points.empty() ? 0.0 : fwd.points.back().X[pk.tau()];
  traj.delta_ = traj.samples_.front().r;
  for (const auto& smp : traj.samples_) traj.delta_ = std::min(traj.delta_, smp.r);

  const std::size_t m = std::max<std::size_t>(opts.dense_samples, 2);
  traj.dense_.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = i + 1 == m ? traj.t_end_
                                : traj.t_begin_ + (traj.t_end_ - traj.t_begin_) * static_cast<double>(i) /
                                                      static_cast<double>(m - 1);
    traj.dense_.push_back(traj.state_at(t));
  }
  for (const auto* set : {&traj.samples_, &traj.dense_}) {
    for (const auto& smp : *set) {
      traj.max_shell_ = std::max(traj.max_shell_, std::abs(smp.hamiltonian - 1.0));
      traj.max_clairaut_ = std::max(traj.max_clairaut_, smp.clairaut_drift);
    }
  }
  return traj;
}

Trajectory::State Trajectory::raw_at(double t, int& chart) const {
  State X{};
  const Packing pk{cs_.dim()};
  if (radial_) {
    X[0] = r0_ + t * std::sin(theta0_);
    X[1] = theta0_;
    for (int i = 0; i < pk.d; ++i) X[pk.y(i)] = y_start_.coords[i];
    chart = y_start_.chart;
    return X;
  }
  if (segments_.empty()) throw IntegrationError("trajectory has no steps");
  t = std::clamp(t, t_begin_, t_end_);
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double v, const Segment& s) { return v < s.t_lo; });
  const Segment& seg = it == segments_.begin() ? segments_.front() : *std::prev(it);
  const double local = seg.mirrored ? -t : t;
  const double frac = std::clamp((local - seg.s0) / seg.h, 0.0, 1.0);
  X = Stepper::interpolate(seg.dense, frac, pk.n());
  if (seg.mirrored) {
    X[1] = -X[1];
    for (int i = 0; i < pk.d; ++i) X[pk.eta(i)] = -X[pk.eta(i)];
    X[pk.tau()] = -X[pk.tau()];
  }
  chart = seg.chart;
  return X;
}

double Trajectory::scaled_tau_at(double t) const {
  int chart = 0;
  return raw_at(t, chart)[Packing{cs_.dim()}.tau()];
}

TrajectorySample Trajectory::state_at(double t) const {
  int chart = 0;
  const State X = raw_at(t, chart);
  return make_sample(t, X, chart);
}

TrajectorySample Trajectory::make_sample(double t, const State& X, int chart) const {
  const Packing pk{cs_.dim()};
  TrajectorySample smp;
  smp.t = t;
  smp.r = X[0];
  smp.theta = X[1];
  smp.y.chart = chart;
  smp.y.coords.resize(pk.d);
  smp.eta.resize(pk.d);
  for (int i = 0; i < pk.d; ++i) smp.y.coords[i] = X[pk.y(i)];
  SVec eb(pk.d);
  for (int i = 0; i < pk.d; ++i) eb[i] = X[pk.eta(i)];
  if (decoupled_) {
    SVec vel;
    cs_.model().closed_base_geodesic(y_start_, v_start_, X[pk.tau()] * std::exp(log_tau_unit_), smp.y, &vel);
    eb = cs_.metric(X[0], smp.y) * vel;
  }
  const double sin_t = std::sin(smp.theta), cos_t = std::cos(smp.theta);
  const double lf = smp.r > 0.0 ? wf_.log_f(smp.r) : -std::numeric_limits<double>::infinity();
  smp.rho = std::exp(lf);
  smp.u = smp.r > 0.0 ? std::copysign(wf_.F(smp.rho * std::abs(sin_t)), sin_t) : 0.0;
  smp.clairaut = smp.rho * cos_t;
  if (radial_) {
    smp.eta.setZero();
    smp.log_eta_norm = -std::numeric_limits<double>::infinity();
    smp.hamiltonian = sin_t * sin_t;
    smp.clairaut_drift = std::abs(cos_t);
    return smp;
  }
  const double kappa = std::exp(log_kappa_);
  smp.eta = kappa * eb;
  const double nb2 = cs_.covector_norm_sq(smp.r, smp.y, eb);
  smp.log_eta_norm = log_kappa_ + 0.5 * std::log(nb2);
  smp.eta_norm = std::exp(smp.log_eta_norm);
  const double ratio = std::exp(smp.log_eta_norm - lf);
  smp.hamiltonian = sin_t * sin_t + ratio * ratio;
  smp.clairaut_drift = std::abs(cos_t - std::exp(log_kappa_ - lf));
  smp.speed_Y = std::exp(smp.log_eta_norm - 2.0 * lf);
  smp.tau = X[pk.tau()] * std::exp(log_tau_unit_);
  return smp;
}

TrajectoryClass classify(const Trajectory& traj) {
  if (traj.samples().empty()) throw InvalidInput("empty trajectory");
  std::size_t below = 0, zero = 0;
  const double log_cut = std::log(1e-14);
  for (const auto& s : traj.samples()) {
    const bool is_zero = !(s.log_eta_norm > -std::numeric_limits<double>::infinity());
    if (is_zero || s.log_eta_norm - std::log(s.rho) < log_cut) ++below;
    if (is_zero) ++zero;
  }
  if (below == traj.samples().size()) return TrajectoryClass::radial;
  // Exponential cusps give |η|/f far below the cut near exit, so only exact zeros count against winding.
  if (zero == 0) return TrajectoryClass::winding;
  throw IntegrationError("trajectory mixes radial and winding samples");
}

WindingLength winding_length(const Trajectory& traj) {
  if (classify(traj) != TrajectoryClass::winding) throw InvalidInput("winding length needs a winding trajectory");
  if (!traj.exits_begin() || !traj.exits_end()) throw IntegrationError("trajectory truncated before exit");
  const auto& wf = traj.warp();
  WindingLength out;
  out.delta = traj.delta();
  const double dtau = traj.scaled_tau_end() - traj.scaled_tau_begin();
  out.length = dtau * std::exp(traj.log_tau_unit());
  const double log_fp = wf.log_f(out.delta) + std::log(wf.log_derivative(out.delta));
  out.normalized = dtau * std::exp(traj.log_tau_unit() + log_fp);
  return out;
}

TauSample state_at_tau(const Trajectory& traj, double tau) {
  if (traj.radial()) throw InvalidInput("radial trajectories have no tau parametrisation");
  const double unit = std::exp(traj.log_tau_unit());
  const double target = tau / unit;
  double lo = traj.t_begin(), hi = traj.t_end();
  if (target <= traj.scaled_tau_begin()) {
    hi = lo;
  } else if (target >= traj.scaled_tau_end()) {
    lo = hi;
  }
  // Relative stop: for the exponential cusps the τ window sits in a tiny t-interval around 0.
  for (int iter = 0; iter < 2200 && hi - lo > 1e-15 * std::max(std::abs(lo), std::abs(hi)); ++iter) {
    const double mid = 0.5 * (lo + hi);
    (traj.scaled_tau_at(mid) < target ? lo : hi) = mid;
  }
  const auto smp = traj.state_at(0.5 * (lo + hi));
  TauSample out;
  out.tau = tau;
  out.t = smp.t;
  out.r = smp.r;
  out.y = smp.y;
  const auto& wf = traj.warp();
  out.eta_bar = smp.eta * std::exp(-wf.log_f(traj.delta()));
  return out;
}

std::vector<TauSample> reparametrize_tau(const Trajectory& traj, std::size_t n) {
  if (n < 2) throw InvalidInput("need at least two tau samples");
  const double unit = std::exp(traj.log_tau_unit());
  const double a = traj.scaled_tau_begin() * unit, b = traj.scaled_tau_end() * unit;
  std::vector<TauSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back(state_at_tau(traj, tau));
  }
  return out;
}

}  // namespace sgeo
