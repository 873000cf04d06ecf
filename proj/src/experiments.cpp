#include "sgeo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "parallel.hpp"
#include "sgeo/errors.hpp"
#include "sgeo/frakf.hpp"
#include "sgeo/profile.hpp"
#include "util.hpp"

namespace sgeo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLimitNoiseFloor = 1e-9;

bool exponential_family(const WarpingFunction& wf) {
  const auto& l = wf.label();
  return l.rfind("expinv", 0) == 0 || l.rfind("logpow", 0) == 0;
}

}  // namespace

std::vector<double> default_delta_ladder(const WarpingFunction& wf) {
  const double hi = std::min(0.3, 0.6 * wf.radius());
  double lo = exponential_family(wf) ? 1e-3 : 1e-4;
  lo = std::max(lo, wf.lower_sampling_bound());
  if (!(lo < hi)) throw InvalidInput("no usable delta range for " + wf.label());
  const auto intervals = std::max<long>(1, std::lround(2.0 * std::log10(hi / lo)));
  auto ladder = detail::log_space(lo, hi, static_cast<std::size_t>(intervals + 1));
  std::reverse(ladder.begin(), ladder.end());
  return ladder;
}

Extrapolation richardson_tail(const std::vector<double>& deltas, const std::vector<double>& values, std::size_t tail,
                              double noise_floor) {
  Extrapolation out;
  if (values.empty()) return out;
  out.limit = values.back();
  out.rate = kNaN;
  if (values.size() < 3 || tail < 3) return out;
  const std::size_t m = std::min(tail, values.size());
  const std::size_t first = values.size() - m;

  std::vector<double> xs, ys;
  bool flat = true;
  for (std::size_t k = first + 1; k < values.size(); ++k) {
    const double d = values[k] - values[k - 1];
    if (std::abs(d) > noise_floor * std::abs(values[k])) flat = false;
    if (d != 0.0) {
      xs.push_back(std::log(deltas[k]));
      ys.push_back(std::log(std::abs(d)));
    }
  }
  if (flat) {
    out.ok = true;
    return out;
  }
  if (xs.size() < 2) return out;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double p = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.rate = p;
  if (!(p > 0.05)) return out;
  const std::size_t last = values.size() - 1;
  const double q = std::pow(deltas[last] / deltas[last - 1], p);
  out.limit = values[last] + (values[last] - values[last - 1]) * q / (1.0 - q);
  out.ok = std::isfinite(out.limit);
  if (!out.ok) out.limit = values.back();
  return out;
}

SweepResult delta_sweep(const WarpingFunction& wf, const CrossSection& cs, const std::vector<double>& deltas,
                        const SectionLaunch& launch, const SweepOptions& opts, Execution exec) {
  if (deltas.empty()) throw InvalidInput("empty delta ladder");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0 && deltas[i] < wf.radius())) throw InvalidInput("deltas must lie in (0, R)");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw InvalidInput("deltas must be strictly decreasing");
  }
  SweepResult res;
  res.warp = wf.label();
  res.section = cs.spec();
  res.R = wf.radius();
  res.deltas = deltas;
  const std::size_t n = deltas.size();
  res.lengths.assign(n, 0.0);
  res.normalized.assign(n, 0.0);

  detail::for_each_index(n, exec, [&](std::size_t i) {
    try {
      const auto start = launch_winding(wf, cs, deltas[i], launch.y0, launch.v0);
      const auto traj = integrate(wf, cs, start, Direction::both, opts.integrator);
      const auto wl = winding_length(traj);
      res.lengths[i] = wl.length;
      res.normalized[i] = wl.normalized;
    } catch (const IntegrationError& e) {
      throw IntegrationError("delta = " + detail::format_number(deltas[i]) + ": " + e.what());
    }
  });

  res.reference_Cf = kNaN;
  if (wf.kind() == WarpKind::oscillating_counterexample) {
    res.note = "oscillating warp: F'(sigma eps)/F'(eps) has no limit, so no constant exists";
  } else {
    try {
      res.reference_Cf = compute_Cf(wf, opts.cf_tol).value;
    } catch (const std::exception& e) {
      res.note = std::string("C_f unavailable: ") + e.what();
    }
  }
  res.errors_rel.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.errors_rel[i] = std::abs(res.normalized[i] / res.reference_Cf - 1.0);

  const auto ex = richardson_tail(res.deltas, res.normalized, opts.tail, opts.noise_floor);
  res.extrapolated_limit = ex.limit;
  res.fitted_rate = ex.rate;

  if (std::isfinite(res.reference_Cf)) {
    const std::size_t m = std::min(opts.tail, n);
    bool trend = n >= 2;
    for (std::size_t k = n - m + 1; k < n; ++k) {
      if (!(res.errors_rel[k] <= res.errors_rel[k - 1] || res.errors_rel[k] < opts.noise_floor)) trend = false;
    }
    res.converged = trend;
    if (!trend) res.note = "relative error is not decreasing over the last " + std::to_string(m) + " deltas";
  }
  return res;
}

// ---------------------------------------------------------------------------

BoundsReport verify_radial_bounds(const Trajectory& traj, double delta, double c_bound, double R, double slack) {
  BoundsReport rep;
  if (traj.radial()) {
    rep.skipped = true;
    rep.note = "radial trajectory: bounds degenerate";
    return rep;
  }
  const auto& wf = traj.warp();
  const bool warped = c_bound == 0.0;
  rep.C = c_bound * std::exp(c_bound * R);
  const double log_f_delta = wf.log_f(delta);
  rep.worst_lower = rep.worst_upper = rep.worst_eta = rep.worst_strict = std::numeric_limits<double>::infinity();
  auto consider = [&](double margin, double& worst, double t) {
    if (margin < worst) {
      worst = margin;
      if (margin < -slack) rep.worst_t = t;
    }
  };
  for (const auto* set : {&traj.samples(), &traj.dense()}) {
    for (const auto& s : *set) {
      const double at = std::abs(s.t);
      consider(s.r - (1.0 - rep.C * delta) * at, rep.worst_lower, s.t);
      consider(at + delta - s.r, rep.worst_upper, s.t);
      consider(c_bound * (s.r - delta) - std::abs(s.log_eta_norm - log_f_delta), rep.worst_eta, s.t);
      if (warped) {
        const double m = s.r - at;
        if (m < rep.worst_strict) rep.worst_strict = m;
      }
      ++rep.checked;
    }
  }
  rep.passed = rep.worst_lower >= -slack && rep.worst_upper >= -slack && rep.worst_eta >= -slack &&
               (!warped || rep.worst_strict > 0.0);
  if (!warped) rep.worst_strict = kNaN;
  return rep;
}

ConservationReport check_conservation(const Trajectory& traj, double c_bound) {
  ConservationReport rep;
  rep.max_shell_residual = traj.max_shell_residual();
  rep.max_clairaut_drift = traj.max_clairaut_drift();
  if (traj.radial()) return rep;
  const auto& d = traj.dense();
  const double delta = traj.delta();
  rep.worst_log_eta_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < d.size(); ++i) {
    const double change = std::abs(d[i].log_eta_norm - d[i - 1].log_eta_norm);
    const bool straddle = d[i - 1].t < 0.0 && d[i].t > 0.0;
    const double travel = straddle ? std::abs(d[i - 1].r - delta) + std::abs(d[i].r - delta)
                                   : std::abs(d[i].r - d[i - 1].r);
    rep.worst_log_eta_excess = std::max(rep.worst_log_eta_excess, change - c_bound * travel);
  }
  if (traj.section().warped() && traj.warp().convex_family()) {
    rep.u_checked = true;
    rep.worst_u_rate = std::numeric_limits<double>::infinity();
    const auto& s = traj.samples();
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i - 1].t <= 0.0) continue;
      rep.worst_u_rate = std::min(rep.worst_u_rate, (s[i].u - s[i - 1].u) / (s[i].t - s[i - 1].t));
    }
  }
  return rep;
}

ComparisonReport comparison_test(const WarpingFunction& wf, const CrossSection& cs, double delta, double delta_bar,
                                 const SectionLaunch& launch, const SectionLaunch& launch_bar,
                                 const IntegratorOptions& opts) {
  if (!cs.warped()) throw InvalidInput("comparison needs a warped product (c = 0)");
  if (!wf.convex_family()) throw InvalidInput("comparison needs a convex conical or cuspidal warp");
  if (!(0.0 < delta && delta < delta_bar && delta_bar < wf.radius()))
    throw InvalidInput("comparison needs 0 < delta < delta_bar < R");
  const auto a = integrate(wf, cs, launch_winding(wf, cs, delta, launch.y0, launch.v0), Direction::both, opts);
  const auto b =
      integrate(wf, cs, launch_winding(wf, cs, delta_bar, launch_bar.y0, launch_bar.v0), Direction::both, opts);
  const double lo = std::max(a.t_begin(), b.t_begin());
  const double hi = std::min(a.t_end(), b.t_end());
  std::vector<double> times;
  const std::size_t m = 2048;
  for (std::size_t i = 0; i < m; ++i) times.push_back(lo + (hi - lo) * static_cast<double>(i) / (m - 1));
  for (const auto* tr : {&a, &b}) {
    for (const auto& s : tr->samples()) {
      if (s.t >= lo && s.t <= hi) times.push_back(s.t);
    }
  }
  ComparisonReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (const double t : times) {
    const double margin = b.state_at(t).r - a.state_at(t).r;
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.t_at_min = t;
    }
  }
  rep.checked = times.size();
  rep.passed = rep.min_margin > 0.0;
  return rep;
}

LimitReport limit_geodesic_test(const WarpingFunction& wf, const CrossSection& cs, const std::vector<double>& ladder,
                                const SectionLaunch& launch, double tau_lo, double tau_hi,
                                const IntegratorOptions& opts, Execution exec, std::size_t tau_points) {
  if (ladder.empty()) throw InvalidInput("empty delta ladder");
  if (!(tau_lo < tau_hi) || tau_points < 2) throw InvalidInput("bad tau window");
  if (wf.kind() == WarpKind::conical) {
    const double fp0 = wf.f_prime(1e-12 * wf.radius());
    if (std::abs(fp0 - 1.0) > 1e-6 || tau_lo <= -std::numbers::pi / 2 || tau_hi >= std::numbers::pi / 2)
      throw InvalidInput("conical limit test needs f'(0) = 1 and a window inside (-pi/2, pi/2)");
  } else if (wf.kind() != WarpKind::cuspidal) {
    throw InvalidInput("limit geodesic test needs a cuspidal or conical warp");
  }
  LimitReport rep;
  const std::size_t n = ladder.size();
  rep.deltas = ladder;
  rep.sup_distances.assign(n, 0.0);
  rep.window_lo.assign(n, tau_lo);
  rep.window_hi.assign(n, tau_hi);
  rep.notes.assign(n, "");

  detail::for_each_index(n, exec, [&](std::size_t i) {
    const auto traj =
        integrate(wf, cs, launch_winding(wf, cs, ladder[i], launch.y0, launch.v0), Direction::both, opts);
    const double unit = std::exp(traj.log_tau_unit());
    const double lo = std::max(tau_lo, traj.scaled_tau_begin() * unit);
    const double hi = std::min(tau_hi, traj.scaled_tau_end() * unit);
    if (lo != tau_lo || hi != tau_hi) rep.notes[i] = "tau window clipped to the available range";
    rep.window_lo[i] = lo;
    rep.window_hi[i] = hi;
    double sup = 0.0;
    for (std::size_t k = 0; k < tau_points; ++k) {
      const double tau = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(tau_points - 1);
      const auto ts = state_at_tau(traj, tau);
      const auto ref = base_geodesic(cs, launch.y0, launch.v0, tau);
      sup = std::max(sup, cs.model().base_distance(ts.y, ref));
    }
    rep.sup_distances[i] = sup;
  });

  rep.decreasing = true;
  for (std::size_t i = 1; i < n; ++i) {
    // Warped sections follow the base geodesic exactly; rounding then sets the distance.
    const bool at_noise = rep.sup_distances[i] < kLimitNoiseFloor && rep.sup_distances[i - 1] < kLimitNoiseFloor;
    if (!(rep.sup_distances[i] < rep.sup_distances[i - 1]) && !at_noise) rep.decreasing = false;
  }
  rep.final_below = rep.sup_distances.back() < rep.threshold;
  return rep;
}

Figure1Bundle figure1_data(FigureKind kind, const IntegratorOptions& opts) {
  Figure1Bundle b;
  b.kind = kind;
  constexpr double R = 1.5, delta = 0.3;
  b.R = R;
  b.delta = delta;

  std::optional<WarpingFunction> wf;
  if (kind == FigureKind::cone) {
    wf = make_power_warp(1.0, R);
  } else {
    // Choose z_max so that the profile's arclength radius is exactly R.
    auto profile = make_power_profile(2.0, 2.0);
    double lo = 0.0, hi = 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      const double mid = 0.5 * (lo + hi);
      (profile_arclength(profile, mid) < R ? lo : hi) = mid;
    }
    profile.z_max = 0.5 * (lo + hi);
    wf = profile_to_warp(profile, profile.z_max);
  }
  const auto cs = circle_section(2.0 * std::numbers::pi, {}, wf->radius());
  const auto launch = default_launch(cs);
  const auto traj = integrate(*wf, cs, launch_winding(*wf, cs, delta, launch.y0, launch.v0), Direction::both, opts);
  for (const auto& s : traj.dense()) {
    b.t.push_back(s.t);
    b.r.push_back(s.r);
    const double phi = s.y.coords[0];
    b.angle.push_back(phi);
    if (kind == FigureKind::cone) {
      b.embedded.emplace_back(s.r * std::cos(phi), s.r * std::sin(phi), 0.0);
    } else {
      const double x = s.rho;
      b.embedded.emplace_back(x * std::cos(phi), x * std::sin(phi), std::sqrt(x));
    }
  }
  b.swept_angle = b.angle.back() - b.angle.front();
  const auto wl = winding_length(traj);
  b.winding_count = wl.length / (2.0 * std::numbers::pi);
  const double Cf = compute_Cf(*wf, 1e-8).value;
  b.remark_prediction = Cf / (2.0 * std::numbers::pi * wf->f_prime(delta));
  b.intro_prediction = std::numbers::pi / (Cf * delta);
  b.max_shell_residual = traj.max_shell_residual();
  return b;
}

// ---------------------------------------------------------------------------

bool VerifyReport::passed() const {
  return std::all_of(items.begin(), items.end(), [](const VerifyItem& i) { return i.passed; });
}

VerifyReport run_verify_suite(const WarpingFunction& wf, const CrossSection& cs, const SectionLaunch& launch,
                              const VerifyOptions& opts) {
  VerifyReport rep;
  std::vector<double> deltas = opts.deltas;
  if (deltas.empty()) {
    for (const double d : {0.3, 0.1, 0.03, 0.01}) {
      if (d <= 0.5 * wf.radius() && d >= wf.lower_sampling_bound()) deltas.push_back(d);
    }
  }
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  const std::size_t n = deltas.size();
  std::vector<std::vector<VerifyItem>> per(n);

  detail::for_each_index(n, opts.exec, [&](std::size_t i) {
    const double delta = deltas[i];
    const std::string tag = " delta=" + detail::format_number(delta);
    std::optional<Trajectory> run;
    try {
      run = integrate(wf, cs, launch_winding(wf, cs, delta, launch.y0, launch.v0), Direction::both, opts.integrator);
    } catch (const IntegrationError& e) {
      per[i].push_back({"integration" + tag, false, e.what()});
      return;
    }
    const Trajectory& traj = *run;
    // The bounds rely on convexity of f.
    if (wf.convex_family()) {
      const auto b = verify_radial_bounds(traj, delta, cs.c_bound(), wf.radius(), opts.slack);
      per[i].push_back({"radial bounds" + tag, b.passed,
                        "lower " + detail::format_number(b.worst_lower) + ", upper " +
                            detail::format_number(b.worst_upper) + ", eta " + detail::format_number(b.worst_eta) +
                            (cs.warped() ? ", r-|t| " + detail::format_number(b.worst_strict) : "") + ", worst t " +
                            detail::format_number(b.worst_t)});
    }
    const auto c = check_conservation(traj, cs.c_bound());
    per[i].push_back({"shell" + tag, c.max_shell_residual < opts.conservation_tol,
                      "max |2H-1| " + detail::format_number(c.max_shell_residual)});
    if (cs.warped()) {
      per[i].push_back({"clairaut" + tag, c.max_clairaut_drift < opts.conservation_tol,
                        "max drift " + detail::format_number(c.max_clairaut_drift)});
    } else {
      per[i].push_back({"log eta rate" + tag, c.worst_log_eta_excess <= opts.log_eta_slack,
                        "worst excess " + detail::format_number(c.worst_log_eta_excess)});
    }
    if (c.u_checked) {
      per[i].push_back({"u rate" + tag, c.worst_u_rate >= 1.0 - 1e-8,
                        "min du/dt " + detail::format_number(c.worst_u_rate)});
    }
  });
  for (auto& items : per) rep.items.insert(rep.items.end(), items.begin(), items.end());

  if (cs.warped() && wf.convex_family()) {
    for (std::size_t i = 1; i < n; ++i) {
      const std::string name =
          "comparison delta=" + detail::format_number(deltas[i]) + " vs " + detail::format_number(deltas[i - 1]);
      try {
        const auto cmp = comparison_test(wf, cs, deltas[i], deltas[i - 1], launch, launch, opts.integrator);
        rep.items.push_back({name, cmp.passed, "min margin " + detail::format_number(cmp.min_margin)});
      } catch (const IntegrationError& e) {
        rep.items.push_back({name, false, e.what()});
      }
    }
  }
  const bool cusp = wf.kind() == WarpKind::cuspidal;
  const bool unit_cone =
      wf.kind() == WarpKind::conical && std::abs(wf.f_prime(1e-12 * wf.radius()) - 1.0) <= 1e-6;
  if ((cusp || unit_cone) && cs.model().flat_base() && n >= 2) {
    const double w = cusp ? 2.0 : 1.2;
    try {
      const auto lim = limit_geodesic_test(wf, cs, deltas, launch, -w, w, opts.integrator, opts.exec);
      std::string detail = "sup distances";
      for (const double d : lim.sup_distances) detail += " " + detail::format_number(d);
      rep.items.push_back({"limit geodesic", lim.passed(), detail});
    } catch (const IntegrationError& e) {
      rep.items.push_back({"limit geodesic", false, e.what()});
    }
  }
  if (opts.campaigns) {
    const auto bc = run_bounds_campaign(opts.bounds_cases, opts.seed, opts.exec, opts.integrator, opts.slack);
    rep.items.push_back({"bounds campaign", bc.passed(),
                         std::to_string(bc.failures()) + " of " + std::to_string(bc.cases.size()) + " failed"});
    const auto cc = run_comparison_campaign(opts.comparison_cases, opts.seed, opts.exec, opts.integrator);
    rep.items.push_back({"comparison campaign", cc.passed(),
                         std::to_string(cc.failures()) + " of " + std::to_string(cc.cases.size()) + " failed"});
  }
  return rep;
}

}  // namespace sgeo
