#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "sgeo/io.hpp"
#include "util.hpp"

namespace sgeo {

using nlohmann::json;

namespace {

// Shortest round-trip text keeps CSV output byte-stable.
std::string num(double x) { return detail::format_number(x); }

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const int d = traj.section().dim();
  out << "t,r,theta";
  for (int i = 0; i < d; ++i) out << ",y" << i;
  for (int i = 0; i < d; ++i) out << ",eta" << i;
  out << ",hamiltonian,clairaut,tau,rho,u,speed_Y,chart\n";
  for (const auto& s : traj.samples()) {
    out << num(s.t) << ',' << num(s.r) << ',' << num(s.theta);
    for (int i = 0; i < d; ++i) out << ',' << num(s.y.coords[i]);
    for (int i = 0; i < d; ++i) out << ',' << num(s.eta[i]);
    out << ',' << num(s.hamiltonian) << ',' << num(s.clairaut) << ',' << num(s.tau) << ',' << num(s.rho) << ','
        << num(s.u) << ',' << num(s.speed_Y) << ',' << s.y.chart << '\n';
  }
}

json trajectory_metadata(const Trajectory& traj, const RunConfig& cfg) {
  const auto& wf = traj.warp();
  const auto& cs = traj.section();
  json j;
  j["config"] = config_to_json(cfg);
  j["warp"] = wf.label();
  j["section"] = cs.spec();
  j["R"] = wf.radius();
  j["c_bound"] = cs.c_bound();
  j["rtol"] = cfg.rtol;
  j["atol"] = cfg.atol;
  j["classification"] = std::string(to_string(classify(traj)));
  j["t_begin"] = traj.t_begin();
  j["t_end"] = traj.t_end();
  j["exits_begin"] = traj.exits_begin();
  j["exits_end"] = traj.exits_end();
  j["delta"] = traj.delta();
  j["steps"] = traj.samples().size();
  j["max_shell_residual"] = traj.max_shell_residual();
  j["max_clairaut_drift"] = traj.max_clairaut_drift();
  if (!traj.radial() && traj.exits_begin() && traj.exits_end()) {
    const auto wl = winding_length(traj);
    j["winding_length"] = wl.length;
    j["normalized_length"] = wl.normalized;
    if (cs.dim() == 1) {
      // Circle: full turns of the unwrapped coordinate.
      const double period = detail::parse_double(detail::split(cs.spec(), ':').at(1));
      const double swept = traj.samples().back().y.coords[0] - traj.samples().front().y.coords[0];
      j["swept_coordinate"] = swept;
      j["winding_count"] = std::abs(swept) / period;
    } else {
      j["winding_count"] = wl.length / (2.0 * std::numbers::pi);
    }
  }
  return j;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "delta,length,normalized,error_rel\n";
  for (std::size_t i = 0; i < sweep.deltas.size(); ++i) {
    out << num(sweep.deltas[i]) << ',' << num(sweep.lengths[i]) << ',' << num(sweep.normalized[i]) << ','
        << num(sweep.errors_rel[i]) << '\n';
  }
}

json sweep_to_json(const SweepResult& s) {
  auto finite_or_null = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json errs = json::array();
  for (const double e : s.errors_rel) errs.push_back(finite_or_null(e));
  return json{{"warp", s.warp},
              {"section", s.section},
              {"R", s.R},
              {"deltas", s.deltas},
              {"lengths", s.lengths},
              {"normalized", s.normalized},
              {"errors_rel", errs},
              {"extrapolated_limit", finite_or_null(s.extrapolated_limit)},
              {"fitted_rate", finite_or_null(s.fitted_rate)},
              {"reference_Cf", finite_or_null(s.reference_Cf)},
              {"converged", s.converged},
              {"note", s.note}};
}

void write_warp_table_csv(std::ostream& out, const WarpingFunction& wf, std::size_t n, double r_max) {
  const double hi = 0.999 * (r_max > 0.0 ? std::min(r_max, wf.radius()) : wf.radius());
  out << "r,f,f_prime,f_over_r,f_over_r2\n";
  for (const double r : detail::log_space(wf.lower_sampling_bound(), hi, n)) {
    const double f = wf.f(r);
    out << num(r) << ',' << num(f) << ',' << num(wf.f_prime(r)) << ',' << num(f / r) << ',' << num(f / (r * r))
        << '\n';
  }
}

}  // namespace sgeo
