// sgeo: geodesics near conical and cuspidal singularities.
//
// Exit codes: 0 ok, 1 verification violation, 2 invalid or ill-posed input,
// 3 integration failure, 4 not converged.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "sgeo/cross_section.hpp"
#include "sgeo/errors.hpp"
#include "sgeo/experiments.hpp"
#include "sgeo/frakf.hpp"
#include "sgeo/geodesic.hpp"
#include "sgeo/io.hpp"
#include "sgeo/profile.hpp"
#include "sgeo/warp.hpp"

namespace fs = std::filesystem;
using namespace sgeo;

namespace {

enum Exit { kOk = 0, kViolation = 1, kInvalid = 2, kIntegration = 3, kNotConverged = 4 };

// Flags shared by trace, sweep and verify. Flags given on the command line
// override the config file.
struct CommonFlags {
  std::string config_path;
  RunConfig cfg;
  std::string deltas_text, y0_text, v0_text, formats_text;
  std::vector<CLI::Option*> given;
  CLI::Option *warp = nullptr, *section = nullptr, *R = nullptr, *delta = nullptr, *deltas = nullptr, *y0 = nullptr,
              *v0 = nullptr, *rtol = nullptr, *atol = nullptr, *out = nullptr, *formats = nullptr,
              *seed = nullptr, *direction = nullptr, *radial = nullptr, *slack = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "flat JSON config file");
    warp = app->add_option("--warp", cfg.warp, "warp spec, e.g. power:2, expinv:1, osc:0.5:9, sqrt, profile:<csv>");
    section = app->add_option("--section", cfg.section, "section spec, e.g. circle:6.2832, sphere:pert=0.05");
    R = app->add_option("--R", cfg.R, "domain radius (default per family)");
    delta = app->add_option("--delta", cfg.delta, "lowest distance to the singularity");
    deltas = app->add_option("--deltas", deltas_text, "comma-separated decreasing delta ladder");
    y0 = app->add_option("--y0", y0_text, "launch point, comma-separated chart coordinates");
    v0 = app->add_option("--v0", v0_text, "launch direction, comma-separated");
    rtol = app->add_option("--rtol", cfg.rtol, "relative tolerance");
    atol = app->add_option("--atol", cfg.atol, "absolute tolerance");
    out = app->add_option("--out", cfg.output_dir, "output directory");
    formats = app->add_option("--formats", formats_text, "comma-separated subset of csv,json,svg");
    seed = app->add_option("--seed", cfg.seed, "seed for randomized campaigns");
    direction = app->add_option("--direction", cfg.direction, "forward, backward or both");
    radial = app->add_flag("--radial", cfg.radial, "launch radially (eta = 0) at r = delta");
    slack = app->add_option("--slack", cfg.slack, "slack for the radial bounds");
  }

  static std::vector<double> numbers(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw InvalidInput("not a number: '" + item + "'");
      }
    }
    return v;
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (warp->count()) c.warp = cfg.warp;
    if (section->count()) c.section = cfg.section;
    if (R->count()) c.R = cfg.R;
    if (delta->count()) c.delta = cfg.delta;
    if (deltas->count()) c.deltas = numbers(deltas_text);
    if (y0->count()) c.y0 = numbers(y0_text);
    if (v0->count()) c.v0 = numbers(v0_text);
    if (rtol->count()) c.rtol = cfg.rtol;
    if (atol->count()) c.atol = cfg.atol;
    if (out->count()) c.output_dir = cfg.output_dir;
    if (seed->count()) c.seed = cfg.seed;
    if (direction->count()) c.direction = cfg.direction;
    if (radial->count()) c.radial = cfg.radial;
    if (slack->count()) c.slack = cfg.slack;
    if (formats->count()) {
      c.formats.clear();
      std::stringstream ss(formats_text);
      std::string item;
      while (std::getline(ss, item, ',')) c.formats.push_back(item);
    }
    // Round-trip through the parser so the same validation applies.
    return parse_config(serialize_config(c));
  }
};

bool wants(const RunConfig& c, const std::string& fmt) {
  return std::find(c.formats.begin(), c.formats.end(), fmt) != c.formats.end();
}

void write_file(const RunConfig& c, const std::string& name, const std::string& content) {
  fs::create_directories(c.output_dir);
  const auto path = fs::path(c.output_dir) / name;
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write '" + path.string() + "'");
  f << content;
}

struct Setup {
  WarpingFunction wf;
  CrossSection cs;
  SectionLaunch launch;
};

Setup build(const RunConfig& c) {
  const double R = c.R > 0.0 ? c.R : default_radius(c.warp);
  auto wf = parse_warp_spec(c.warp, R);
  auto cs = parse_section_spec(c.section, wf.radius());
  SectionLaunch launch = default_launch(cs);
  if (!c.y0.empty() || !c.v0.empty()) {
    auto y = c.y0.empty() ? std::vector<double>(launch.y0.coords.data(), launch.y0.coords.data() + cs.dim()) : c.y0;
    auto v = c.v0.empty() ? std::vector<double>(launch.v0.data(), launch.v0.data() + cs.dim()) : c.v0;
    launch = make_launch(cs, y, v);
    if (launch.v0.norm() == 0.0) throw InvalidInput("launch direction must be nonzero");
  }
  return {std::move(wf), std::move(cs), std::move(launch)};
}

int cmd_cf(const std::string& spec, double R, double tol) {
  const auto wf = parse_warp_spec(spec, R > 0.0 ? R : default_radius(spec));
  const auto res = compute_Cf(wf, tol);
  std::cout.precision(17);
  std::cout << "warp " << wf.label() << "\n";
  std::cout << "C_f " << res.value << "\n";
  std::cout << "error_estimate " << res.error_estimate << "\n";
  return kOk;
}

int cmd_trace(const RunConfig& c) {
  const auto s = build(c);
  const auto start = c.radial ? launch_radial(s.cs, c.delta, s.launch.y0, true)
                              : launch_winding(s.wf, s.cs, c.delta, s.launch.y0, s.launch.v0);
  const auto traj = integrate(s.wf, s.cs, start, parse_direction(c.direction), integrator_options(c));
  const auto meta = trajectory_metadata(traj, c);
  if (wants(c, "csv")) {
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    write_file(c, "trajectory.csv", os.str());
  }
  if (wants(c, "json")) write_file(c, "trajectory.json", meta.dump(2) + "\n");
  if (wants(c, "svg")) {
    PlotSeries rs{"r(t)", {}, {}};
    std::vector<double> r, ang;
    for (const auto& smp : traj.dense()) {
      rs.x.push_back(smp.t);
      rs.y.push_back(smp.r);
      r.push_back(smp.r);
      ang.push_back(smp.y.coords[0]);
    }
    const std::string tag = s.wf.label() + ", delta=" + std::to_string(c.delta);
    write_file(c, "trajectory_r.svg", svg_line_plot({rs}, tag, "t", "r"));
    if (s.cs.dim() == 1) {
      const double period = std::stod(s.cs.spec().substr(s.cs.spec().find(':') + 1));
      write_file(c, "trajectory_polar.svg", svg_polar_path(r, ang, period, tag));
    }
  }
  std::cout << meta.dump(2) << "\n";
  return kOk;
}

int cmd_sweep(const RunConfig& c) {
  const auto s = build(c);
  const auto deltas = c.deltas.empty() ? default_delta_ladder(s.wf) : c.deltas;
  SweepOptions opts;
  opts.integrator = integrator_options(c);
  opts.cf_tol = c.cf_tol;
  const auto res = delta_sweep(s.wf, s.cs, deltas, s.launch, opts, Execution::parallel);
  auto j = sweep_to_json(res);
  j["config"] = config_to_json(c);
  if (wants(c, "csv")) {
    std::ostringstream os;
    write_sweep_csv(os, res);
    write_file(c, "sweep.csv", os.str());
  }
  if (wants(c, "json")) write_file(c, "sweep.json", j.dump(2) + "\n");
  if (wants(c, "svg")) {
    PlotSeries meas{"f'(delta) * length", res.deltas, res.normalized};
    std::vector<PlotSeries> series{meas};
    if (std::isfinite(res.reference_Cf))
      series.push_back({"C_f", res.deltas, std::vector<double>(res.deltas.size(), res.reference_Cf)});
    write_file(c, "sweep.svg",
               svg_line_plot(series, s.wf.label() + " on " + s.cs.spec(), "delta", "f'(delta) * length", true));
  }
  std::cout << j.dump(2) << "\n";
  return res.converged ? kOk : kNotConverged;
}

int cmd_verify(const RunConfig& c, bool campaigns, std::size_t bounds_cases, std::size_t comparison_cases) {
  const auto s = build(c);
  VerifyOptions opts;
  opts.deltas = c.deltas;
  opts.integrator = integrator_options(c);
  opts.slack = c.slack;
  opts.campaigns = campaigns;
  opts.bounds_cases = bounds_cases;
  opts.comparison_cases = comparison_cases;
  opts.seed = c.seed;
  const auto rep = run_verify_suite(s.wf, s.cs, s.launch, opts);
  nlohmann::json j;
  j["config"] = config_to_json(c);
  j["passed"] = rep.passed();
  auto& items = j["items"] = nlohmann::json::array();
  for (const auto& item : rep.items) {
    std::cout << (item.passed ? "PASS " : "FAIL ") << item.check << ": " << item.detail << "\n";
    items.push_back({{"check", item.check}, {"passed", item.passed}, {"detail", item.detail}});
  }
  if (wants(c, "json")) write_file(c, "verify.json", j.dump(2) + "\n");
  return rep.passed() ? kOk : kViolation;
}

int cmd_profile2warp(const std::string& path, double R, const std::string& out_path) {
  const auto profile = load_profile_csv(path);
  const auto wf = profile_to_warp(profile, profile.z_max);
  std::ostringstream os;
  write_warp_table_csv(os, wf, 256, R);
  if (out_path.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(out_path);
    if (!f) throw InvalidInput("cannot write '" + out_path + "'");
    f << os.str();
  }
  return kOk;
}

void apply_thread_cap() {
  if (const char* env = std::getenv("SG_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();
  CLI::App app{"Geodesics near conical and cuspidal singularities"};
  app.require_subcommand(1);

  std::string cf_spec = "power:1";
  double cf_R = 0.0, cf_tol = 1e-10;
  auto* cf = app.add_subcommand("cf", "compute the winding constant C_f of a warp");
  cf->add_option("warp", cf_spec, "warp spec")->required();
  cf->add_option("--R", cf_R, "domain radius");
  cf->add_option("--tol", cf_tol, "absolute quadrature tolerance");

  CommonFlags trace_flags, sweep_flags, verify_flags;
  auto* trace = app.add_subcommand("trace", "integrate one geodesic and write CSV/JSON/SVG");
  trace_flags.attach(trace);
  auto* sweep = app.add_subcommand("sweep", "delta sweep of f'(delta) * length against C_f");
  sweep_flags.attach(sweep);
  auto* verify = app.add_subcommand("verify", "run the bounds, conservation and comparison checks");
  verify_flags.attach(verify);
  bool campaigns = false;
  std::size_t bounds_cases = 200, comparison_cases = 100;
  verify->add_flag("--campaigns", campaigns, "also run the randomized campaigns");
  verify->add_option("--bounds-cases", bounds_cases, "randomized bounds cases");
  verify->add_option("--comparison-cases", comparison_cases, "randomized comparison pairs");

  std::string profile_path, profile_out;
  double profile_R = 0.0;
  auto* p2w = app.add_subcommand("profile2warp", "convert a profile curve s(z) to a warp table");
  p2w->add_option("profile", profile_path, "two-column CSV z,s(z) with header")->required();
  p2w->add_option("--R", profile_R, "largest r in the table");
  p2w->add_option("--out", profile_out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*cf) return cmd_cf(cf_spec, cf_R, cf_tol);
    if (*trace) return cmd_trace(trace_flags.resolve());
    if (*sweep) return cmd_sweep(sweep_flags.resolve());
    if (*verify) return cmd_verify(verify_flags.resolve(), campaigns, bounds_cases, comparison_cases);
    if (*p2w) return cmd_profile2warp(profile_path, profile_R, profile_out);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const IntegrationError& e) {
    std::cerr << "integration failure: " << e.what() << "\n";
    return kIntegration;
  } catch (const QuadratureError& e) {
    std::cerr << "not converged: " << e.what() << " (achieved " << e.achieved() << ")\n";
    return kNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kViolation;
  }
  return kOk;
}
