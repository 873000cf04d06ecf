#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "parallel.hpp"
#include "sgeo/errors.hpp"
#include "sgeo/experiments.hpp"
#include "util.hpp"

namespace sgeo {

namespace {

struct FamilyChoice {
  const char* spec;
  double R;
};

constexpr FamilyChoice kFamilies[] = {
    {"power:1", 1.5}, {"power:1.5", 1.2}, {"power:2", 1.5}, {"power:3", 1.0}, {"expinv:1", 0.5}, {"logpow:2", 0.3},
};

std::mt19937_64 case_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

SectionLaunch random_launch(const CrossSection& cs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (cs.dim() == 1) {
    const double phi = 2.0 * std::numbers::pi * u(rng);
    return make_launch(cs, {phi}, {u(rng) < 0.5 ? -1.0 : 1.0});
  }
  // Uniform point on S² and a uniform unit direction tangent to it.
  const double z = 2.0 * u(rng) - 1.0;
  const double lon = 2.0 * std::numbers::pi * u(rng);
  const double polar = std::acos(z);
  const double dir = 2.0 * std::numbers::pi * u(rng);
  const double st = std::sin(polar);
  return make_launch(cs, {polar, lon}, {std::cos(dir), std::sin(dir) / st});
}

// Perturbed sections couple y back into r, so every turn of the winding
// has to be resolved. Keep δ where π/f'(δ) stays below kMaxCoupledLength.
constexpr double kMaxCoupledLength = 5000.0;

double coupled_delta_floor(const WarpingFunction& wf, double lo, double hi) {
  auto log_length = [&wf](double d) { return std::log(std::numbers::pi) - wf.log_f(d) - std::log(wf.log_derivative(d)); };
  const double cap = std::log(kMaxCoupledLength);
  if (log_length(lo) <= cap) return lo;
  if (log_length(hi) > cap) return hi;
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = std::sqrt(lo * hi);
    (log_length(mid) > cap ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

std::size_t CampaignReport::failures() const {
  return static_cast<std::size_t>(std::count_if(cases.begin(), cases.end(), [](const CaseResult& c) { return !c.passed; }));
}

CampaignReport run_bounds_campaign(std::size_t n, std::uint64_t seed, Execution exec, const IntegratorOptions& opts,
                                   double slack) {
  CampaignReport rep;
  rep.name = "radial bounds";
  rep.seed = seed;
  rep.cases.resize(n);
  detail::for_each_index(n, exec, [&](std::size_t i) {
    auto rng = case_rng(seed, i);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kFamilies) - 1);
    std::uniform_int_distribution<int> pick_section(0, 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto fam = kFamilies[pick(rng)];
    const auto wf = parse_warp_spec(fam.spec, fam.R);
    const int kind = pick_section(rng);
    Perturbation pert;
    if (kind == 1) pert.amplitude = 0.01 + 0.09 * unit(rng);
    if (kind == 2) pert.amplitude = 0.05 * unit(rng);
    const auto cs = kind == 2 ? sphere_section(pert, fam.R) : circle_section(2.0 * std::numbers::pi, pert, fam.R);
    double lo = std::max(1e-3 * fam.R, wf.lower_sampling_bound());
    if (!cs.warped()) lo = std::max(lo, coupled_delta_floor(wf, lo, 0.5 * fam.R));
    const double delta = log_uniform(rng, lo, 0.5 * fam.R);
    const auto launch = random_launch(cs, rng);

    CaseResult& c = rep.cases[i];
    c.index = i;
    c.warp = wf.label();
    c.section = cs.spec();
    c.R = fam.R;
    c.delta = delta;
    try {
      const auto traj = integrate(wf, cs, launch_winding(wf, cs, delta, launch.y0, launch.v0), Direction::both, opts);
      const auto b = verify_radial_bounds(traj, delta, cs.c_bound(), fam.R, slack);
      c.passed = b.passed;
      c.margin = std::min({b.worst_lower, b.worst_upper, b.worst_eta});
      if (!b.passed) {
        c.detail = "lower " + detail::format_number(b.worst_lower) + " upper " + detail::format_number(b.worst_upper) +
                   " eta " + detail::format_number(b.worst_eta) + " strict " + detail::format_number(b.worst_strict) +
                   " at t=" + detail::format_number(b.worst_t);
      }
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = e.what();
    }
  });
  return rep;
}

CampaignReport run_comparison_campaign(std::size_t n, std::uint64_t seed, Execution exec,
                                       const IntegratorOptions& opts) {
  CampaignReport rep;
  rep.name = "comparison";
  rep.seed = seed;
  rep.cases.resize(n);
  detail::for_each_index(n, exec, [&](std::size_t i) {
    auto rng = case_rng(seed ^ 0x5bd1e995ULL, i);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kFamilies) - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto fam = kFamilies[pick(rng)];
    const auto wf = parse_warp_spec(fam.spec, fam.R);
    const auto cs = unit(rng) < 0.5 ? circle_section(2.0 * std::numbers::pi, {}, fam.R) : sphere_section({}, fam.R);
    const double lo = std::max(1e-3 * fam.R, wf.lower_sampling_bound());
    const double delta = log_uniform(rng, lo, 0.3 * fam.R);
    const double delta_bar = std::min(delta * (1.2 + 2.8 * unit(rng)), 0.6 * fam.R);
    const auto launch = random_launch(cs, rng);
    const auto launch_bar = random_launch(cs, rng);

    CaseResult& c = rep.cases[i];
    c.index = i;
    c.warp = wf.label();
    c.section = cs.spec();
    c.R = fam.R;
    c.delta = delta;
    c.delta_bar = delta_bar;
    try {
      const auto cmp = comparison_test(wf, cs, delta, delta_bar, launch, launch_bar, opts);
      c.passed = cmp.passed;
      c.margin = cmp.min_margin;
      if (!cmp.passed) c.detail = "r_bar - r = " + detail::format_number(cmp.min_margin) + " at t=" +
                                  detail::format_number(cmp.t_at_min);
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = e.what();
    }
  });
  return rep;
}

}  // namespace sgeo
