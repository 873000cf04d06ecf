#include <fstream>
#include <sstream>

#include "sgeo/cross_section.hpp"
#include "sgeo/errors.hpp"
#include "sgeo/io.hpp"
#include "util.hpp"

namespace sgeo {

using nlohmann::json;

namespace {

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInput("config must be a flat JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    const char* k = key.c_str();
    if (key == "warp") cfg.warp = get_as<std::string>(value, k);
    else if (key == "section") cfg.section = get_as<std::string>(value, k);
    else if (key == "R") cfg.R = get_as<double>(value, k);
    else if (key == "delta") cfg.delta = get_as<double>(value, k);
    else if (key == "deltas") cfg.deltas = get_as<std::vector<double>>(value, k);
    else if (key == "y0") cfg.y0 = get_as<std::vector<double>>(value, k);
    else if (key == "v0") cfg.v0 = get_as<std::vector<double>>(value, k);
    else if (key == "radial") cfg.radial = get_as<bool>(value, k);
    else if (key == "direction") cfg.direction = get_as<std::string>(value, k);
    else if (key == "rtol") cfg.rtol = get_as<double>(value, k);
    else if (key == "atol") cfg.atol = get_as<double>(value, k);
    else if (key == "cf_tol") cfg.cf_tol = get_as<double>(value, k);
    else if (key == "slack") cfg.slack = get_as<double>(value, k);
    else if (key == "output_dir") cfg.output_dir = get_as<std::string>(value, k);
    else if (key == "formats") cfg.formats = get_as<std::vector<std::string>>(value, k);
    else if (key == "seed") cfg.seed = get_as<std::uint64_t>(value, k);
    else throw InvalidInput("unknown config key '" + key + "'");
  }
  cfg.warp = normalize_warp_spec(cfg.warp);
  cfg.section = normalize_section_spec(cfg.section);
  (void)parse_direction(cfg.direction);
  for (const auto& f : cfg.formats) {
    if (f != "csv" && f != "json" && f != "svg") throw InvalidInput("unknown output format '" + f + "'");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json config_to_json(const RunConfig& cfg) {
  return json{{"warp", normalize_warp_spec(cfg.warp)},
              {"section", normalize_section_spec(cfg.section)},
              {"R", cfg.R},
              {"delta", cfg.delta},
              {"deltas", cfg.deltas},
              {"y0", cfg.y0},
              {"v0", cfg.v0},
              {"radial", cfg.radial},
              {"direction", cfg.direction},
              {"rtol", cfg.rtol},
              {"atol", cfg.atol},
              {"cf_tol", cfg.cf_tol},
              {"slack", cfg.slack},
              {"output_dir", cfg.output_dir},
              {"formats", cfg.formats},
              {"seed", cfg.seed}};
}

std::string serialize_config(const RunConfig& cfg) { return config_to_json(cfg).dump(2); }

std::string normalize_config(std::string_view json_text) { return serialize_config(parse_config(json_text)); }

double default_radius(std::string_view warp_spec) {
  const auto parts = detail::split(warp_spec, ':');
  if (parts.empty()) throw InvalidInput("empty warp spec");
  const auto family = parts[0];
  if (family == "power") return 1.5;
  if (family == "sqrt") return 1.0;
  if (family == "expinv" && parts.size() == 2)
    return std::min(0.5, max_convex_radius(ExpFamily::exp_inverse_power, detail::parse_double(parts[1])));
  if (family == "logpow" && parts.size() == 2)
    return std::min(0.3, max_convex_radius(ExpFamily::log_power, detail::parse_double(parts[1])));
  // osc and profile warps carry their own domain.
  return 1.0;
}

IntegratorOptions integrator_options(const RunConfig& cfg) {
  IntegratorOptions o;
  o.rtol = cfg.rtol;
  o.atol = cfg.atol;
  return o;
}

Direction parse_direction(std::string_view s) {
  if (s == "both") return Direction::both;
  if (s == "forward") return Direction::forward;
  if (s == "backward") return Direction::backward;
  throw InvalidInput("direction must be forward, backward or both");
}

}  // namespace sgeo
