#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "energymimo/harness.hpp"

namespace energymimo::harness {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, int line,
                            std::string_view expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for '" + std::string(key) +
                        "': expected " + std::string(expected),
                    line);
}

double to_double(std::string_view key, std::string_view value, int line) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, line, "a number");
  return out;
}

long long to_integer(std::string_view key, std::string_view value, int line) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, line, "an integer");
  return out;
}

int to_int(std::string_view key, std::string_view value, int line) {
  const long long v = to_integer(key, value, line);
  if (v < 0 || v > 1'000'000'000) bad_value(key, value, line, "a nonnegative integer");
  return static_cast<int>(v);
}

bool to_bool(std::string_view key, std::string_view value, int line) {
  std::string v(value);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  bad_value(key, value, line, "a boolean");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = s.find(sep);
    parts.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return parts;
}

// "4", "1,2,8" or "1:40" (inclusive range), freely combined.
std::vector<int> to_int_list(std::string_view key, std::string_view value, int line) {
  std::vector<int> out;
  for (std::string_view item : split(value, ',')) {
    if (item.empty()) bad_value(key, value, line, "a list like 1,2,4 or 1:8");
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      out.push_back(to_int(key, item, line));
      continue;
    }
    const int lo = to_int(key, trim(item.substr(0, colon)), line);
    const int hi = to_int(key, trim(item.substr(colon + 1)), line);
    if (hi < lo) bad_value(key, value, line, "an increasing range");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value, int line) {
  ScenarioConfig& s = cfg.scenario;
  auto num = [&] { return to_double(key, value, line); };
  auto count = [&] { return to_int(key, value, line); };

  if (key == "antennas") s.antennas = count();
  else if (key == "users") s.users = to_int_list(key, value, line);
  else if (key == "subcarriers") s.subcarriers = count();
  else if (key == "p_max_watts") s.p_max_watts = num();
  else if (key == "eta_max") s.eta_max = num();
  else if (key == "backoff_db") s.backoff_db = num();
  else if (key == "noise_dbm") s.noise_dbm = num();
  else if (key == "p_fix_watts") s.p_fix_watts = num();
  else if (key == "circuit_watts") s.circuit_watts = num();
  else if (key == "active_threshold_watts") s.active_threshold_watts = num();
  else if (key == "u_min_m") s.geometry.u_min = num();
  else if (key == "u_max_m") s.geometry.u_max = num();
  else if (key == "sinr_reference") s.sinr_reference = num();
  else if (key == "channel") {
    if (value == "rayleigh") s.channel = ChannelKind::rayleigh;
    else if (value == "los") s.channel = ChannelKind::los;
    else bad_value(key, value, line, "rayleigh or los");
  }
  else if (key == "freq_correlation") s.correlation.enabled = to_bool(key, value, line);
  else if (key == "correlation_taps") s.correlation.taps = count();
  else if (key == "correlation_decay_taps") s.correlation.decay_taps = num();
  else if (key == "seed") {
    const long long v = to_integer(key, value, line);
    if (v < 0) bad_value(key, value, line, "a nonnegative integer");
    s.seed = static_cast<std::uint64_t>(v);
  }
  else if (key == "realizations") cfg.realizations = count();
  else if (key == "precoders") {
    cfg.precoders.clear();
    for (std::string_view name : split(value, ',')) {
      if (name != "zf" && name != "min_pa" && name != "saturating") {
        bad_value(key, value, line, "a list of zf, min_pa, saturating");
      }
      cfg.precoders.emplace_back(name);
    }
  }
  else if (key == "discard_over_pmax") cfg.discard_over_pmax = to_bool(key, value, line);
  else if (key == "output") cfg.output_path = std::string(value);
  else if (key == "threads") cfg.threads = count();
  else if (key == "fp_tolerance") cfg.fixed_point.tolerance = num();
  else if (key == "fp_max_iterations") cfg.fixed_point.max_iterations = count();
  else if (key == "fp_initial_power") cfg.fixed_point.initial_power = num();
  else if (key == "fp_dead_floor") cfg.fixed_point.dead_antenna_floor = num();
  else if (key == "fp_regularization") cfg.fixed_point.regularization = num();
  else if (key == "oracle") cfg.oracle = to_bool(key, value, line);
  else if (key == "oracle_starts") cfg.oracle_options.starts = count();
  else if (key == "oracle_max_antennas") cfg.oracle_options.max_antennas = count();
  else if (key == "oracle_max_users") cfg.oracle_options.max_users = count();
  else if (key == "oracle_max_subcarriers") cfg.oracle_options.max_subcarriers = count();
  else if (key == "curve_users") cfg.curve_users = count();
  else if (key == "finite_q_users") cfg.finite_q_users = to_int_list(key, value, line);
  else if (key == "finite_q_subcarriers") cfg.finite_q_subcarriers = to_int_list(key, value, line);
  else if (key == "fault_alpha_scale") cfg.fault_alpha_scale = num();
  else throw ConfigError("unknown key '" + std::string(key) + "'", line);
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("expected 'key = value'", line_no);
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("empty key or value", line_no);
    apply_setting(cfg, key, value, line_no);
  }

  if (cfg.realizations < 1) throw ConfigError("realizations must be >= 1");
  if (cfg.scenario.users.empty()) throw ConfigError("users must not be empty");
  try {
    cfg.scenario.pa();
    cfg.scenario.bs().validate();
    cfg.scenario.geometry.validate();
    cfg.fixed_point.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace energymimo::harness
