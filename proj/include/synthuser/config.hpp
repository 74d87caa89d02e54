#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "synthuser/error.hpp"
#include "synthuser/server.hpp"

namespace synthuser {

// Settings read from a JSON config file. Anything not given keeps the
// defaults below; the seed stays empty until a file or `--seed` sets it.
struct RunConfig {
  FaultConfig faults{kDefaultFollowErrorProbability, false, kDefaultAlertNavThreshold};
  std::optional<std::uint64_t> seed;
  double time_scale = 0.0;
  std::uint64_t max_steps = 1000;
  bool stop_on_first_violation = false;
  std::uint64_t agents = 1;
  int population = 3;
  std::uint64_t stimulus_interval = 0;
  std::int64_t await_delay_ms = 0;
  std::vector<std::filesystem::path> traces;
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> replay;
  std::optional<std::filesystem::path> report;
};

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "seed",       "follow_error_probability", "alert_nav_bug_enabled", "alert_nav_bug_threshold",
      "time_scale", "max_steps",                "stop_on_first_violation", "agents",
      "population", "stimulus_interval",        "await_delay_ms",        "traces",
      "model",      "replay",                   "report"};
  return keys;
}

inline RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::config, "config must be a JSON object");
  std::string unknown;
  for (const auto& [key, value] : j.items()) {
    if (!known_config_keys().count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) throw Error(ErrorCode::config, "unknown keys: " + unknown);

  RunConfig c;
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.faults.follow_error_probability = j.value("follow_error_probability", c.faults.follow_error_probability);
    c.faults.alert_nav_bug_enabled = j.value("alert_nav_bug_enabled", c.faults.alert_nav_bug_enabled);
    if (j.contains("alert_nav_bug_threshold")) {
      auto t = j.at("alert_nav_bug_threshold").get<std::int64_t>();
      if (t <= 0) throw Error(ErrorCode::validation, "alert_nav_bug_threshold must be positive");
      c.faults.alert_nav_bug_threshold = static_cast<std::uint64_t>(t);
    }
    c.time_scale = j.value("time_scale", c.time_scale);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.stop_on_first_violation = j.value("stop_on_first_violation", c.stop_on_first_violation);
    c.agents = j.value("agents", c.agents);
    c.population = j.value("population", c.population);
    c.stimulus_interval = j.value("stimulus_interval", c.stimulus_interval);
    c.await_delay_ms = j.value("await_delay_ms", c.await_delay_ms);
    if (j.contains("traces")) {
      for (const auto& p : j.at("traces")) c.traces.emplace_back(p.get<std::string>());
    }
    if (j.contains("model")) c.model = j.at("model").get<std::string>();
    if (j.contains("replay")) c.replay = j.at("replay").get<std::string>();
    if (j.contains("report")) c.report = j.at("report").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::config, ex.what());
  }

  validate(c.faults);
  if (!(c.time_scale >= 0.0)) throw Error(ErrorCode::validation, "time_scale must be non-negative");
  if (c.max_steps == 0) throw Error(ErrorCode::validation, "max_steps must be positive");
  if (c.population < 0) throw Error(ErrorCode::validation, "population must be non-negative");
  if (c.await_delay_ms < 0) throw Error(ErrorCode::validation, "await_delay_ms must be non-negative");
  return c;
}

inline RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::config, "config '" + path.string() + "': " + ex.what());
  }
  return parse_config(j);
}

// `play` refuses to run without an explicit seed.
inline std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw Error(ErrorCode::config, "a seed is required for play (set \"seed\" or pass --seed)");
  return *c.seed;
}

}  // namespace synthuser
