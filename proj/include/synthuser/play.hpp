#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "synthuser/agents.hpp"
#include "synthuser/client.hpp"
#include "synthuser/error.hpp"
#include "synthuser/harness.hpp"
#include "synthuser/model.hpp"
#include "synthuser/rng.hpp"
#include "synthuser/server.hpp"
#include "synthuser/trace.hpp"
#include "synthuser/tracker.hpp"

namespace synthuser {

struct AgentSpec {
  AgentKind kind = AgentKind::frequency;
  std::shared_ptr<const Trace> trace;           // replay
  std::shared_ptr<const FrequencyModel> model;  // frequency
  std::uint64_t max_steps = 1000;
};

inline void validate(const AgentSpec& spec) {
  if (spec.max_steps == 0) throw Error(ErrorCode::validation, "agent max_steps must be positive");
  if (spec.kind == AgentKind::replay && !spec.trace) throw Error(ErrorCode::validation, "replay agent needs one trace");
  if (spec.kind == AgentKind::frequency && !spec.model) {
    throw Error(ErrorCode::validation, "frequency agent needs a model built from at least one trace");
  }
}

struct SimulationConfig {
  std::vector<AgentSpec> agents;
  FaultConfig faults;
  double time_scale = 0.0;  // 0: no pacing; 1: recorded pacing (replay agents)
  std::uint64_t max_steps = 1000;
  bool stop_on_first_violation = false;
  std::uint64_t seed = 0;
  int population = 0;                   // background accounts on the fresh target
  std::uint64_t stimulus_interval = 0;  // agent steps between stimulus likes; 0 = off
  std::int64_t await_delay_ms = 0;
};

struct StepOutcome {
  std::uint64_t step = 0;
  View state = View::login;
  UiAction action;
  View state_after = View::login;
  Verdict verdict;
  bool off_model_selection = false;
  std::optional<ServerError> runtime_error;  // 5xx from the target
  std::optional<ServerError> rejected;       // 4xx: the target refused the request
  std::uint64_t alerts_seen = 0;             // alerts delivered before the action

  bool off_model() const { return off_model_selection || verdict.status == VerdictStatus::off_model; }
  bool operator==(const StepOutcome&) const = default;
};

struct AgentReport {
  std::size_t index = 0;
  std::string name;
  AgentKind kind = AgentKind::frequency;
  std::uint64_t seed = 0;
  std::vector<StepOutcome> steps;
  bool bootstrap_failed = false;
  std::optional<std::string> terminal_error;
  std::optional<View> final_view;

  bool operator==(const AgentReport&) const = default;
};

struct ViolationRecord {
  std::size_t agent = 0;
  std::uint64_t step = 0;
  View state = View::login;
  std::string action;
  std::map<View, double> expected;
  View observed = View::login;
};

struct RuntimeErrorRecord {
  std::size_t agent = 0;
  std::uint64_t step = 0;
  std::string action;
  ServerError error;
};

struct Totals {
  std::uint64_t agents = 0;
  std::uint64_t steps = 0;
  std::uint64_t violations = 0;
  std::uint64_t runtime_errors = 0;
  std::uint64_t rejected = 0;
  std::uint64_t off_model = 0;
  std::uint64_t terminated = 0;
};

struct SimulationReport {
  std::uint64_t seed = 0;
  FaultConfig faults;
  std::vector<AgentReport> agents;
  std::vector<ViolationRecord> violations;
  std::vector<RuntimeErrorRecord> runtime_errors;
  std::set<std::pair<View, ActionKey>> coverage;
  Totals totals;
};

// Recomputes violations, runtime errors, coverage and totals from the
// per-agent step lists.
inline void finalize(SimulationReport& r) {
  r.violations.clear();
  r.runtime_errors.clear();
  r.coverage.clear();
  r.totals = Totals{};
  r.totals.agents = r.agents.size();
  for (const AgentReport& a : r.agents) {
    if (a.terminal_error || a.bootstrap_failed) ++r.totals.terminated;
    for (const StepOutcome& s : a.steps) {
      ++r.totals.steps;
      ActionKey key = key_of(s.action);
      r.coverage.insert({s.state, key});
      if (s.off_model()) ++r.totals.off_model;
      if (s.rejected) ++r.totals.rejected;
      if (s.verdict.status == VerdictStatus::violation) {
        r.violations.push_back(ViolationRecord{a.index, s.step, s.state, key.component, s.verdict.expected, s.verdict.observed});
      }
      if (s.runtime_error) r.runtime_errors.push_back(RuntimeErrorRecord{a.index, s.step, key.component, *s.runtime_error});
    }
  }
  r.totals.violations = r.violations.size();
  r.totals.runtime_errors = r.runtime_errors.size();
}

// Exit status for the play command: 0 clean, 1 findings.
inline int exit_code(const SimulationReport& r) {
  return (r.totals.violations > 0 || r.totals.runtime_errors > 0) ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Agent loop

// One Select -> Perform -> Await -> Assert cycle. Divergence and dead-end
// errors from selection propagate to the caller, which ends the agent.
inline StepOutcome step_agent(Agent& agent, TrackedSession& session, Rng& rng, std::uint64_t step,
                              std::int64_t await_delay_ms = 0) {
  StepOutcome out;
  out.step = step;
  out.state = session.observe();
  out.alerts_seen = session.state().alert_count_seen;

  auto available = session.available();
  Selection selection = agent.select_action(out.state, available, rng);
  out.action = selection.action;
  out.off_model_selection = selection.off_model;

  const ViewState& performed = session.perform(selection.action);
  if (performed.last_error) {
    if (performed.last_error->internal()) {
      out.runtime_error = performed.last_error;
    } else {
      out.rejected = performed.last_error;
    }
  }
  agent.observe(out.state, selection.action, performed);

  if (await_delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(await_delay_ms));
  session.poll_alerts();
  out.state_after = session.observe();

  out.verdict = agent.assert_transition(out.state, selection.action, out.state_after);
  return out;
}

inline std::unique_ptr<Agent> make_agent(const AgentSpec& spec, const std::string& persona) {
  validate(spec);
  switch (spec.kind) {
    case AgentKind::replay: return std::make_unique<ReplayAgent>(*spec.trace, persona);
    case AgentKind::random: return std::make_unique<RandomAgent>(persona);
    case AgentKind::frequency: return std::make_unique<FrequencyAgent>(spec.model, persona);
  }
  throw Error(ErrorCode::validation, "unknown agent kind");
}

// Builds the fresh target for a run.
using TargetFactory = std::function<std::unique_ptr<Backend>(const SimulationConfig&)>;

inline constexpr std::uint64_t kServerSeedStream = 0xFFFF'FFFF'0000'0001ULL;
inline constexpr std::int64_t kVirtualEpochMs = 1'700'000'000'000;

inline std::unique_ptr<Backend> default_target(const SimulationConfig& config) {
  auto server = std::make_unique<Server>(derive_seed(config.seed, kServerSeedStream), config.faults);
  seed_population(*server, config.population);
  return server;
}

namespace detail {

// Signs the agent's persona up and logs in through ordinary UI actions.
inline bool bootstrap(TrackedSession& session, Agent& agent) {
  auto find = [&](const std::string& label) -> std::optional<ActionTemplate> {
    for (auto& t : session.available()) {
      if (t.component.path.back().label == label) return t;
    }
    return std::nullopt;
  };
  auto act = [&](const std::string& label, std::optional<std::string> payload = {}) {
    auto t = find(label);
    if (!t) throw Error(ErrorCode::run, "bootstrap: '" + label + "' not available");
    session.trigger(t->component, t->kind, std::move(payload));
  };
  Persona& persona = agent.persona();
  act("Sign up");
  act("username", persona.signup_candidate());
  act("password", persona.password());
  act("Create account");
  if (session.state().last_error || session.observe() != View::login) return false;
  persona.registered(persona.signup_candidate());
  act("username", persona.account());
  act("password", persona.password());
  act("Login");
  return session.observe() == View::feed && !session.state().last_error;
}

inline void run_agent(const SimulationConfig& config, std::size_t index, Backend& backend, TraceLog* trace_out,
                      std::atomic<bool>& stop, AgentReport& report) {
  const AgentSpec& spec = config.agents[index];
  report.index = index;
  report.name = "agent-" + std::to_string(index);
  report.kind = spec.kind;
  report.seed = derive_seed(config.seed, index);
  Rng rng(report.seed);

  std::unique_ptr<Agent> agent;
  try {
    agent = make_agent(spec, report.name);
  } catch (const Error& e) {
    report.bootstrap_failed = true;
    report.terminal_error = e.what();
    return;
  }

  VirtualClock clock(kVirtualEpochMs + static_cast<std::int64_t>(index) * 1'000'000'000, 1000);
  std::uint64_t next_seq = 0;
  if (trace_out) {
    if (auto last = trace_out->last_seq(report.name)) next_seq = *last + 1;
  }
  TrackedSession session(report.name, backend, config.faults, trace_out, clock.as_clock(), ViewState{}, next_seq);

  if (spec.kind != AgentKind::replay) {
    bool ok = false;
    try {
      ok = bootstrap(session, *agent);
    } catch (const Error& e) {
      report.terminal_error = std::string("bootstrap: ") + e.what();
    }
    if (!ok) {
      report.bootstrap_failed = true;
      if (!report.terminal_error) report.terminal_error = "bootstrap: could not sign up and log in";
      report.final_view = session.observe();
      return;
    }
  }

  std::optional<Stimulus> stimulus;
  if (config.stimulus_interval > 0) stimulus.emplace(backend, "stimulus-" + std::to_string(index));

  const std::uint64_t limit = std::min(spec.max_steps, config.max_steps);
  for (std::uint64_t step = 0; step < limit; ++step) {
    if (stop.load() || agent->finished()) break;
    if (stimulus && step > 0 && step % config.stimulus_interval == 0 && session.state().username) {
      stimulus->deliver_like(*session.state().username);
    }
    if (config.time_scale > 0 && spec.kind == AgentKind::replay && step > 0) {
      const auto& events = spec.trace->events;
      auto delta = static_cast<double>(events[step].ts_ms - events[step - 1].ts_ms) * config.time_scale;
      if (delta > 0) std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<std::int64_t>(delta)));
    }
    try {
      report.steps.push_back(step_agent(*agent, session, rng, step, config.await_delay_ms));
    } catch (const Error& e) {
      report.terminal_error = e.what();
      break;
    }
    if (config.stop_on_first_violation && report.steps.back().verdict.status == VerdictStatus::violation) {
      stop.store(true);
    }
  }
  report.final_view = session.observe();
}

}  // namespace detail

// Runs every configured agent against one fresh target and aggregates the
// outcomes. A single agent runs on the calling thread; several agents run
// on one thread each, with the target serializing their requests.
inline SimulationReport run_simulation(const SimulationConfig& config, const TargetFactory& factory = default_target,
                                       TraceLog* trace_out = nullptr) {
  validate(config.faults);
  std::unique_ptr<Backend> target;
  try {
    target = factory(config);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::run, std::string("target startup failed: ") + e.what());
  }
  if (!target) throw Error(ErrorCode::run, "target startup failed");

  SimulationReport report;
  report.seed = config.seed;
  report.faults = config.faults;
  report.agents.resize(config.agents.size());
  std::atomic<bool> stop{false};

  if (config.agents.size() == 1) {
    detail::run_agent(config, 0, *target, trace_out, stop, report.agents[0]);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(config.agents.size());
    for (std::size_t i = 0; i < config.agents.size(); ++i) {
      workers.emplace_back(detail::run_agent, std::cref(config), i, std::ref(*target), trace_out, std::ref(stop),
                           std::ref(report.agents[i]));
    }
    for (auto& w : workers) w.join();
  }
  finalize(report);
  return report;
}

// ---------------------------------------------------------------------------
// Report file

namespace detail {

inline json error_json(const std::optional<ServerError>& e) {
  if (!e) return nullptr;
  return json{{"code", e->code}, {"message", e->message}};
}

inline std::optional<ServerError> error_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return ServerError{j.at("code").get<int>(), j.at("message").get<std::string>()};
}

inline json distribution_json(const std::map<View, double>& d) {
  json j = json::object();
  for (const auto& [v, p] : d) j[std::string(to_string(v))] = p;
  return j;
}

inline std::map<View, double> distribution_from_json(const json& j) {
  std::map<View, double> d;
  for (const auto& [k, p] : j.items()) {
    auto v = view_from_string(k);
    if (!v) throw Error(ErrorCode::parse, "unknown view '" + k + "' in report");
    d[*v] = p.get<double>();
  }
  return d;
}

inline View view_field(const json& j, const char* field) {
  auto v = view_from_string(j.at(field).get<std::string>());
  if (!v) throw Error(ErrorCode::parse, std::string("unknown view in report field ") + field);
  return *v;
}

}  // namespace detail

inline json to_json(const SimulationReport& r) {
  json agents = json::array();
  for (const AgentReport& a : r.agents) {
    json steps = json::array();
    for (const StepOutcome& s : a.steps) {
      json action{{"component", encode_component_id(s.action.component)}, {"kind", to_string(s.action.kind)}};
      if (s.action.payload) action["payload"] = *s.action.payload;
      steps.push_back(json{{"step", s.step},
                           {"state", to_string(s.state)},
                           {"action", std::move(action)},
                           {"state_after", to_string(s.state_after)},
                           {"verdict", json{{"status", to_string(s.verdict.status)},
                                            {"surprise", s.verdict.surprise},
                                            {"expected", detail::distribution_json(s.verdict.expected)},
                                            {"observed", to_string(s.verdict.observed)}}},
                           {"off_model_selection", s.off_model_selection},
                           {"runtime_error", detail::error_json(s.runtime_error)},
                           {"rejected", detail::error_json(s.rejected)},
                           {"alerts_seen", s.alerts_seen}});
    }
    json aj{{"index", a.index}, {"name", a.name}, {"kind", to_string(a.kind)}, {"seed", a.seed},
            {"bootstrap_failed", a.bootstrap_failed}};
    aj["terminal_error"] = a.terminal_error ? json(*a.terminal_error) : json(nullptr);
    aj["final_view"] = a.final_view ? json(to_string(*a.final_view)) : json(nullptr);
    aj["steps"] = std::move(steps);
    agents.push_back(std::move(aj));
  }
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back(json{{"agent", v.agent},
                              {"step", v.step},
                              {"state", to_string(v.state)},
                              {"action", v.action},
                              {"expected", detail::distribution_json(v.expected)},
                              {"observed", to_string(v.observed)}});
  }
  json errors = json::array();
  for (const auto& e : r.runtime_errors) {
    errors.push_back(json{{"agent", e.agent}, {"step", e.step}, {"action", e.action}, {"error", detail::error_json(e.error)}});
  }
  json coverage = json::array();
  for (const auto& [state, key] : r.coverage) {
    coverage.push_back(json{{"state", to_string(state)}, {"component", key.component}, {"kind", to_string(key.kind)}});
  }
  return json{{"format", "synthuser-report"},
              {"version", 1},
              {"seed", r.seed},
              {"faults", json{{"follow_error_probability", r.faults.follow_error_probability},
                              {"alert_nav_bug_enabled", r.faults.alert_nav_bug_enabled},
                              {"alert_nav_bug_threshold", r.faults.alert_nav_bug_threshold}}},
              {"totals", json{{"agents", r.totals.agents},
                              {"steps", r.totals.steps},
                              {"violations", r.totals.violations},
                              {"runtime_errors", r.totals.runtime_errors},
                              {"rejected", r.totals.rejected},
                              {"off_model", r.totals.off_model},
                              {"terminated", r.totals.terminated}}},
              {"violations", std::move(violations)},
              {"runtime_errors", std::move(errors)},
              {"coverage", std::move(coverage)},
              {"agents", std::move(agents)}};
}

// Reads the per-agent step logs back; derived sections are recomputed.
inline SimulationReport report_from_json(const json& j) {
  try {
    if (j.value("format", "") != "synthuser-report" || j.value("version", 0) != 1) {
      throw Error(ErrorCode::parse, "not a synthuser-report v1 document");
    }
    SimulationReport r;
    r.seed = j.at("seed").get<std::uint64_t>();
    const json& f = j.at("faults");
    r.faults.follow_error_probability = f.at("follow_error_probability").get<double>();
    r.faults.alert_nav_bug_enabled = f.at("alert_nav_bug_enabled").get<bool>();
    r.faults.alert_nav_bug_threshold = f.at("alert_nav_bug_threshold").get<std::uint64_t>();
    for (const json& aj : j.at("agents")) {
      AgentReport a;
      a.index = aj.at("index").get<std::size_t>();
      a.name = aj.at("name").get<std::string>();
      auto kind = agent_kind_from_string(aj.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::parse, "unknown agent kind in report");
      a.kind = *kind;
      a.seed = aj.at("seed").get<std::uint64_t>();
      a.bootstrap_failed = aj.at("bootstrap_failed").get<bool>();
      if (!aj.at("terminal_error").is_null()) a.terminal_error = aj.at("terminal_error").get<std::string>();
      if (!aj.at("final_view").is_null()) a.final_view = detail::view_field(aj, "final_view");
      for (const json& sj : aj.at("steps")) {
        StepOutcome s;
        s.step = sj.at("step").get<std::uint64_t>();
        s.state = detail::view_field(sj, "state");
        s.state_after = detail::view_field(sj, "state_after");
        const json& action = sj.at("action");
        s.action.component = parse_component_id(action.at("component").get<std::string>());
        auto akind = action_kind_from_string(action.at("kind").get<std::string>());
        if (!akind) throw Error(ErrorCode::parse, "unknown action kind in report");
        s.action.kind = *akind;
        if (action.contains("payload")) s.action.payload = action.at("payload").get<std::string>();
        const json& vj = sj.at("verdict");
        std::string status = vj.at("status").get<std::string>();
        s.verdict.status = status == "ok"          ? VerdictStatus::ok
                           : status == "violation" ? VerdictStatus::violation
                                                   : VerdictStatus::off_model;
        s.verdict.surprise = vj.at("surprise").get<double>();
        s.verdict.expected = detail::distribution_from_json(vj.at("expected"));
        s.verdict.observed = detail::view_field(vj, "observed");
        s.off_model_selection = sj.at("off_model_selection").get<bool>();
        s.runtime_error = detail::error_from_json(sj.at("runtime_error"));
        s.rejected = detail::error_from_json(sj.at("rejected"));
        s.alerts_seen = sj.at("alerts_seen").get<std::uint64_t>();
        a.steps.push_back(std::move(s));
      }
      r.agents.push_back(std::move(a));
    }
    finalize(r);
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::parse, std::string("report: ") + ex.what());
  }
}

inline void write_report(const SimulationReport& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write report '" + path.string() + "'");
  out << to_json(r).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "failed writing report '" + path.string() + "'");
}

inline SimulationReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open report '" + path.string() + "'");
  try {
    return report_from_json(json::parse(in));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::parse, "report '" + path.string() + "': " + ex.what());
  }
}

inline std::string summarize(const SimulationReport& r) {
  auto fmt_dist = [](const std::map<View, double>& d) {
    std::ostringstream s;
    s << '{';
    bool first = true;
    for (const auto& [v, p] : d) {
      if (!first) s << ", ";
      first = false;
      s << to_string(v) << ": " << std::fixed << std::setprecision(3) << p;
    }
    s << '}';
    return s.str();
  };

  std::ostringstream out;
  out << "seed " << r.seed << ", faults: follow_p=" << r.faults.follow_error_probability
      << " alert_nav=" << (r.faults.alert_nav_bug_enabled ? "on" : "off") << " (threshold "
      << r.faults.alert_nav_bug_threshold << ")\n";
  out << std::left << std::setw(12) << "agent" << std::setw(11) << "kind" << std::right << std::setw(7) << "steps"
      << std::setw(12) << "violations" << std::setw(11) << "off-model" << std::setw(16) << "runtime-errors"
      << std::setw(10) << "rejected" << "  end\n";
  for (const AgentReport& a : r.agents) {
    std::uint64_t violations = 0, errors = 0, rejected = 0, off = 0;
    for (const StepOutcome& s : a.steps) {
      violations += s.verdict.status == VerdictStatus::violation;
      errors += s.runtime_error.has_value();
      rejected += s.rejected.has_value();
      off += s.off_model();
    }
    double rate = a.steps.empty() ? 0.0 : 100.0 * static_cast<double>(off) / static_cast<double>(a.steps.size());
    std::ostringstream rate_text;
    rate_text << std::fixed << std::setprecision(1) << rate << '%';
    std::string end = a.bootstrap_failed ? "bootstrap-failed" : a.terminal_error ? *a.terminal_error : "completed";
    out << std::left << std::setw(12) << a.name << std::setw(11) << to_string(a.kind) << std::right << std::setw(7)
        << a.steps.size() << std::setw(12) << violations << std::setw(11) << rate_text.str() << std::setw(16) << errors
        << std::setw(10) << rejected << "  " << end << '\n';
  }
  double total_rate = r.totals.steps == 0 ? 0.0
                                          : 100.0 * static_cast<double>(r.totals.off_model) /
                                                static_cast<double>(r.totals.steps);
  out << "agents: " << r.totals.agents << ", steps: " << r.totals.steps << ", off-model rate: " << std::fixed
      << std::setprecision(1) << total_rate << "%\n";
  out << "violations: " << r.totals.violations << '\n';
  for (const auto& v : r.violations) {
    out << "  agent-" << v.agent << " step " << v.step << " at " << to_string(v.state) << " on " << v.action
        << ": expected " << fmt_dist(v.expected) << ", observed " << to_string(v.observed) << '\n';
  }
  out << "runtime errors: " << r.totals.runtime_errors << '\n';
  for (const auto& e : r.runtime_errors) {
    out << "  agent-" << e.agent << " step " << e.step << " on " << e.action << ": " << e.error.code << ' '
        << e.error.message << '\n';
  }
  out << "coverage: " << r.coverage.size() << " state-action pairs\n";
  return out.str();
}

}  // namespace synthuser
