#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "synthuser/synthuser.hpp"

namespace synthuser::fixtures {

inline constexpr int kPopulation = 3;
inline constexpr std::uint64_t kStimulusEvery = 3;

// Records one scripted session on a target built exactly like the play
// engine's default target for `target_seed`. The stimulus account is named
// like the one the play loop uses for agent 0, so a replay of the trace sees
// the same alerts.
inline Trace record_scripted(std::uint64_t target_seed, std::uint64_t script_seed, std::uint64_t events,
                             ScriptedUser::Options options = {}, bool with_stimulus = true,
                             const std::string& session = "s0") {
  SimulationConfig shape;
  shape.seed = target_seed;
  shape.population = kPopulation;
  auto target = default_target(shape);

  std::ostringstream buffer;
  TraceLog log(buffer);
  VirtualClock clock(kVirtualEpochMs, 1000);
  TrackedSession tracked(session, *target, FaultConfig{}, &log, clock.as_clock());
  Stimulus stimulus(*target, "stimulus-0");
  if (with_stimulus) {
    options.stimulus = &stimulus;
    options.stimulus_every = kStimulusEvery;
  }
  ScriptedUser(tracked, script_seed, options).record(events);

  std::istringstream in(buffer.str());
  auto traces = load_trace(in);
  if (traces.size() != 1) throw Error(ErrorCode::integrity, "expected one recorded session");
  return traces.front();
}

// Several scripted sessions, each on its own fresh target.
inline std::vector<Trace> record_corpus(std::uint64_t target_seed, std::size_t sessions, std::uint64_t events,
                                        ScriptedUser::Options options = {}) {
  std::vector<Trace> out;
  for (std::size_t i = 0; i < sessions; ++i) {
    out.push_back(record_scripted(target_seed, target_seed * 1000 + i, events, options, true, "s" + std::to_string(i)));
  }
  return out;
}

inline SimulationConfig frequency_run(std::shared_ptr<const FrequencyModel> model, std::uint64_t seed,
                                      std::uint64_t max_steps, FaultConfig faults = {}) {
  SimulationConfig c;
  c.agents.push_back(AgentSpec{AgentKind::frequency, {}, std::move(model), max_steps});
  c.faults = faults;
  c.max_steps = max_steps;
  c.seed = seed;
  c.population = kPopulation;
  c.stimulus_interval = kStimulusEvery;
  return c;
}

inline bool is_follow(const UiAction& a) { return a.component.path.back().label == "Follow"; }
inline bool is_liked_alert(const UiAction& a) { return a.component.path.back().label == "liked"; }

// Probability mass the model puts on Follow buttons in the users view.
inline double follow_probability(const FrequencyModel& m) {
  const CountRow* row = m.actions_at(View::users);
  if (!row) return 0.0;
  double p = 0.0;
  for (const auto& [key, count] : *row) {
    if (key.component.find("button[Follow]") != std::string::npos) p += m.action_probability(View::users, key);
  }
  return p;
}

}  // namespace synthuser::fixtures
