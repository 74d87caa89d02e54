#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synthuser/client.hpp"
#include "synthuser/error.hpp"
#include "synthuser/model.hpp"
#include "synthuser/rng.hpp"
#include "synthuser/trace.hpp"

namespace synthuser {

enum class AgentKind { replay, random, frequency };

inline std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::replay: return "replay";
    case AgentKind::random: return "random";
    case AgentKind::frequency: return "frequency";
  }
  return "?";
}

inline std::optional<AgentKind> agent_kind_from_string(std::string_view text) {
  if (text == "replay") return AgentKind::replay;
  if (text == "random") return AgentKind::random;
  if (text == "frequency") return AgentKind::frequency;
  return std::nullopt;
}

enum class VerdictStatus { ok, violation, off_model };

inline std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::ok: return "ok";
    case VerdictStatus::violation: return "violation";
    case VerdictStatus::off_model: return "off-model";
  }
  return "?";
}

// Outcome of checking one transition against the agent's expectation.
// surprise = 1 - P(observed); a violation always has surprise 1.
struct Verdict {
  VerdictStatus status = VerdictStatus::ok;
  double surprise = 0.0;
  std::map<View, double> expected;
  View observed = View::login;

  std::optional<View> expected_mode() const {
    std::optional<View> best;
    double p = -1.0;
    for (const auto& [v, q] : expected) {
      if (q > p) {
        p = q;
        best = v;
      }
    }
    return best;
  }

  bool operator==(const Verdict&) const = default;
};

struct Selection {
  UiAction action;
  bool off_model = false;
};

// Supplies text for input fields so synthetic users can sign up, log in and
// post. Deterministic and draws no randomness, so a selection consumes
// exactly one rng draw.
class Persona {
 public:
  explicit Persona(std::string base) : base_(std::move(base)), password_("pw-" + base_) {}

  const std::string& password() const { return password_; }

  // The account the persona logs into: the latest one it created.
  std::string account() const { return accounts_.empty() ? base_ : accounts_.back(); }

  // Name typed into the sign-up form: fresh for every account created.
  std::string signup_candidate() const {
    return accounts_.empty() ? base_ : base_ + "." + std::to_string(accounts_.size());
  }

  std::string payload(View view, const ComponentId& field) {
    const std::string name = field.path.back().label.value_or("");
    if (name == "username") return view == View::signup ? signup_candidate() : account();
    if (name == "password") return password_;
    if (name == "media") return "media-" + std::to_string(++media_);
    return "post " + std::to_string(++posts_) + " by " + account();
  }

  // Learns about accounts that were actually created. "Back to login" also
  // leads from signup to login, so only the submit button counts.
  void observe(View before, const UiAction& action, const ViewState& after) {
    if (before == View::signup && action.component.path.back().label == "Create account" &&
        after.view == View::login && !after.last_error) {
      accounts_.push_back(signup_candidate());
    }
  }

  // Marks `base` as registered (used after an out-of-band bootstrap).
  void registered(std::string account) { accounts_.push_back(std::move(account)); }

 private:
  std::string base_;
  std::string password_;
  std::vector<std::string> accounts_;
  std::uint64_t posts_ = 0;
  std::uint64_t media_ = 0;
};

// The shared automaton: Select, then (outside) Perform and Await, then Assert.
class Agent {
 public:
  explicit Agent(std::string persona) : persona_(std::move(persona)) {}
  virtual ~Agent() = default;

  virtual AgentKind kind() const = 0;
  virtual bool finished() const { return false; }
  virtual Selection select_action(View state, std::span<const ActionTemplate> available, Rng& rng) = 0;
  virtual Verdict assert_transition(View before, const UiAction& action, View after) = 0;

  // Called after each performed action with the resulting view state.
  virtual void observe(View before, const UiAction& action, const ViewState& after) {
    persona_.observe(before, action, after);
  }

  Persona& persona() { return persona_; }

 protected:
  UiAction fill(View state, const ActionTemplate& t) {
    UiAction a{t.component, t.kind, std::nullopt};
    if (t.kind == ActionKind::text_input) a.payload = persona_.payload(state, t.component);
    return a;
  }

  static std::vector<ActionTemplate> ordered(std::span<const ActionTemplate> available) {
    std::vector<ActionTemplate> out(available.begin(), available.end());
    std::sort(out.begin(), out.end(), template_less);
    return out;
  }

  Persona persona_;
};

// Re-executes one recorded session action by action.
class ReplayAgent final : public Agent {
 public:
  ReplayAgent(Trace trace, std::string persona) : Agent(std::move(persona)), trace_(std::move(trace)) {}

  AgentKind kind() const override { return AgentKind::replay; }
  bool finished() const override { return cursor_ >= trace_.events.size(); }
  std::size_t cursor() const { return cursor_; }
  const Trace& trace() const { return trace_; }

  Selection select_action(View, std::span<const ActionTemplate> available, Rng&) override {
    if (finished()) throw Error(ErrorCode::divergence, "replay trace exhausted");
    const ActionEvent& next = trace_.events[cursor_];
    const std::string key = encode_component_id(next.action.component);
    bool present = std::any_of(available.begin(), available.end(),
                               [&](const ActionTemplate& t) { return t.key == key && t.kind == next.action.kind; });
    if (!present) {
      throw Error(ErrorCode::divergence,
                  "seq " + std::to_string(next.seq) + ": logged action '" + key + "' is not available");
    }
    ++cursor_;
    return Selection{next.action, false};
  }

  Verdict assert_transition(View, const UiAction&, View after) override {
    const ActionEvent& logged = trace_.events.at(cursor_ - 1);
    Verdict v;
    v.observed = after;
    v.expected[logged.state_after] = 1.0;
    if (after == logged.state_after) {
      v.status = VerdictStatus::ok;
      v.surprise = 0.0;
    } else {
      v.status = VerdictStatus::violation;
      v.surprise = 1.0;
    }
    return v;
  }

 private:
  Trace trace_;
  std::size_t cursor_ = 0;
};

// Uniform choice among the available actions; holds no expectation.
class RandomAgent final : public Agent {
 public:
  using Agent::Agent;

  AgentKind kind() const override { return AgentKind::random; }

  Selection select_action(View state, std::span<const ActionTemplate> available, Rng& rng) override {
    if (available.empty()) throw Error(ErrorCode::dead_end, "no actions available in " + std::string(to_string(state)));
    auto sorted = ordered(available);
    std::size_t n = sorted.size();
    auto index = static_cast<std::size_t>(std::floor(rng.uniform() * static_cast<double>(n)));
    if (index >= n) index = n - 1;
    return Selection{fill(state, sorted[index]), false};
  }

  Verdict assert_transition(View, const UiAction&, View after) override {
    Verdict v;
    v.status = VerdictStatus::ok;
    v.surprise = 0.0;
    v.observed = after;
    return v;
  }
};

// Samples actions with the frequencies observed per view and expects the
// next view with the frequencies observed per (view, action).
class FrequencyAgent final : public Agent {
 public:
  FrequencyAgent(std::shared_ptr<const FrequencyModel> model, std::string persona)
      : Agent(std::move(persona)), model_(std::move(model)) {
    if (!model_) throw Error(ErrorCode::model, "frequency agent requires a model");
  }

  AgentKind kind() const override { return AgentKind::frequency; }
  const FrequencyModel& model() const { return *model_; }

  Selection select_action(View state, std::span<const ActionTemplate> available, Rng& rng) override {
    if (available.empty()) throw Error(ErrorCode::dead_end, "no actions available in " + std::string(to_string(state)));
    auto sorted = ordered(available);
    const double u = rng.uniform();

    std::vector<std::uint64_t> counts(sorted.size(), 0);
    std::uint64_t total = 0;
    if (const CountRow* row = model_->actions_at(state)) {
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        auto it = row->find(ActionKey{sorted[i].key, sorted[i].kind});
        if (it != row->end()) {
          counts[i] = it->second;
          total += it->second;
        }
      }
    }
    if (total == 0) {
      auto index = static_cast<std::size_t>(std::floor(u * static_cast<double>(sorted.size())));
      if (index >= sorted.size()) index = sorted.size() - 1;
      return Selection{fill(state, sorted[index]), true};
    }
    // Cumulative walk over the renormalized row in key order.
    double cumulative = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (counts[i] == 0) continue;
      last = i;
      cumulative += static_cast<double>(counts[i]) / static_cast<double>(total);
      if (u < cumulative) return Selection{fill(state, sorted[i]), false};
    }
    return Selection{fill(state, sorted[last]), false};
  }

  Verdict assert_transition(View before, const UiAction& action, View after) override {
    Verdict v;
    v.observed = after;
    const StateRow* row = model_->expectation(before, key_of(action));
    if (!row) {
      v.status = VerdictStatus::off_model;
      v.surprise = 1.0;
      return v;
    }
    const double total = static_cast<double>(row_total(*row));
    for (const auto& [next, count] : *row) v.expected[next] = static_cast<double>(count) / total;
    auto it = v.expected.find(after);
    if (it == v.expected.end()) {
      v.status = VerdictStatus::violation;
      v.surprise = 1.0;
    } else {
      v.status = VerdictStatus::ok;
      v.surprise = 1.0 - it->second;
    }
    return v;
  }

 private:
  std::shared_ptr<const FrequencyModel> model_;
};

}  // namespace synthuser
