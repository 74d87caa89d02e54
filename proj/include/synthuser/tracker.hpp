#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "synthuser/client.hpp"
#include "synthuser/error.hpp"
#include "synthuser/trace.hpp"

namespace synthuser {

// Milliseconds since the epoch. Wall time while recording humans, virtual
// time inside the play engine.
using Clock = std::function<std::int64_t()>;

inline Clock wall_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

// Deterministic clock advancing a fixed step on every reading.
class VirtualClock {
 public:
  explicit VirtualClock(std::int64_t start_ms, std::int64_t step_ms = 1000) : now_(start_ms), step_(step_ms) {}

  std::int64_t tick() {
    std::int64_t t = now_;
    now_ += step_;
    return t;
  }

  Clock as_clock() {
    return [this] { return tick(); };
  }

 private:
  std::int64_t now_;
  std::int64_t step_;
};

// A client session whose performed actions are recorded as ActionEvents.
// Recording never changes what perform() does: a failed log write is
// reported after the state has been committed.
class TrackedSession {
 public:
  TrackedSession(std::string session_id, Backend& backend, FaultConfig faults, TraceLog* log, Clock clock,
                 ViewState initial = {}, std::uint64_t next_seq = 0)
      : session_id_(std::move(session_id)),
        backend_(&backend),
        faults_(faults),
        log_(log),
        clock_(std::move(clock)),
        state_(std::move(initial)),
        next_seq_(next_seq) {}

  const std::string& session_id() const { return session_id_; }
  const ViewState& state() const { return state_; }
  View observe() const { return observe_state(state_); }
  std::uint64_t next_seq() const { return next_seq_; }
  std::uint64_t recorded() const { return recorded_; }

  std::vector<ActionTemplate> available() const { return available_actions(state_); }

  // Unavailable or malformed actions throw before anything is recorded.
  const ViewState& perform(const UiAction& action) {
    View before = observe();
    ViewState after = synthuser::perform(state_, action, *backend_, faults_);
    state_ = std::move(after);
    if (log_ == nullptr) {
      ++recorded_;
      return state_;
    }
    ActionEvent event{session_id_, next_seq_, clock_(), before, action, observe()};
    try {
      log_->append(event);
    } catch (const Error& e) {
      throw Error(ErrorCode::tracking, std::string("action completed but was not recorded: ") + e.what());
    }
    ++next_seq_;
    ++recorded_;
    return state_;
  }

  // Programmatic trigger by component id, as if the user had done it.
  const ViewState& trigger(const ComponentId& component, ActionKind kind, std::optional<std::string> payload = {}) {
    std::string key = encode_component_id(component);
    auto actions = available();
    auto it = std::find_if(actions.begin(), actions.end(), [&](const ActionTemplate& t) { return t.key == key; });
    if (it == actions.end()) throw Error(ErrorCode::unavailable_action, "component '" + key + "' is not active");
    if (it->kind != kind) {
      throw Error(ErrorCode::invalid_kind, "component '" + key + "' does not accept " + std::string(to_string(kind)));
    }
    if (kind == ActionKind::text_input && !payload) {
      throw Error(ErrorCode::invalid_kind, "text-input on '" + key + "' requires a payload");
    }
    return perform(UiAction{component, kind, std::move(payload)});
  }

  std::vector<ComponentId> active_ids() const {
    std::vector<ComponentId> ids;
    for (auto& t : available()) ids.push_back(std::move(t.component));
    return ids;
  }

  // Alert delivery is not a user action and is never recorded.
  const ViewState& poll_alerts() {
    state_ = synthuser::poll_alerts(state_, *backend_);
    return state_;
  }

 private:
  std::string session_id_;
  Backend* backend_;
  FaultConfig faults_;
  TraceLog* log_;
  Clock clock_;
  ViewState state_;
  std::uint64_t next_seq_;
  std::uint64_t recorded_ = 0;
};

inline TrackedSession wrap(std::string session_id, Backend& backend, FaultConfig faults, TraceLog& log, Clock clock,
                           ViewState initial = {}) {
  std::uint64_t next = 0;
  if (auto last = log.last_seq(session_id)) next = *last + 1;
  return TrackedSession(std::move(session_id), backend, faults, &log, std::move(clock), std::move(initial), next);
}

// Server-side sink for actions completed in a browser UI. Sequence numbers
// and timestamps are assigned on receipt; the file write happens on a
// background thread so the reporting request never waits on disk.
class ActionReporter {
 public:
  ActionReporter(TraceLog& log, Clock clock) : log_(log), clock_(std::move(clock)), worker_([this] { run(); }) {}

  ~ActionReporter() {
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    worker_.join();
  }

  ActionReporter(const ActionReporter&) = delete;
  ActionReporter& operator=(const ActionReporter&) = delete;

  // Returns the seq assigned to the event.
  std::uint64_t report(const std::string& session, View before, UiAction action, View after) {
    if (action.kind == ActionKind::text_input && !action.payload) {
      throw Error(ErrorCode::invalid_kind, "text-input event without payload");
    }
    std::lock_guard lock(mu_);
    std::uint64_t seq = 0;
    if (auto it = next_seq_.find(session); it != next_seq_.end()) {
      seq = it->second;
    } else if (auto last = log_.last_seq(session)) {
      seq = *last + 1;
    }
    next_seq_[session] = seq + 1;
    std::int64_t ts = clock_();
    auto& last_ts = last_ts_[session];
    ts = std::max(ts, last_ts);
    last_ts = ts;
    queue_.push_back(ActionEvent{session, seq, ts, before, std::move(action), after});
    cv_.notify_all();
    return seq;
  }

  // Blocks until every reported event has reached the log.
  void flush() {
    std::unique_lock lock(mu_);
    idle_cv_.wait(lock, [this] { return queue_.empty() && !writing_; });
  }

  std::uint64_t dropped() const {
    std::lock_guard lock(mu_);
    return dropped_;
  }

 private:
  void run() {
    std::unique_lock lock(mu_);
    for (;;) {
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty() && stopping_) return;
      ActionEvent event = std::move(queue_.front());
      queue_.pop_front();
      writing_ = true;
      lock.unlock();
      bool ok = true;
      try {
        log_.append(event);
      } catch (const Error&) {
        ok = false;
      }
      lock.lock();
      if (!ok) ++dropped_;
      writing_ = false;
      if (queue_.empty()) idle_cv_.notify_all();
    }
  }

  TraceLog& log_;
  Clock clock_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<ActionEvent> queue_;
  std::map<std::string, std::uint64_t> next_seq_;
  std::map<std::string, std::int64_t> last_ts_;
  bool stopping_ = false;
  bool writing_ = false;
  std::uint64_t dropped_ = 0;
  std::thread worker_;
};

}  // namespace synthuser
