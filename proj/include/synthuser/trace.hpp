#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "synthuser/component_id.hpp"
#include "synthuser/error.hpp"
#include "synthuser/view.hpp"

namespace synthuser {

using json = nlohmann::ordered_json;

inline constexpr std::string_view kTraceFormat = "synthuser-trace";
inline constexpr int kTraceVersion = 1;

enum class ActionKind { click, text_input };

inline std::string_view to_string(ActionKind kind) {
  return kind == ActionKind::click ? "click" : "text-input";
}

inline std::optional<ActionKind> action_kind_from_string(std::string_view text) {
  if (text == "click") return ActionKind::click;
  if (text == "text-input") return ActionKind::text_input;
  return std::nullopt;
}

// A user event aimed at one component. Text input carries its payload.
struct UiAction {
  ComponentId component;
  ActionKind kind = ActionKind::click;
  std::optional<std::string> payload;

  bool operator==(const UiAction&) const = default;
};

// One tracked binding of (state before, action, state after).
struct ActionEvent {
  std::string session;
  std::uint64_t seq = 0;
  std::int64_t ts_ms = 0;
  View state_before = View::login;
  UiAction action;
  View state_after = View::login;

  bool operator==(const ActionEvent&) const = default;
};

struct Trace {
  std::string session;
  std::vector<ActionEvent> events;

  bool operator==(const Trace&) const = default;
};

inline json trace_header() {
  return json{{"format", kTraceFormat}, {"version", kTraceVersion}};
}

inline json to_json(const ActionEvent& e) {
  json action{{"component", encode_component_id(e.action.component)}, {"kind", to_string(e.action.kind)}};
  if (e.action.payload) action["payload"] = *e.action.payload;
  return json{{"session", e.session},
              {"seq", e.seq},
              {"ts_ms", e.ts_ms},
              {"state_before", to_string(e.state_before)},
              {"action", std::move(action)},
              {"state_after", to_string(e.state_after)}};
}

namespace detail {

inline View parse_view_field(const json& j, const char* field) {
  const auto& text = j.at(field).get_ref<const std::string&>();
  auto v = view_from_string(text);
  if (!v) throw Error(ErrorCode::parse, std::string("unknown view '") + text + "' in " + field);
  return *v;
}

}  // namespace detail

// Throws Error(parse) on missing fields or values outside the closed enums.
inline ActionEvent event_from_json(const json& j) {
  try {
    ActionEvent e;
    e.session = j.at("session").get<std::string>();
    e.seq = j.at("seq").get<std::uint64_t>();
    e.ts_ms = j.at("ts_ms").get<std::int64_t>();
    e.state_before = detail::parse_view_field(j, "state_before");
    e.state_after = detail::parse_view_field(j, "state_after");
    const json& action = j.at("action");
    e.action.component = parse_component_id(action.at("component").get<std::string>());
    auto kind = action_kind_from_string(action.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::parse, "unknown action kind '" + action.at("kind").get<std::string>() + "'");
    e.action.kind = *kind;
    if (action.contains("payload")) e.action.payload = action.at("payload").get<std::string>();
    if (e.action.kind == ActionKind::text_input && !e.action.payload) {
      throw Error(ErrorCode::parse, "text-input action without payload");
    }
    if (e.action.kind == ActionKind::click && e.action.payload) {
      throw Error(ErrorCode::parse, "click action with payload");
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::parse, ex.what());
  }
}

// Append-only writer for the line-delimited trace format. Appends from many
// sessions are serialized through one mutex; each session's seq must advance
// by exactly one.
class TraceLog {
 public:
  // Writes the header line when `write_header` is set (fresh stream).
  explicit TraceLog(std::ostream& out, bool write_header = true) : out_(&out) {
    if (write_header) write_line(trace_header().dump());
  }

  // Opens `path` for appending, creating it with a header when it is missing
  // or empty. Per-session seq counters resume from the existing content.
  static std::unique_ptr<TraceLog> open(const std::filesystem::path& path);

  TraceLog(const TraceLog&) = delete;
  TraceLog& operator=(const TraceLog&) = delete;

  void append(const ActionEvent& event) {
    std::lock_guard lock(mu_);
    auto it = last_seq_.find(event.session);
    std::uint64_t expected = it == last_seq_.end() ? 0 : it->second + 1;
    if (event.seq != expected) {
      throw Error(ErrorCode::sequencing, "session '" + event.session + "': got seq " + std::to_string(event.seq) +
                                             ", expected " + std::to_string(expected));
    }
    write_line(to_json(event).dump());
    last_seq_[event.session] = event.seq;
  }

  std::optional<std::uint64_t> last_seq(const std::string& session) const {
    std::lock_guard lock(mu_);
    auto it = last_seq_.find(session);
    if (it == last_seq_.end()) return std::nullopt;
    return it->second;
  }

 private:
  TraceLog() = default;

  void write_line(const std::string& line) {
    *out_ << line << '\n';
    out_->flush();
    if (!*out_) throw Error(ErrorCode::io, "failed to write trace line");
  }

  std::unique_ptr<std::ofstream> owned_;
  std::ostream* out_ = nullptr;
  mutable std::mutex mu_;
  std::map<std::string, std::uint64_t> last_seq_;
};

inline void append_event(TraceLog& log, const ActionEvent& event) { log.append(event); }

// Groups lines by session (in order of first appearance), orders each group by
// seq and validates sequencing. Throws parse errors carrying the line number
// and integrity errors for duplicates, gaps and time running backwards.
inline std::vector<Trace> load_trace(std::istream& in) {
  std::vector<Trace> traces;
  std::map<std::string, std::size_t> slot;
  std::map<std::string, std::map<std::uint64_t, ActionEvent>> by_session;

  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": " + ex.what());
    }
    if (!saw_header) {
      if (!j.is_object() || j.value("format", "") != kTraceFormat || j.value("version", 0) != kTraceVersion) {
        throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": missing synthuser-trace v1 header");
      }
      saw_header = true;
      continue;
    }
    ActionEvent e;
    try {
      e = event_from_json(j);
    } catch (const Error& err) {
      throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": " + err.what());
    }
    if (!slot.count(e.session)) {
      slot[e.session] = traces.size();
      traces.push_back(Trace{e.session, {}});
    }
    auto& events = by_session[e.session];
    if (events.count(e.seq)) {
      throw Error(ErrorCode::integrity, "line " + std::to_string(line_no) + ": duplicate (session '" + e.session +
                                            "', seq " + std::to_string(e.seq) + ")");
    }
    std::uint64_t seq = e.seq;
    events.emplace(seq, std::move(e));
  }

  for (auto& trace : traces) {
    auto& events = by_session[trace.session];
    std::uint64_t expected = 0;
    for (auto& [seq, event] : events) {
      if (seq != expected) {
        std::string where = expected == 0 ? "before seq " + std::to_string(seq) : "after seq " + std::to_string(expected - 1);
        throw Error(ErrorCode::integrity, "session '" + trace.session + "': seq gap " + where);
      }
      if (!trace.events.empty() && event.ts_ms < trace.events.back().ts_ms) {
        throw Error(ErrorCode::integrity, "session '" + trace.session + "': ts_ms decreases at seq " + std::to_string(seq));
      }
      trace.events.push_back(std::move(event));
      ++expected;
    }
  }
  return traces;
}

inline std::vector<Trace> load_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open trace file '" + path.string() + "'");
  return load_trace(in);
}

inline std::unique_ptr<TraceLog> TraceLog::open(const std::filesystem::path& path) {
  std::unique_ptr<TraceLog> log(new TraceLog());
  bool fresh = true;
  std::error_code ec;
  if (std::filesystem::exists(path, ec) && std::filesystem::file_size(path, ec) > 0) {
    fresh = false;
    for (const Trace& t : load_trace_file(path)) {
      if (!t.events.empty()) log->last_seq_[t.session] = t.events.back().seq;
    }
  }
  log->owned_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app);
  if (!*log->owned_) throw Error(ErrorCode::io, "cannot open trace file '" + path.string() + "' for append");
  log->out_ = log->owned_.get();
  if (fresh) log->write_line(trace_header().dump());
  return log;
}

}  // namespace synthuser
