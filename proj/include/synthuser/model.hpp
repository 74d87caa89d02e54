#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "synthuser/error.hpp"
#include "synthuser/trace.hpp"
#include "synthuser/view.hpp"

namespace synthuser {

// An action as the model sees it: the encoded component id (sibling
// indices retained) plus the event kind. Payloads are not part of the key.
struct ActionKey {
  std::string component;
  ActionKind kind = ActionKind::click;

  auto operator<=>(const ActionKey&) const = default;
};

inline ActionKey key_of(const UiAction& a) { return ActionKey{encode_component_id(a.component), a.kind}; }

inline std::string to_string(const ActionKey& k) {
  return k.kind == ActionKind::click ? k.component : k.component + " (text-input)";
}

using CountRow = std::map<ActionKey, std::uint64_t>;
using StateRow = std::map<View, std::uint64_t>;

template <typename Row>
std::uint64_t row_total(const Row& row) {
  std::uint64_t total = 0;
  for (const auto& [k, c] : row) total += c;
  return total;
}

// First-order behaviour model: how often each action was taken in each view,
// and which view followed each (view, action) pair. Probabilities are pure
// maximum likelihood, count / row total.
struct FrequencyModel {
  std::map<View, CountRow> action_table;
  std::map<std::pair<View, ActionKey>, StateRow> state_table;
  std::vector<std::string> sources;  // session ids of the training traces
  std::string built_at;

  bool operator==(const FrequencyModel&) const = default;

  const CountRow* actions_at(View s) const {
    auto it = action_table.find(s);
    return it == action_table.end() ? nullptr : &it->second;
  }

  const StateRow* expectation(View s, const ActionKey& a) const {
    auto it = state_table.find({s, a});
    return it == state_table.end() ? nullptr : &it->second;
  }

  double action_probability(View s, const ActionKey& a) const {
    const CountRow* row = actions_at(s);
    if (!row) return 0.0;
    auto it = row->find(a);
    if (it == row->end()) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(row_total(*row));
  }

  double next_state_probability(View s, const ActionKey& a, View next) const {
    const StateRow* row = expectation(s, a);
    if (!row) return 0.0;
    auto it = row->find(next);
    if (it == row->end()) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(row_total(*row));
  }
};

inline FrequencyModel build_frequency_model(std::span<const Trace> traces, std::string built_at = {}) {
  if (traces.empty()) throw Error(ErrorCode::model, "cannot build a model from an empty trace list");
  FrequencyModel model;
  model.built_at = std::move(built_at);
  for (const Trace& t : traces) {
    model.sources.push_back(t.session);
    for (const ActionEvent& e : t.events) {
      ActionKey key = key_of(e.action);
      ++model.action_table[e.state_before][key];
      ++model.state_table[{e.state_before, key}][e.state_after];
    }
  }
  return model;
}

// Model file: raw counts only, probabilities are recomputed on load.
inline json to_json(const FrequencyModel& m) {
  json actions = json::array();
  for (const auto& [state, row] : m.action_table) {
    for (const auto& [key, count] : row) {
      actions.push_back(json{{"state", to_string(state)},
                             {"component", key.component},
                             {"kind", to_string(key.kind)},
                             {"count", count}});
    }
  }
  json transitions = json::array();
  for (const auto& [sa, row] : m.state_table) {
    for (const auto& [next, count] : row) {
      transitions.push_back(json{{"state", to_string(sa.first)},
                                 {"component", sa.second.component},
                                 {"kind", to_string(sa.second.kind)},
                                 {"next", to_string(next)},
                                 {"count", count}});
    }
  }
  return json{{"format", "synthuser-model"},
              {"version", 1},
              {"provenance", json{{"sessions", m.sources}, {"built_at", m.built_at}}},
              {"action_table", std::move(actions)},
              {"state_table", std::move(transitions)}};
}

inline FrequencyModel model_from_json(const json& j) {
  auto view = [](const json& e, const char* field) {
    auto v = view_from_string(e.at(field).get<std::string>());
    if (!v) throw Error(ErrorCode::parse, "unknown view in model: " + e.at(field).get<std::string>());
    return *v;
  };
  auto key = [](const json& e) {
    auto kind = action_kind_from_string(e.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::parse, "unknown action kind in model");
    // Validates the id grammar; the encoded text is kept as-is.
    parse_component_id(e.at("component").get<std::string>());
    return ActionKey{e.at("component").get<std::string>(), *kind};
  };
  try {
    if (j.value("format", "") != "synthuser-model" || j.value("version", 0) != 1) {
      throw Error(ErrorCode::parse, "not a synthuser-model v1 document");
    }
    FrequencyModel m;
    m.sources = j.at("provenance").at("sessions").get<std::vector<std::string>>();
    m.built_at = j.at("provenance").value("built_at", std::string());
    for (const json& e : j.at("action_table")) {
      m.action_table[view(e, "state")][key(e)] += e.at("count").get<std::uint64_t>();
    }
    for (const json& e : j.at("state_table")) {
      m.state_table[{view(e, "state"), key(e)}][view(e, "next")] += e.at("count").get<std::uint64_t>();
    }
    return m;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::parse, std::string("model: ") + ex.what());
  }
}

inline void save_model(const FrequencyModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write model '" + path.string() + "'");
  out << to_json(m).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "failed writing model '" + path.string() + "'");
}

inline FrequencyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open model '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::parse, "model '" + path.string() + "': " + ex.what());
  }
  return model_from_json(j);
}

}  // namespace synthuser
