#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synthuser/error.hpp"

namespace synthuser {

// One step of a component's layout path: the widget kind, the text it
// carries (if any) and its position among same-(kind, label) siblings.
struct Segment {
  std::string kind;
  std::optional<std::string> label;
  std::uint32_t index = 0;

  auto operator<=>(const Segment&) const = default;
};

// Session-independent identifier of an actionable component. Encoded as
// `kind[label]#index` segments joined by `/`, rooted at a `window` segment.
struct ComponentId {
  std::vector<Segment> path;

  auto operator<=>(const ComponentId&) const = default;

  bool has_prefix(const ComponentId& prefix) const {
    if (prefix.path.size() > path.size()) return false;
    for (std::size_t i = 0; i < prefix.path.size(); ++i) {
      if (path[i] != prefix.path[i]) return false;
    }
    return true;
  }
};

namespace detail {

inline bool is_special(char c) { return c == '/' || c == '[' || c == ']' || c == '#' || c == '\\'; }

inline bool valid_kind(std::string_view kind) {
  if (kind.empty()) return false;
  for (char c : kind) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace detail

inline std::string encode_component_id(const ComponentId& id) {
  if (id.path.empty()) throw Error(ErrorCode::invalid_id, "component path is empty");
  if (id.path.front().kind != "window") {
    throw Error(ErrorCode::invalid_id, "first segment must be a window, got '" + id.path.front().kind + "'");
  }
  std::string out;
  for (std::size_t i = 0; i < id.path.size(); ++i) {
    const Segment& seg = id.path[i];
    if (!detail::valid_kind(seg.kind)) {
      throw Error(ErrorCode::invalid_id, "invalid widget kind '" + seg.kind + "'");
    }
    if (i > 0) out += '/';
    out += seg.kind;
    if (seg.label) {
      out += '[';
      for (char c : *seg.label) {
        if (detail::is_special(c)) out += '\\';
        out += c;
      }
      out += ']';
    }
    out += '#';
    out += std::to_string(seg.index);
  }
  return out;
}

namespace detail {

inline Segment parse_segment(std::string_view text) {
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::parse, "segment '" + std::string(text) + "': " + why);
  };
  Segment seg;
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] != '[' && text[pos] != '#') ++pos;
  seg.kind = std::string(text.substr(0, pos));
  if (!valid_kind(seg.kind)) throw fail("invalid widget kind");
  if (pos < text.size() && text[pos] == '[') {
    ++pos;
    std::string label;
    bool closed = false;
    while (pos < text.size()) {
      char c = text[pos++];
      if (c == '\\') {
        if (pos >= text.size()) throw fail("dangling escape");
        label += text[pos++];
      } else if (c == ']') {
        closed = true;
        break;
      } else if (is_special(c)) {
        throw fail("unescaped '" + std::string(1, c) + "' in label");
      } else {
        label += c;
      }
    }
    if (!closed) throw fail("unterminated label");
    seg.label = std::move(label);
  }
  if (pos >= text.size() || text[pos] != '#') throw fail("missing #index");
  ++pos;
  std::string_view digits = text.substr(pos);
  if (digits.empty() || digits.size() > 9) throw fail("index must be a non-negative integer");
  std::uint32_t index = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') throw fail("index must be a non-negative integer");
    index = index * 10 + static_cast<std::uint32_t>(c - '0');
  }
  seg.index = index;
  return seg;
}

}  // namespace detail

inline ComponentId parse_component_id(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::parse, "empty component id");
  ComponentId id;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i + 1 < text.size() && text[i] == '\\') {
      ++i;  // the escaped character never splits
      continue;
    }
    if (i == text.size() || text[i] == '/') {
      id.path.push_back(detail::parse_segment(text.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (id.path.front().kind != "window") {
    throw Error(ErrorCode::parse, "segment '" + std::string(text.substr(0, text.find('/'))) +
                                      "': first segment must be a window");
  }
  return id;
}

}  // namespace synthuser
