#include <gtest/gtest.h>

#include <functional>
#include <string>

#include "synthuser/component_id.hpp"
#include "synthuser/rng.hpp"

using namespace synthuser;

namespace {

ComponentId path(std::initializer_list<Segment> segs) { return ComponentId{std::vector<Segment>(segs)}; }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::run;
}

}  // namespace

TEST(ComponentId, EncodesNestedPath) {
  auto id = path({{"window", "main", 0}, {"panel", "alerts", 0}, {"button", "Like", 2}});
  EXPECT_EQ(encode_component_id(id), "window[main]#0/panel[alerts]#0/button[Like]#2");
}

TEST(ComponentId, OmitsMissingLabel) {
  EXPECT_EQ(encode_component_id(path({{"window", "main", 0}, {"button", std::nullopt, 0}})), "window[main]#0/button#0");
}

TEST(ComponentId, EscapesSpecialCharactersInLabels) {
  auto id = path({{"window", "main", 0}, {"button", "a/b", 0}});
  EXPECT_EQ(encode_component_id(id), "window[main]#0/button[a\\/b]#0");
  auto tricky = path({{"window", "main", 0}, {"button", "x[1]#\\", 3}});
  EXPECT_EQ(parse_component_id(encode_component_id(tricky)), tricky);
}

TEST(ComponentId, ParsesEncodedForm) {
  ComponentId id = parse_component_id("window[main]#0/button[Like]#2");
  ASSERT_EQ(id.path.size(), 2u);
  EXPECT_EQ(id.path[0].label, "main");
  EXPECT_EQ(id.path[1].label, "Like");
  EXPECT_EQ(id.path[1].kind, "button");
  EXPECT_EQ(id.path[1].index, 2u);
}

TEST(ComponentId, RejectsPathNotRootedAtWindow) {
  EXPECT_EQ(code_of([] { parse_component_id("button#0"); }), ErrorCode::parse);
  EXPECT_EQ(code_of([] { encode_component_id(path({{"button", "x", 0}})); }), ErrorCode::invalid_id);
  EXPECT_EQ(code_of([] { encode_component_id(ComponentId{}); }), ErrorCode::invalid_id);
}

TEST(ComponentId, RejectsMalformedIndex) {
  EXPECT_EQ(code_of([] { parse_component_id("window[main]#x"); }), ErrorCode::parse);
  EXPECT_EQ(code_of([] { parse_component_id("window[main]"); }), ErrorCode::parse);
  EXPECT_EQ(code_of([] { parse_component_id("window[main]#0/"); }), ErrorCode::parse);
  EXPECT_EQ(code_of([] { parse_component_id("window[ma]in]#0"); }), ErrorCode::parse);
  EXPECT_EQ(code_of([] { parse_component_id(""); }), ErrorCode::parse);
}

TEST(ComponentId, ParseErrorNamesOffendingSegment) {
  try {
    parse_component_id("window[main]#0/button[Like]#two");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("button[Like]#two"), std::string::npos) << e.what();
  }
}

TEST(ComponentId, PrefixRelation) {
  auto root = path({{"window", "main", 0}});
  auto child = path({{"window", "main", 0}, {"button", "Feed", 0}});
  EXPECT_TRUE(child.has_prefix(root));
  EXPECT_TRUE(child.has_prefix(child));
  EXPECT_FALSE(root.has_prefix(child));
  EXPECT_FALSE(child.has_prefix(path({{"window", "other", 0}})));
}

// parse(encode(p)) == p over generated paths, labels drawn from an alphabet
// heavy in characters that need escaping.
TEST(ComponentIdProperty, RoundTrip) {
  Rng rng(7);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)); };
  const std::string alphabet = "ab/[]#\\ Z9-_";
  const std::vector<std::string> kinds = {"panel", "button", "textfield", "link", "list_item", "x-1"};
  for (int trial = 0; trial < 2000; ++trial) {
    ComponentId id;
    id.path.push_back(Segment{"window", pick(4) == 0 ? std::nullopt : std::optional<std::string>("main"),
                              static_cast<std::uint32_t>(pick(3))});
    std::size_t depth = pick(5);
    for (std::size_t d = 0; d < depth; ++d) {
      Segment s;
      s.kind = kinds[pick(kinds.size())];
      if (pick(3) != 0) {
        std::string label;
        std::size_t len = pick(6);
        for (std::size_t i = 0; i < len; ++i) label += alphabet[pick(alphabet.size())];
        s.label = label;
      }
      s.index = static_cast<std::uint32_t>(pick(100000));
      id.path.push_back(std::move(s));
    }
    std::string text = encode_component_id(id);
    ASSERT_EQ(parse_component_id(text), id) << text;
    ASSERT_EQ(encode_component_id(parse_component_id(text)), text);
  }
}
