#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <vector>

#include "synthuser/model.hpp"
#include "synthuser/rng.hpp"

using namespace synthuser;

namespace {

const std::string kLike0 = "window[main]#0/panel[feed]#0/button[Like]#0";
const std::string kAlerts = "window[main]#0/panel[nav]#0/button[Alerts]#0";

ActionEvent ev(std::uint64_t seq, View before, const std::string& component, View after) {
  return ActionEvent{"s", seq, static_cast<std::int64_t>(seq), before,
                     UiAction{parse_component_id(component), ActionKind::click, std::nullopt}, after};
}

Trace four_events() {
  return Trace{"s",
               {ev(0, View::feed, kLike0, View::feed), ev(1, View::feed, kLike0, View::feed),
                ev(2, View::feed, kAlerts, View::alerts), ev(3, View::alerts, kAlerts, View::alerts)}};
}

ActionKey click(const std::string& c) { return ActionKey{c, ActionKind::click}; }

}  // namespace

TEST(Model, CountsFourEventExample) {
  std::vector<Trace> traces{four_events()};
  FrequencyModel m = build_frequency_model(traces);
  EXPECT_EQ(m.action_table.at(View::feed).at(click(kLike0)), 2u);
  EXPECT_DOUBLE_EQ(m.action_probability(View::feed, click(kLike0)), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.action_probability(View::feed, click(kAlerts)), 1.0 / 3.0);
  EXPECT_EQ(*m.expectation(View::feed, click(kLike0)), (StateRow{{View::feed, 2}}));
  EXPECT_DOUBLE_EQ(m.next_state_probability(View::feed, click(kLike0), View::feed), 1.0);
  EXPECT_EQ(m.expectation(View::users, click(kLike0)), nullptr);
  EXPECT_EQ(m.action_probability(View::users, click(kLike0)), 0.0);
}

TEST(Model, SingletonTrace) {
  std::vector<Trace> traces{Trace{"x", {ev(0, View::login, kAlerts, View::signup)}}};
  FrequencyModel m = build_frequency_model(traces);
  EXPECT_DOUBLE_EQ(m.action_probability(View::login, click(kAlerts)), 1.0);
  EXPECT_DOUBLE_EQ(m.next_state_probability(View::login, click(kAlerts), View::signup), 1.0);
  EXPECT_EQ(m.sources, std::vector<std::string>{"x"});
}

TEST(Model, EmptyTraceListIsAnError) {
  try {
    build_frequency_model(std::vector<Trace>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::model);
  }
}

TEST(Model, PayloadIsNotPartOfKey) {
  Trace t{"s", {}};
  for (std::uint64_t i = 0; i < 3; ++i) {
    t.events.push_back(ActionEvent{"s", i, 0, View::composer,
                                   UiAction{parse_component_id("window[main]#0/panel[composer]#0/textfield[text]#0"),
                                            ActionKind::text_input, "p" + std::to_string(i)},
                                   View::composer});
  }
  FrequencyModel m = build_frequency_model(std::vector<Trace>{t});
  ASSERT_EQ(m.action_table.at(View::composer).size(), 1u);
  EXPECT_EQ(m.action_table.at(View::composer).begin()->second, 3u);
}

namespace {

Trace random_trace(Rng& rng, const std::string& session) {
  const std::vector<std::string> comps = {kLike0, kAlerts, "window[main]#0/panel[nav]#0/button[Feed]#0"};
  Trace t{session, {}};
  View v = View::feed;
  auto n = static_cast<std::size_t>(rng.uniform() * 40);
  for (std::size_t i = 0; i < n; ++i) {
    View next = kAllViews[static_cast<std::size_t>(rng.uniform() * kAllViews.size())];
    t.events.push_back(ev(i, v, comps[static_cast<std::size_t>(rng.uniform() * comps.size())], next));
    v = next;
  }
  return t;
}

}  // namespace

// Counting a concatenation equals adding the counts of the parts, and every
// non-empty row is a distribution.
TEST(ModelProperty, AdditiveAndNormalized) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Trace> parts{random_trace(rng, "a"), random_trace(rng, "b")};
    FrequencyModel whole = build_frequency_model(parts);
    FrequencyModel a = build_frequency_model(std::span(parts).first(1));
    FrequencyModel b = build_frequency_model(std::span(parts).last(1));
    for (const auto& [s, row] : whole.action_table) {
      double sum = 0.0;
      for (const auto& [k, c] : row) {
        std::uint64_t ca = a.actions_at(s) && a.actions_at(s)->count(k) ? a.actions_at(s)->at(k) : 0;
        std::uint64_t cb = b.actions_at(s) && b.actions_at(s)->count(k) ? b.actions_at(s)->at(k) : 0;
        EXPECT_EQ(c, ca + cb);
        sum += whole.action_probability(s, k);
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
    for (const auto& [sa, row] : whole.state_table) {
      double sum = 0.0;
      for (const auto& [next, c] : row) sum += whole.next_state_probability(sa.first, sa.second, next);
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(ModelFile, RoundTrip) {
  Rng rng(5);
  std::vector<Trace> traces{four_events(), random_trace(rng, "r")};
  FrequencyModel m = build_frequency_model(traces, "2026-01-01T00:00:00Z");
  EXPECT_EQ(model_from_json(to_json(m)), m);
  auto path = std::filesystem::temp_directory_path() / "synthuser_model_test.json";
  save_model(m, path);
  EXPECT_EQ(load_model(path), m);
  std::filesystem::remove(path);
}

TEST(ModelFile, RejectsMalformedDocuments) {
  FrequencyModel m = build_frequency_model(std::vector<Trace>{four_events()});
  json good = to_json(m);
  auto code = [](const json& j) {
    try {
      model_from_json(j);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::run;
  };
  json j = good;
  j["format"] = "other";
  EXPECT_EQ(code(j), ErrorCode::parse);
  j = good;
  j["action_table"][0]["state"] = "settings";
  EXPECT_EQ(code(j), ErrorCode::parse);
  j = good;
  j["action_table"][0]["component"] = "button#0";
  EXPECT_EQ(code(j), ErrorCode::parse);
  j = good;
  j["state_table"][0].erase("count");
  EXPECT_EQ(code(j), ErrorCode::parse);
  EXPECT_THROW(load_model("/nonexistent/model.json"), Error);
}
