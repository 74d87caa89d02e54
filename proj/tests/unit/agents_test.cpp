#include <gtest/gtest.h>

#include <memory>
#include <vector>

#include "synthuser/agents.hpp"

using namespace synthuser;

namespace {

const std::string kLike0 = "window[main]#0/panel[feed]#0/button[Like]#0";
const std::string kAlerts = "window[main]#0/panel[nav]#0/button[Alerts]#0";
const std::string kFeed = "window[main]#0/panel[nav]#0/button[Feed]#0";

ActionTemplate tmpl(const std::string& c, ActionKind k = ActionKind::click) {
  return ActionTemplate{parse_component_id(c), k, c};
}

UiAction click(const std::string& c) { return UiAction{parse_component_id(c), ActionKind::click, std::nullopt}; }

ActionKey key(const std::string& c) { return ActionKey{c, ActionKind::click}; }

std::shared_ptr<FrequencyModel> like_alerts_model() {
  auto m = std::make_shared<FrequencyModel>();
  m->action_table[View::feed][key(kLike0)] = 2;
  m->action_table[View::feed][key(kAlerts)] = 1;
  m->state_table[{View::feed, key(kLike0)}][View::feed] = 2;
  m->state_table[{View::feed, key(kAlerts)}][View::alerts] = 1;
  return m;
}

// A seed whose first uniform draw lies in [lo, hi).
std::uint64_t seed_with_first_draw(double lo, double hi) {
  for (std::uint64_t s = 0;; ++s) {
    double u = Rng(s).uniform();
    if (u >= lo && u < hi) return s;
  }
}

}  // namespace

TEST(FrequencyAgent, SelectsByCumulativeWalk) {
  FrequencyAgent agent(like_alerts_model(), "p");
  std::vector<ActionTemplate> avail{tmpl(kAlerts), tmpl(kLike0), tmpl(kFeed)};
  Rng mid(seed_with_first_draw(0.49, 0.51));
  auto sel = agent.select_action(View::feed, avail, mid);
  EXPECT_EQ(sel.action, click(kLike0));
  EXPECT_FALSE(sel.off_model);
  Rng high(seed_with_first_draw(0.7, 0.72));
  EXPECT_EQ(agent.select_action(View::feed, avail, high).action, click(kAlerts));
}

// Independent oracle: same draw, manual walk over the sorted keys.
TEST(FrequencyAgent, MatchesManualWalkForManyDraws) {
  FrequencyAgent agent(like_alerts_model(), "p");
  std::vector<ActionTemplate> avail{tmpl(kFeed), tmpl(kAlerts), tmpl(kLike0)};
  for (std::uint64_t s = 0; s < 500; ++s) {
    Rng rng(s), copy(s);
    double u = copy.uniform();
    auto expected = u < 2.0 / 3.0 ? kLike0 : kAlerts;
    ASSERT_EQ(agent.select_action(View::feed, avail, rng).action, click(expected)) << s;
    ASSERT_EQ(rng.next(), copy.next()) << "exactly one draw per selection";
  }
}

TEST(FrequencyAgent, UnseenStateFallsBackUniformly) {
  FrequencyAgent agent(like_alerts_model(), "p");
  std::vector<ActionTemplate> avail{tmpl(kFeed), tmpl(kAlerts)};
  Rng rng(seed_with_first_draw(0.75, 0.8));
  auto sel = agent.select_action(View::users, avail, rng);
  EXPECT_TRUE(sel.off_model);
  EXPECT_EQ(sel.action, click(kFeed));  // sorted: Alerts, Feed
}

TEST(FrequencyAgent, RowOutsideAvailableFallsBack) {
  FrequencyAgent agent(like_alerts_model(), "p");
  std::vector<ActionTemplate> avail{tmpl(kFeed)};
  Rng rng(1);
  EXPECT_TRUE(agent.select_action(View::feed, avail, rng).off_model);
}

TEST(FrequencyAgent, VerdictExamples) {
  auto m = like_alerts_model();
  m->state_table[{View::alerts, key(kLike0)}] = {{View::feed, 4}, {View::alerts, 1}};
  FrequencyAgent agent(m, "p");

  Verdict v = agent.assert_transition(View::feed, click(kAlerts), View::feed);
  EXPECT_EQ(v.status, VerdictStatus::violation);
  EXPECT_EQ(v.surprise, 1.0);
  EXPECT_EQ(v.expected_mode(), View::alerts);
  EXPECT_EQ(v.observed, View::feed);

  v = agent.assert_transition(View::feed, click(kLike0), View::feed);
  EXPECT_EQ(v.status, VerdictStatus::ok);
  EXPECT_EQ(v.surprise, 0.0);

  v = agent.assert_transition(View::alerts, click(kLike0), View::alerts);
  EXPECT_EQ(v.status, VerdictStatus::ok);
  EXPECT_NEAR(v.surprise, 0.8, 1e-12);
  EXPECT_EQ(v.expected_mode(), View::feed);

  v = agent.assert_transition(View::users, click(kFeed), View::feed);
  EXPECT_EQ(v.status, VerdictStatus::off_model);
  EXPECT_EQ(v.surprise, 1.0);
}

// The expected mode depends on ratios only.
TEST(FrequencyAgentProperty, ModeStableUnderCountScaling) {
  for (std::uint64_t k = 1; k <= 50; ++k) {
    auto m = std::make_shared<FrequencyModel>();
    m->state_table[{View::alerts, key(kLike0)}] = {{View::feed, 3 * k}, {View::alerts, 2 * k}, {View::users, k}};
    FrequencyAgent agent(m, "p");
    Verdict v = agent.assert_transition(View::alerts, click(kLike0), View::alerts);
    EXPECT_EQ(v.expected_mode(), View::feed);
    EXPECT_NEAR(v.surprise, 2.0 / 3.0, 1e-12);
  }
}

TEST(FrequencyAgent, RequiresModelAndActions) {
  EXPECT_THROW(FrequencyAgent(nullptr, "p"), Error);
  FrequencyAgent agent(like_alerts_model(), "p");
  Rng rng(1);
  try {
    agent.select_action(View::feed, {}, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dead_end);
  }
}

TEST(RandomAgent, FloorsDrawOverSortedTemplates) {
  RandomAgent agent("p");
  const std::string a = "window[main]#0/button[a]#0", b = "window[main]#0/button[b]#0";
  std::vector<ActionTemplate> avail{tmpl(b), tmpl(a)};
  Rng rng(seed_with_first_draw(0.75, 0.76));
  EXPECT_EQ(agent.select_action(View::feed, avail, rng).action, click(b));
  Rng low(seed_with_first_draw(0.1, 0.2));
  EXPECT_EQ(agent.select_action(View::feed, avail, low).action, click(a));
  Verdict v = agent.assert_transition(View::feed, click(a), View::alerts);
  EXPECT_EQ(v.status, VerdictStatus::ok);
  EXPECT_TRUE(v.expected.empty());
}

TEST(RandomAgent, IsRoughlyUniform) {
  RandomAgent agent("p");
  std::vector<ActionTemplate> avail{tmpl(kLike0), tmpl(kAlerts), tmpl(kFeed)};
  Rng rng(3);
  std::map<std::string, int> hits;
  for (int i = 0; i < 9000; ++i) hits[encode_component_id(agent.select_action(View::feed, avail, rng).action.component)]++;
  for (const auto& [k, n] : hits) EXPECT_NEAR(n / 9000.0, 1.0 / 3.0, 0.02) << k;
}

TEST(ReplayAgent, FollowsTraceAndDetectsDivergence) {
  Trace t{"s",
          {ActionEvent{"s", 0, 0, View::feed, click(kAlerts), View::alerts},
           ActionEvent{"s", 1, 1, View::alerts, click(kFeed), View::feed}}};
  ReplayAgent agent(t, "p");
  Rng rng(1);
  std::vector<ActionTemplate> avail{tmpl(kAlerts), tmpl(kFeed)};
  EXPECT_EQ(agent.select_action(View::feed, avail, rng).action, click(kAlerts));
  Verdict v = agent.assert_transition(View::feed, click(kAlerts), View::alerts);
  EXPECT_EQ(v.status, VerdictStatus::ok);
  EXPECT_EQ(v.surprise, 0.0);

  std::vector<ActionTemplate> without{tmpl(kAlerts)};
  try {
    agent.select_action(View::alerts, without, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::divergence);
    EXPECT_NE(std::string(e.what()).find("seq 1"), std::string::npos);
  }
  EXPECT_EQ(agent.cursor(), 1u);
  agent.select_action(View::alerts, avail, rng);
  v = agent.assert_transition(View::alerts, click(kFeed), View::users);
  EXPECT_EQ(v.status, VerdictStatus::violation);
  EXPECT_EQ(v.expected_mode(), View::feed);
  EXPECT_TRUE(agent.finished());
  EXPECT_THROW(agent.select_action(View::feed, avail, rng), Error);
}

TEST(Persona, FillsFieldsAndTracksAccounts) {
  Persona p("agent-0");
  auto field = [](const std::string& label) {
    return parse_component_id("window[main]#0/panel[x]#0/textfield[" + label + "]#0");
  };
  EXPECT_EQ(p.payload(View::signup, field("username")), "agent-0");
  EXPECT_EQ(p.payload(View::login, field("password")), "pw-agent-0");
  EXPECT_EQ(p.payload(View::composer, field("text")), "post 1 by agent-0");
  UiAction submit{parse_component_id("window[main]#0/panel[signup]#0/button[Create account]#0"), ActionKind::click, {}};
  UiAction back{parse_component_id("window[main]#0/panel[signup]#0/link[Back to login]#0"), ActionKind::click, {}};
  ViewState created;
  created.view = View::login;
  p.observe(View::signup, back, created);
  EXPECT_EQ(p.signup_candidate(), "agent-0");
  p.observe(View::signup, submit, created);
  EXPECT_EQ(p.account(), "agent-0");
  EXPECT_EQ(p.payload(View::signup, field("username")), "agent-0.1");
  ViewState failed = created;
  failed.last_error = ServerError{status::conflict, "taken"};
  p.observe(View::signup, submit, failed);
  EXPECT_EQ(p.signup_candidate(), "agent-0.1");
}

TEST(AgentKind, NamesRoundTrip) {
  for (AgentKind k : {AgentKind::replay, AgentKind::random, AgentKind::frequency}) {
    EXPECT_EQ(agent_kind_from_string(to_string(k)), k);
  }
  EXPECT_FALSE(agent_kind_from_string("human"));
}
