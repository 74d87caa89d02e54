#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "synthuser/rng.hpp"
#include "synthuser/tracker.hpp"

using namespace synthuser;

namespace {

const std::string kRoot = "window[main]#0";

ComponentId id(const std::string& rel) { return parse_component_id(kRoot + "/" + rel); }

std::vector<Trace> load(const std::string& text) {
  std::istringstream in(text);
  return load_trace(in);
}

// Logs `name` in on a server where a second user has posted one tweet that
// `name` follows.
struct World {
  Server server{3, FaultConfig{}};
  std::ostringstream out;
  TraceLog log{out};
  VirtualClock clock{5000, 10};

  World() {
    server.call(request::Signup{"other", "pw"});
    server.call(request::Signup{"me", "pw"});
    std::string other = server.call(request::Login{"other", "pw"}).body.at("token");
    server.call(request::PostTweet{other, "hi", std::nullopt});
  }

  void login(TrackedSession& s) {
    s.trigger(id("panel[login]#0/textfield[username]#0"), ActionKind::text_input, "me");
    s.trigger(id("panel[login]#0/textfield[password]#0"), ActionKind::text_input, "pw");
    s.trigger(id("panel[login]#0/button[Login]#0"), ActionKind::click);
    s.trigger(id("panel[nav]#0/button[Users]#0"), ActionKind::click);
    s.trigger(id("panel[users]#0/button[Follow]#0"), ActionKind::click);
    s.trigger(id("panel[nav]#0/button[Feed]#0"), ActionKind::click);
  }
};

}  // namespace

TEST(Tracker, RecordsLikeOnFeed) {
  World w;
  TrackedSession s = wrap("s1", w.server, {}, w.log, w.clock.as_clock());
  w.login(s);
  s.trigger(id("panel[feed]#0/button[Like]#0"), ActionKind::click);
  auto traces = load(w.out.str());
  ASSERT_EQ(traces.size(), 1u);
  const ActionEvent& last = traces[0].events.back();
  EXPECT_EQ(last.session, "s1");
  EXPECT_EQ(last.state_before, View::feed);
  EXPECT_EQ(last.state_after, View::feed);
  EXPECT_EQ(encode_component_id(last.action.component), kRoot + "/panel[feed]#0/button[Like]#0");
  EXPECT_EQ(last.action.kind, ActionKind::click);
}

TEST(Tracker, AssignsConsecutiveSeqAndMonotoneTime) {
  World w;
  TrackedSession s = wrap("s1", w.server, {}, w.log, w.clock.as_clock());
  w.login(s);
  auto events = load(w.out.str()).at(0).events;
  ASSERT_EQ(events.size(), 6u);
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(events[i].seq, i);
    if (i) EXPECT_LE(events[i - 1].ts_ms, events[i].ts_ms);
  }
  EXPECT_EQ(events[2].state_before, View::login);
  EXPECT_EQ(events[2].state_after, View::feed);
  EXPECT_EQ(events[0].action.payload, "me");
}

TEST(Tracker, UnavailableTriggerRecordsNothing) {
  World w;
  TrackedSession s = wrap("s1", w.server, {}, w.log, w.clock.as_clock());
  std::string before = w.out.str();
  try {
    s.trigger(id("panel[alerts]#0/button[liked]#0"), ActionKind::click);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unavailable_action);
  }
  EXPECT_EQ(w.out.str(), before);
  EXPECT_EQ(s.next_seq(), 0u);
}

TEST(Tracker, StaleIdAfterNavigationIsUnavailable) {
  World w;
  TrackedSession s = wrap("s1", w.server, {}, w.log, w.clock.as_clock());
  w.login(s);
  s.trigger(id("panel[nav]#0/button[Alerts]#0"), ActionKind::click);
  EXPECT_THROW(s.trigger(id("panel[feed]#0/button[Like]#0"), ActionKind::click), Error);
}

TEST(Tracker, TriggerChecksKindAndPayload) {
  World w;
  TrackedSession s = wrap("s1", w.server, {}, w.log, w.clock.as_clock());
  try {
    s.trigger(id("panel[login]#0/textfield[username]#0"), ActionKind::text_input);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_kind);
  }
  try {
    s.trigger(id("panel[login]#0/link[Sign up]#0"), ActionKind::text_input, "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_kind);
  }
  EXPECT_EQ(s.recorded(), 0u);
}

TEST(Tracker, ActiveIdsAreRootedAndMatchAvailable) {
  World w;
  TrackedSession s = wrap("s1", w.server, {}, w.log, w.clock.as_clock());
  w.login(s);
  auto ids = s.active_ids();
  auto actions = s.available();
  ASSERT_EQ(ids.size(), actions.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    EXPECT_TRUE(ids[i].has_prefix(window_root()));
    EXPECT_EQ(ids[i], actions[i].component);
  }
}

// A failed login still completes a UI action, so the tracker records it as
// a login -> login self-transition.
TEST(Tracker, FailedLoginIsRecordedAsSelfTransition) {
  World w;
  TrackedSession s = wrap("s1", w.server, {}, w.log, w.clock.as_clock());
  s.trigger(id("panel[login]#0/textfield[username]#0"), ActionKind::text_input, "me");
  s.trigger(id("panel[login]#0/textfield[password]#0"), ActionKind::text_input, "wrong");
  s.trigger(id("panel[login]#0/button[Login]#0"), ActionKind::click);
  EXPECT_TRUE(s.state().last_error);
  auto e = load(w.out.str()).at(0).events.back();
  EXPECT_EQ(e.state_before, View::login);
  EXPECT_EQ(e.state_after, View::login);
}

TEST(Tracker, ResumesSeqFromLog) {
  World w;
  {
    TrackedSession s = wrap("s1", w.server, {}, w.log, w.clock.as_clock());
    s.trigger(id("panel[login]#0/link[Sign up]#0"), ActionKind::click);
  }
  TrackedSession again = wrap("s1", w.server, {}, w.log, w.clock.as_clock());
  EXPECT_EQ(again.next_seq(), 1u);
  TrackedSession other = wrap("s2", w.server, {}, w.log, w.clock.as_clock());
  EXPECT_EQ(other.next_seq(), 0u);
}

TEST(Tracker, LogFailureIsReportedAfterCommit) {
  World w;
  ActionEvent clash;
  clash.session = "s1";
  clash.seq = 0;
  clash.action.component = id("panel[login]#0/link[Sign up]#0");
  w.log.append(clash);
  // A session that ignores the log's counters collides on seq 0.
  TrackedSession s("s1", w.server, {}, &w.log, w.clock.as_clock());
  try {
    s.trigger(id("panel[login]#0/link[Sign up]#0"), ActionKind::click);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::tracking);
  }
  EXPECT_EQ(s.observe(), View::signup);
}

namespace {

// Runs a seeded random walk and returns the final client state.
ViewState walk(std::uint64_t seed, TraceLog* log, std::vector<UiAction>* performed = nullptr) {
  Server server(seed, FaultConfig{});
  seed_population(server, 2);
  VirtualClock clock(0);
  TrackedSession s("w", server, {}, log, clock.as_clock());
  Rng rng(seed);
  for (int i = 0; i < 150; ++i) {
    auto actions = s.available();
    const auto& t = actions[static_cast<std::size_t>(rng.uniform() * static_cast<double>(actions.size()))];
    UiAction a{t.component, t.kind, std::nullopt};
    if (t.kind == ActionKind::text_input) {
      const std::string& field = *t.component.path.back().label;
      a.payload = field == "username" ? "user-" + std::to_string(i % 2) : field == "password" ? "pw" : "t";
    }
    s.perform(a);
    if (performed) performed->push_back(a);
    s.poll_alerts();
  }
  return s.state();
}

}  // namespace

TEST(TrackerProperty, TrackingIsTransparent) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    std::ostringstream out;
    TraceLog log(out);
    EXPECT_EQ(walk(seed, &log), walk(seed, nullptr)) << seed;
  }
}

TEST(TrackerProperty, EveryPerformedActionIsRecordedOnce) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    std::ostringstream out;
    TraceLog log(out);
    std::vector<UiAction> performed;
    walk(seed, &log, &performed);
    auto events = load(out.str()).at(0).events;
    ASSERT_EQ(events.size(), performed.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
      EXPECT_EQ(events[i].action, performed[i]);
      EXPECT_EQ(events[i].seq, i);
      if (i) EXPECT_EQ(events[i].state_before, events[i - 1].state_after);
    }
  }
}

TEST(ActionReporter, AssignsSeqPerSession) {
  std::ostringstream out;
  TraceLog log(out);
  VirtualClock clock(100);
  {
    ActionReporter r(log, clock.as_clock());
    UiAction a{id("panel[login]#0/link[Sign up]#0"), ActionKind::click, {}};
    EXPECT_EQ(r.report("a", View::login, a, View::signup), 0u);
    EXPECT_EQ(r.report("a", View::signup, a, View::signup), 1u);
    EXPECT_EQ(r.report("b", View::login, a, View::signup), 0u);
    EXPECT_THROW(r.report("a", View::login, UiAction{id("x#0"), ActionKind::text_input, {}}, View::login), Error);
    r.flush();
    EXPECT_EQ(r.dropped(), 0u);
  }
  auto traces = load(out.str());
  ASSERT_EQ(traces.size(), 2u);
  EXPECT_EQ(traces[0].events.size(), 2u);

  ActionReporter resumed(log, clock.as_clock());
  EXPECT_EQ(resumed.report("a", View::login, UiAction{id("panel[login]#0/link[Sign up]#0"), ActionKind::click, {}},
                           View::signup),
            2u);
}

TEST(ActionReporter, ConcurrentReportsKeepPerSessionOrder) {
  std::ostringstream out;
  TraceLog log(out);
  {
    ActionReporter r(log, wall_clock());
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&r, t] {
        UiAction a{id("panel[login]#0/link[Sign up]#0"), ActionKind::click, {}};
        for (int i = 0; i < 50; ++i) r.report("s" + std::to_string(t), View::login, a, View::signup);
      });
    }
    for (auto& th : threads) th.join();
    r.flush();
  }
  auto traces = load(out.str());
  ASSERT_EQ(traces.size(), 4u);
  for (const auto& t : traces) EXPECT_EQ(t.events.size(), 50u);
}

TEST(VirtualClock, AdvancesFixedStep) {
  VirtualClock c(10, 5);
  Clock f = c.as_clock();
  EXPECT_EQ(f(), 10);
  EXPECT_EQ(f(), 15);
  EXPECT_EQ(c.tick(), 20);
}
