#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "synthuser/client.hpp"
#include "synthuser/rng.hpp"
#include "synthuser/server.hpp"
#include "synthuser/tracker.hpp"

namespace synthuser {

// A scripted account that drives the target directly (not through a UI) to
// deliver `liked` alerts to another user: it follows the target once, then
// likes the target's newest tweet, un-liking first if needed so every call
// produces a fresh alert.
class Stimulus {
 public:
  explicit Stimulus(Backend& backend, std::string account = "stimulus")
      : backend_(backend), account_(std::move(account)) {}

  // Returns true when a new liked alert was generated. Nothing happens while
  // the target has no tweets.
  bool deliver_like(const std::string& target) {
    if (!ensure_login()) return false;
    if (!following_.count(target)) {
      if (!backend_.call(request::Follow{*token_, target}).ok()) return false;
      following_.insert(target);
    }
    // The stimulus follows only the target, so its newest feed entry is the target's.
    Response feed = backend_.call(request::GetFeed{*token_, 1});
    if (!feed.ok()) return false;
    for (const json& t : feed.body.at("tweets")) {
      if (t.at("author").get<std::string>() != target) continue;
      TweetId id = t.at("id").get<TweetId>();
      if (t.at("liked").get<bool>()) backend_.call(request::Unlike{*token_, id});
      return backend_.call(request::Like{*token_, id}).ok();
    }
    return false;
  }

  const std::string& account() const { return account_; }

 private:
  bool ensure_login() {
    if (token_) return true;
    const std::string password = "pw-" + account_;
    backend_.call(request::Signup{account_, password});
    Response login = backend_.call(request::Login{account_, password});
    if (!login.ok()) return false;
    token_ = login.body.at("token").get<std::string>();
    return true;
  }

  Backend& backend_;
  std::string account_;
  std::optional<std::string> token_;
  std::set<std::string> following_;
};

// Drives a tracked session the way a person would: in sub-flows (compose a
// post, like something in the feed, check alerts, ...) rather than isolated
// clicks. Used to produce realistic training and replay traces.
class ScriptedUser {
 public:
  struct Options {
    std::string username = "alice";
    bool allow_logout = true;
    // Relative weights of the sub-flows.
    double w_post = 3, w_like = 3, w_retweet = 1, w_inspect = 1, w_follow = 2, w_alerts = 3, w_mine = 1,
           w_logout = 0.5;
    // Follow clicks per visit to the users view.
    int follows_per_visit = 1;
    Stimulus* stimulus = nullptr;
    std::uint64_t stimulus_every = 3;  // actions between stimulus likes
  };

  ScriptedUser(TrackedSession& session, std::uint64_t seed, Options options)
      : session_(session), rng_(seed), opt_(std::move(options)) {}

  // Performs actions until the session has recorded `events` of them (counted
  // from the call). The first sub-flow signs up and logs in when the session
  // starts logged out.
  void record(std::uint64_t events) {
    budget_ = events;
    try {
      while (budget_ > 0) step_flow();
    } catch (const Exhausted&) {
    }
  }

 private:
  struct Exhausted {};

  const ViewState& state() const { return session_.state(); }

  // Finds the available action whose last segment matches.
  std::optional<ActionTemplate> find(const std::string& label, std::uint32_t index = 0) const {
    for (auto& t : session_.available()) {
      const Segment& last = t.component.path.back();
      if (last.label == label && last.index == index) return t;
    }
    return std::nullopt;
  }

  void act(const ActionTemplate& t, std::optional<std::string> payload = {}) {
    if (budget_ == 0) throw Exhausted{};
    session_.perform(UiAction{t.component, t.kind, std::move(payload)});
    --budget_;
    ++actions_;
    session_.poll_alerts();
    // Same schedule as the play loop's stimulus: before every k-th action.
    if (opt_.stimulus && opt_.stimulus_every > 0 && actions_ % opt_.stimulus_every == 0 && state().username) {
      opt_.stimulus->deliver_like(*state().username);
    }
  }

  bool click(const std::string& label, std::uint32_t index = 0) {
    auto t = find(label, index);
    if (!t) return false;
    act(*t);
    return true;
  }

  void type(const std::string& field, const std::string& text) {
    auto t = find(field);
    if (t) act(*t, text);
  }

  std::uint32_t pick(std::size_t n) {
    auto i = static_cast<std::uint32_t>(rng_.uniform() * static_cast<double>(n));
    return i >= n ? static_cast<std::uint32_t>(n - 1) : i;
  }

  void ensure_feed() {
    if (state().view != View::feed) click("Feed");
  }

  void step_flow() {
    if (!state().authenticated()) {
      if (!registered_) {
        click("Sign up");
        type("username", opt_.username);
        type("password", "pw-" + opt_.username);
        click("Create account");
        registered_ = true;
      }
      type("username", opt_.username);
      type("password", "pw-" + opt_.username);
      click("Login");
      if (!state().authenticated()) throw Exhausted{};  // cannot proceed
      return;
    }
    const std::vector<double> weights = {opt_.w_post,   opt_.w_like,  opt_.w_retweet, opt_.w_inspect,
                                         opt_.w_follow, opt_.w_alerts, opt_.w_mine,   opt_.allow_logout ? opt_.w_logout : 0};
    double total = 0;
    for (double w : weights) total += w;
    double u = rng_.uniform() * total;
    std::size_t flow = 0;
    for (; flow + 1 < weights.size(); ++flow) {
      if (u < weights[flow]) break;
      u -= weights[flow];
    }
    switch (flow) {
      case 0:  // post
        click("Compose");
        type("text", "thought " + std::to_string(++posts_));
        if (rng_.uniform() < 0.3) type("media", "img-" + std::to_string(posts_));
        click("Post");
        break;
      case 1:  // like
        ensure_feed();
        if (!state().tweets.empty()) click("Like", pick(state().tweets.size()));
        break;
      case 2:  // retweet
        ensure_feed();
        if (!state().tweets.empty()) {
          click("Retweet", pick(state().tweets.size()));
          type("text", "rt " + std::to_string(++posts_));
          click("Post");
        }
        break;
      case 3:  // inspect likes
        ensure_feed();
        if (!state().tweets.empty()) {
          click("Likes", pick(state().tweets.size()));
          click("Back");
        }
        break;
      case 4:  // follow
        click("Users");
        for (int i = 0; i < opt_.follows_per_visit && !state().users.empty(); ++i) {
          click("Follow", pick(state().users.size()));
        }
        break;
      case 5:  // alerts
        click("Alerts");
        if (!click("liked")) click("followed");
        break;
      case 6:  // own tweets
        ensure_feed();
        click("Mine");
        click("All");
        break;
      default:  // log out and back in
        click("Logout");
        type("username", opt_.username);
        type("password", "pw-" + opt_.username);
        click("Login");
        break;
    }
  }

  TrackedSession& session_;
  Rng rng_;
  Options opt_;
  std::uint64_t budget_ = 0;
  std::uint64_t actions_ = 0;
  std::uint64_t posts_ = 0;
  bool registered_ = false;
};

}  // namespace synthuser
