#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "synthuser/component_id.hpp"
#include "synthuser/error.hpp"
#include "synthuser/server.hpp"
#include "synthuser/trace.hpp"
#include "synthuser/view.hpp"

namespace synthuser {

// Lists (feed, alerts) show at most this many rows, newest first.
inline constexpr std::size_t kListLimit = 20;

struct ServerError {
  int code = 0;
  std::string message;

  bool internal() const { return code >= 500; }
  bool operator==(const ServerError&) const = default;
};

struct TweetRow {
  TweetId id = 0;
  std::string author;
  std::string text;
  std::optional<std::string> media;
  std::optional<TweetId> parent;
  std::uint64_t likes = 0;
  bool liked = false;

  bool operator==(const TweetRow&) const = default;
};

struct UserRow {
  std::string username;
  bool following = false;
  bool follows_you = false;

  bool operator==(const UserRow&) const = default;
};

struct AlertRow {
  AlertKind kind = AlertKind::liked;
  std::string actor;
  std::optional<TweetId> subject;
  std::uint64_t ts = 0;

  bool operator==(const AlertRow&) const = default;
};

// Everything the client shows for one session. The widget tree and the
// component ids are derived from it (see widget_tree()).
struct ViewState {
  View view = View::login;
  std::optional<std::string> token;
  std::optional<std::string> username;

  std::vector<TweetRow> tweets;  // feed view
  bool show_mine = false;
  std::vector<UserRow> users;    // users view
  std::vector<AlertRow> alerts;  // alerts view
  std::optional<TweetId> inspected;  // who_liked view
  std::vector<std::string> likers;
  std::vector<TweetRow> retweets;
  std::optional<TweetId> retweet_of;  // composer in retweet mode

  std::map<std::string, std::string> form;  // text typed into the current view's fields
  std::uint64_t alert_count_seen = 0;       // alerts delivered to this login session
  std::optional<ServerError> last_error;

  bool authenticated() const { return token.has_value(); }
  bool operator==(const ViewState&) const = default;
};

// ---------------------------------------------------------------------------
// Widget tree

enum class Command {
  type_field,
  open_signup,
  open_login,
  submit_signup,
  submit_login,
  nav_feed,
  nav_users,
  nav_alerts,
  nav_compose,
  logout,
  feed_all,
  feed_mine,
  toggle_like,
  retweet,
  open_likes,
  toggle_follow,
  open_alert,
  back,
  post,
  cancel,
};

struct Binding {
  Command command = Command::nav_feed;
  std::string field;  // type_field
  TweetId tweet = 0;
  std::string user;
  std::size_t alert = 0;
};

inline Binding on(Command c) { return Binding{c, {}, 0, {}, 0}; }
inline Binding on_field(const std::string& field) { return Binding{Command::type_field, field, 0, {}, 0}; }
inline Binding on_tweet(Command c, TweetId id) { return Binding{c, {}, id, {}, 0}; }
inline Binding on_user(const std::string& user) { return Binding{Command::toggle_follow, {}, 0, user, 0}; }
inline Binding on_alert(std::size_t index) { return Binding{Command::open_alert, {}, 0, {}, index}; }

struct Widget {
  std::string kind;
  std::optional<std::string> label;
  std::optional<ActionKind> action;  // absent for containers
  Binding binding;
  std::vector<Widget> children;
};

namespace detail {

inline Widget container(std::string kind, std::string label) {
  return Widget{std::move(kind), std::move(label), std::nullopt, on(Command::nav_feed), {}};
}

inline Widget button(std::string label, Binding b) {
  return Widget{"button", std::move(label), ActionKind::click, std::move(b), {}};
}

inline Widget link(std::string label, Binding b) {
  return Widget{"link", std::move(label), ActionKind::click, std::move(b), {}};
}

inline Widget textfield(const std::string& field) {
  return Widget{"textfield", field, ActionKind::text_input, on_field(field), {}};
}

inline bool filled(const ViewState& v, const std::string& field) {
  auto it = v.form.find(field);
  return it != v.form.end() && !it->second.empty();
}

inline Widget nav_panel() {
  Widget nav = container("panel", "nav");
  nav.children.push_back(button("Feed", on(Command::nav_feed)));
  nav.children.push_back(button("Users", on(Command::nav_users)));
  nav.children.push_back(button("Alerts", on(Command::nav_alerts)));
  nav.children.push_back(button("Compose", on(Command::nav_compose)));
  nav.children.push_back(button("Logout", on(Command::logout)));
  return nav;
}

}  // namespace detail

// Builds the component tree for the current view. Submit buttons are only
// present while their required fields hold text (disabled otherwise).
inline Widget widget_tree(const ViewState& v) {
  using namespace detail;
  Widget root = container("window", "main");
  switch (v.view) {
    case View::login: {
      Widget panel = container("panel", "login");
      panel.children.push_back(textfield("username"));
      panel.children.push_back(textfield("password"));
      if (filled(v, "username") && filled(v, "password")) panel.children.push_back(button("Login", on(Command::submit_login)));
      panel.children.push_back(link("Sign up", on(Command::open_signup)));
      root.children.push_back(std::move(panel));
      return root;
    }
    case View::signup: {
      Widget panel = container("panel", "signup");
      panel.children.push_back(textfield("username"));
      panel.children.push_back(textfield("password"));
      if (filled(v, "username") && filled(v, "password")) {
        panel.children.push_back(button("Create account", on(Command::submit_signup)));
      }
      panel.children.push_back(link("Back to login", on(Command::open_login)));
      root.children.push_back(std::move(panel));
      return root;
    }
    default:
      break;
  }

  root.children.push_back(nav_panel());
  switch (v.view) {
    case View::feed: {
      Widget panel = container("panel", "feed");
      panel.children.push_back(button("All", on(Command::feed_all)));
      panel.children.push_back(button("Mine", on(Command::feed_mine)));
      for (const TweetRow& t : v.tweets) {
        panel.children.push_back(button("Like", on_tweet(Command::toggle_like, t.id)));
        panel.children.push_back(button("Retweet", on_tweet(Command::retweet, t.id)));
        panel.children.push_back(button("Likes", on_tweet(Command::open_likes, t.id)));
      }
      root.children.push_back(std::move(panel));
      break;
    }
    case View::users: {
      Widget panel = container("panel", "users");
      for (const UserRow& u : v.users) panel.children.push_back(button("Follow", on_user(u.username)));
      root.children.push_back(std::move(panel));
      break;
    }
    case View::alerts: {
      Widget panel = container("panel", "alerts");
      for (std::size_t i = 0; i < v.alerts.size(); ++i) {
        panel.children.push_back(button(std::string(to_string(v.alerts[i].kind)), on_alert(i)));
      }
      root.children.push_back(std::move(panel));
      break;
    }
    case View::composer: {
      Widget panel = container("panel", "composer");
      panel.children.push_back(textfield("text"));
      panel.children.push_back(textfield("media"));
      if (v.retweet_of || filled(v, "text")) panel.children.push_back(button("Post", on(Command::post)));
      panel.children.push_back(button("Cancel", on(Command::cancel)));
      root.children.push_back(std::move(panel));
      break;
    }
    case View::who_liked: {
      Widget panel = container("panel", "who_liked");
      panel.children.push_back(button("Back", on(Command::back)));
      root.children.push_back(std::move(panel));
      break;
    }
    default:
      break;
  }
  return root;
}

// An action the current view offers: which component, which event kind.
struct ActionTemplate {
  ComponentId component;
  ActionKind kind = ActionKind::click;
  std::string key;  // encoded component id

  bool operator==(const ActionTemplate& o) const { return key == o.key && kind == o.kind; }
};

// Lexicographic by encoded id, then kind. All sampling walks this order.
inline bool template_less(const ActionTemplate& a, const ActionTemplate& b) {
  if (a.key != b.key) return a.key < b.key;
  return a.kind < b.kind;
}

struct BoundAction {
  ActionTemplate action;
  Binding binding;
};

namespace detail {

inline void collect(const Widget& w, ComponentId& path, std::vector<BoundAction>& out) {
  if (w.action) {
    out.push_back(BoundAction{ActionTemplate{path, *w.action, encode_component_id(path)}, w.binding});
  }
  std::map<std::pair<std::string, std::optional<std::string>>, std::uint32_t> counters;
  for (const Widget& child : w.children) {
    std::uint32_t index = counters[{child.kind, child.label}]++;
    path.path.push_back(Segment{child.kind, child.label, index});
    collect(child, path, out);
    path.path.pop_back();
  }
}

}  // namespace detail

inline std::vector<BoundAction> bound_actions(const ViewState& v) {
  Widget root = widget_tree(v);
  ComponentId path{{Segment{root.kind, root.label, 0}}};
  std::vector<BoundAction> out;
  detail::collect(root, path, out);
  std::sort(out.begin(), out.end(),
            [](const BoundAction& a, const BoundAction& b) { return template_less(a.action, b.action); });
  return out;
}

inline std::vector<ActionTemplate> available_actions(const ViewState& v) {
  std::vector<ActionTemplate> out;
  for (auto& b : bound_actions(v)) out.push_back(std::move(b.action));
  return out;
}

inline ComponentId window_root() { return ComponentId{{Segment{"window", "main", 0}}}; }

inline View observe_state(const ViewState& v) { return v.view; }

// ---------------------------------------------------------------------------
// Performing actions

namespace detail {

inline TweetRow tweet_row(const json& j) {
  TweetRow t;
  t.id = j.at("id").get<TweetId>();
  t.author = j.at("author").get<std::string>();
  t.text = j.at("text").get<std::string>();
  if (j.contains("media") && !j.at("media").is_null()) t.media = j.at("media").get<std::string>();
  if (j.contains("parent") && !j.at("parent").is_null()) t.parent = j.at("parent").get<TweetId>();
  t.likes = j.value("likes", std::uint64_t{0});
  t.liked = j.value("liked", false);
  return t;
}

inline AlertRow alert_row(const json& j) {
  AlertRow a;
  a.kind = j.at("kind").get<std::string>() == "liked" ? AlertKind::liked : AlertKind::followed;
  a.actor = j.at("actor").get<std::string>();
  if (j.contains("subject") && !j.at("subject").is_null()) a.subject = j.at("subject").get<TweetId>();
  a.ts = j.value("ts", std::uint64_t{0});
  return a;
}

// Raised internally when a server call fails; perform() converts it into the
// last_error slot of the unchanged view.
struct RequestFailed {
  ServerError error;
};

class Client {
 public:
  Client(ViewState& v, Backend& backend) : v_(v), backend_(backend) {}

  json call(const Request& r) {
    Response resp = backend_.call(r);
    if (!resp.ok()) throw RequestFailed{ServerError{resp.code, resp.message()}};
    return resp.body;
  }

  const std::string& token() const { return *v_.token; }

  // Leaves `view` with all view-specific context cleared.
  void enter(View view) {
    v_.view = view;
    v_.tweets.clear();
    v_.show_mine = false;
    v_.users.clear();
    v_.alerts.clear();
    v_.inspected.reset();
    v_.likers.clear();
    v_.retweets.clear();
    v_.retweet_of.reset();
    v_.form.clear();
  }

  void load_feed(bool mine) {
    json body = mine ? call(request::GetMyTweets{token(), kListLimit}) : call(request::GetFeed{token(), kListLimit});
    enter(View::feed);
    v_.show_mine = mine;
    for (const json& t : body.at("tweets")) {
      if (v_.tweets.size() == kListLimit) break;
      v_.tweets.push_back(tweet_row(t));
    }
  }

  void load_users() {
    json body = call(request::ListUsers{token()});
    enter(View::users);
    for (const json& u : body.at("users")) {
      v_.users.push_back(UserRow{u.at("username").get<std::string>(), u.at("following").get<bool>(),
                                 u.at("follows_you").get<bool>()});
    }
  }

  std::vector<AlertRow> fetch_alerts() {
    json body = call(request::GetAlerts{token(), kListLimit});
    std::vector<AlertRow> all;
    for (const json& a : body.at("alerts")) all.push_back(alert_row(a));
    v_.alert_count_seen = std::max<std::uint64_t>(v_.alert_count_seen, body.value("total", all.size()));
    std::vector<AlertRow> shown;
    for (auto it = all.rbegin(); it != all.rend() && shown.size() < kListLimit; ++it) shown.push_back(*it);
    return shown;
  }

  void load_alerts() {
    auto shown = fetch_alerts();
    enter(View::alerts);
    v_.alerts = std::move(shown);
  }

  void load_likes(TweetId id) {
    json likers = call(request::WhoLiked{token(), id});
    json retweets = call(request::GetRetweetsOf{token(), id});
    enter(View::who_liked);
    v_.inspected = id;
    for (const json& u : likers.at("users")) v_.likers.push_back(u.get<std::string>());
    for (const json& t : retweets.at("tweets")) v_.retweets.push_back(tweet_row(t));
  }

 private:
  ViewState& v_;
  Backend& backend_;
};

}  // namespace detail

// Executes one UI action: issues the mapped server request(s) and moves to
// the next view per the navigation table. A failed server call leaves the
// view unchanged and sets last_error.
inline ViewState perform(const ViewState& v, const UiAction& a, Backend& backend, const FaultConfig& faults) {
  const std::string key = encode_component_id(a.component);
  std::vector<BoundAction> actions = bound_actions(v);
  auto found = std::find_if(actions.begin(), actions.end(), [&](const BoundAction& b) { return b.action.key == key; });
  if (found == actions.end()) throw Error(ErrorCode::unavailable_action, "component '" + key + "' is not active");
  if (found->action.kind != a.kind) {
    throw Error(ErrorCode::invalid_kind, "component '" + key + "' does not accept " + std::string(to_string(a.kind)));
  }
  if (a.kind == ActionKind::text_input && !a.payload) {
    throw Error(ErrorCode::invalid_kind, "text-input on '" + key + "' requires a payload");
  }
  if (a.kind == ActionKind::click && a.payload) {
    throw Error(ErrorCode::invalid_kind, "click on '" + key + "' takes no payload");
  }

  const Binding& b = found->binding;
  ViewState next = v;
  next.last_error.reset();
  detail::Client client(next, backend);
  try {
    switch (b.command) {
      case Command::type_field:
        next.form[b.field] = *a.payload;
        break;
      case Command::open_signup:
        client.enter(View::signup);
        break;
      case Command::open_login:
        client.enter(View::login);
        break;
      case Command::submit_signup:
        client.call(request::Signup{next.form["username"], next.form["password"]});
        client.enter(View::login);
        break;
      case Command::submit_login: {
        json body = client.call(request::Login{next.form["username"], next.form["password"]});
        next.token = body.at("token").get<std::string>();
        next.username = body.at("username").get<std::string>();
        next.alert_count_seen = 0;
        client.load_feed(false);
        break;
      }
      case Command::nav_feed:
      case Command::feed_all:
      case Command::back:
      case Command::cancel:
        client.load_feed(false);
        break;
      case Command::feed_mine:
        client.load_feed(true);
        break;
      case Command::nav_users:
        client.load_users();
        break;
      case Command::nav_alerts:
        client.load_alerts();
        break;
      case Command::nav_compose:
        client.enter(View::composer);
        break;
      case Command::logout:
        client.call(request::Logout{client.token()});
        next = ViewState{};
        break;
      case Command::toggle_like: {
        auto row = std::find_if(v.tweets.begin(), v.tweets.end(), [&](const TweetRow& t) { return t.id == b.tweet; });
        if (row != v.tweets.end() && row->liked) {
          client.call(request::Unlike{client.token(), b.tweet});
        } else {
          client.call(request::Like{client.token(), b.tweet});
        }
        client.load_feed(v.show_mine);
        break;
      }
      case Command::retweet:
        client.enter(View::composer);
        next.retweet_of = b.tweet;
        break;
      case Command::open_likes:
        client.load_likes(b.tweet);
        break;
      case Command::toggle_follow: {
        auto row = std::find_if(v.users.begin(), v.users.end(), [&](const UserRow& u) { return u.username == b.user; });
        if (row != v.users.end() && row->following) {
          client.call(request::Unfollow{client.token(), b.user});
        } else {
          client.call(request::Follow{client.token(), b.user});
        }
        client.load_users();
        break;
      }
      case Command::open_alert: {
        const AlertRow& alert = v.alerts.at(b.alert);
        if (alert.kind == AlertKind::liked) {
          // Seeded navigation fault: past the threshold the click is swallowed.
          if (faults.alert_nav_bug_enabled && v.alert_count_seen >= faults.alert_nav_bug_threshold) break;
          client.load_feed(false);
        } else {
          client.load_users();
        }
        break;
      }
      case Command::post: {
        auto media = next.form.count("media") && !next.form["media"].empty()
                         ? std::optional<std::string>(next.form["media"])
                         : std::nullopt;
        if (next.retweet_of) {
          client.call(request::Retweet{client.token(), *next.retweet_of, next.form["text"]});
        } else {
          client.call(request::PostTweet{client.token(), next.form["text"], media});
        }
        client.load_feed(false);
        break;
      }
    }
  } catch (const detail::RequestFailed& failed) {
    ViewState unchanged = v;
    unchanged.last_error = failed.error;
    return unchanged;
  }
  return next;
}

// Polls the alert channel once. Updates the delivered-alert count and, when
// the alerts view is showing, refreshes its rows. Errors are ignored; the
// next poll retries.
inline ViewState poll_alerts(const ViewState& v, Backend& backend) {
  if (!v.authenticated()) return v;
  ViewState next = v;
  detail::Client client(next, backend);
  try {
    auto shown = client.fetch_alerts();
    if (next.view == View::alerts) next.alerts = std::move(shown);
  } catch (const detail::RequestFailed&) {
    return v;
  }
  return next;
}

// ---------------------------------------------------------------------------
// Published contract: view catalog and navigation table

inline json catalog_json() {
  const std::string root = "window[main]#0";
  const std::string nav = root + "/panel[nav]#0";
  json nav_components = json::array({nav + "/button[Feed]#0", nav + "/button[Users]#0", nav + "/button[Alerts]#0",
                                     nav + "/button[Compose]#0", nav + "/button[Logout]#0"});
  auto view = [&](json components, bool with_nav) {
    json all = with_nav ? nav_components : json::array();
    for (auto& c : components) all.push_back(c);
    return all;
  };
  json views = json::object();
  const std::string login = root + "/panel[login]#0";
  views["login"] = view(json::array({json{{"id", login + "/textfield[username]#0"}, {"kind", "text-input"}},
                                     json{{"id", login + "/textfield[password]#0"}, {"kind", "text-input"}},
                                     json{{"id", login + "/button[Login]#0"}, {"when", "username and password filled"}},
                                     login + "/link[Sign up]#0"}),
                        false);
  const std::string signup = root + "/panel[signup]#0";
  views["signup"] = view(json::array({json{{"id", signup + "/textfield[username]#0"}, {"kind", "text-input"}},
                                      json{{"id", signup + "/textfield[password]#0"}, {"kind", "text-input"}},
                                      json{{"id", signup + "/button[Create account]#0"},
                                           {"when", "username and password filled"}},
                                      signup + "/link[Back to login]#0"}),
                         false);
  const std::string feed = root + "/panel[feed]#0";
  views["feed"] = view(json::array({feed + "/button[All]#0", feed + "/button[Mine]#0",
                                    json{{"id", feed + "/button[Like]#{i}"}, {"for_each", "listed tweet"}},
                                    json{{"id", feed + "/button[Retweet]#{i}"}, {"for_each", "listed tweet"}},
                                    json{{"id", feed + "/button[Likes]#{i}"}, {"for_each", "listed tweet"}}}),
                       true);
  views["users"] = view(json::array({json{{"id", root + "/panel[users]#0/button[Follow]#{i}"},
                                          {"for_each", "other user, by username"}}}),
                        true);
  views["alerts"] = view(json::array({json{{"id", root + "/panel[alerts]#0/button[liked]#{i}"},
                                           {"for_each", "liked alert, newest first"}},
                                      json{{"id", root + "/panel[alerts]#0/button[followed]#{i}"},
                                           {"for_each", "followed alert, newest first"}}}),
                         true);
  const std::string composer = root + "/panel[composer]#0";
  views["composer"] = view(json::array({json{{"id", composer + "/textfield[text]#0"}, {"kind", "text-input"}},
                                        json{{"id", composer + "/textfield[media]#0"}, {"kind", "text-input"}},
                                        json{{"id", composer + "/button[Post]#0"}, {"when", "text filled or retweet"}},
                                        composer + "/button[Cancel]#0"}),
                           true);
  views["who_liked"] = view(json::array({root + "/panel[who_liked]#0/button[Back]#0"}), true);

  json navigation = json::array({
      json{{"from", "login"}, {"action", "Login"}, {"to", "feed"}},
      json{{"from", "login"}, {"action", "Sign up"}, {"to", "signup"}},
      json{{"from", "signup"}, {"action", "Create account"}, {"to", "login"}},
      json{{"from", "signup"}, {"action", "Back to login"}, {"to", "login"}},
      json{{"from", "*"}, {"action", "nav Feed"}, {"to", "feed"}},
      json{{"from", "*"}, {"action", "nav Users"}, {"to", "users"}},
      json{{"from", "*"}, {"action", "nav Alerts"}, {"to", "alerts"}},
      json{{"from", "*"}, {"action", "nav Compose"}, {"to", "composer"}},
      json{{"from", "*"}, {"action", "nav Logout"}, {"to", "login"}},
      json{{"from", "feed"}, {"action", "All / Mine / Like"}, {"to", "feed"}},
      json{{"from", "feed"}, {"action", "Retweet"}, {"to", "composer"}},
      json{{"from", "feed"}, {"action", "Likes"}, {"to", "who_liked"}},
      json{{"from", "users"}, {"action", "Follow"}, {"to", "users"}},
      json{{"from", "alerts"}, {"action", "liked"}, {"to", "feed"}},
      json{{"from", "alerts"}, {"action", "followed"}, {"to", "users"}},
      json{{"from", "composer"}, {"action", "Post / Cancel"}, {"to", "feed"}},
      json{{"from", "who_liked"}, {"action", "Back"}, {"to", "feed"}},
  });
  return json{{"root", root}, {"views", std::move(views)}, {"navigation", std::move(navigation)},
              {"errors", "a failed server request leaves the view unchanged"}};
}

// ---------------------------------------------------------------------------
// View-state projection (used by the active-ids endpoint)

inline json to_json(const ViewState& v) {
  auto tweet = [](const TweetRow& t) {
    json j{{"id", t.id}, {"author", t.author}, {"text", t.text}};
    j["media"] = t.media ? json(*t.media) : json(nullptr);
    j["parent"] = t.parent ? json(*t.parent) : json(nullptr);
    j["likes"] = t.likes;
    j["liked"] = t.liked;
    return j;
  };
  json j{{"view", to_string(v.view)}, {"authenticated", v.authenticated()}};
  if (v.username) j["username"] = *v.username;
  j["tweets"] = json::array();
  for (const auto& t : v.tweets) j["tweets"].push_back(tweet(t));
  j["show_mine"] = v.show_mine;
  j["users"] = json::array();
  for (const auto& u : v.users) {
    j["users"].push_back(json{{"username", u.username}, {"following", u.following}, {"follows_you", u.follows_you}});
  }
  j["alerts"] = json::array();
  for (const auto& a : v.alerts) {
    json aj{{"kind", to_string(a.kind)}, {"actor", a.actor}};
    aj["subject"] = a.subject ? json(*a.subject) : json(nullptr);
    aj["ts"] = a.ts;
    j["alerts"].push_back(std::move(aj));
  }
  j["inspected"] = v.inspected ? json(*v.inspected) : json(nullptr);
  j["likers"] = v.likers;
  j["retweets"] = json::array();
  for (const auto& t : v.retweets) j["retweets"].push_back(tweet(t));
  j["retweet_of"] = v.retweet_of ? json(*v.retweet_of) : json(nullptr);
  j["form"] = json::object();
  for (const auto& [k, val] : v.form) j["form"][k] = val;
  j["alert_count_seen"] = v.alert_count_seen;
  return j;
}

// Reads a projection posted by a UI. Missing list fields default to empty;
// `authenticated: true` stands in for the session token, which UIs do not
// need to disclose.
inline ViewState view_state_from_json(const json& j) {
  try {
    ViewState v;
    auto view = view_from_string(j.at("view").get<std::string>());
    if (!view) throw Error(ErrorCode::parse, "unknown view '" + j.at("view").get<std::string>() + "'");
    v.view = *view;
    if (j.value("authenticated", false)) v.token = "redacted";
    if (j.contains("username")) v.username = j.at("username").get<std::string>();
    if (j.contains("tweets")) {
      for (const json& t : j.at("tweets")) v.tweets.push_back(detail::tweet_row(t));
    }
    v.show_mine = j.value("show_mine", false);
    if (j.contains("users")) {
      for (const json& u : j.at("users")) {
        v.users.push_back(UserRow{u.at("username").get<std::string>(), u.value("following", false),
                                  u.value("follows_you", false)});
      }
    }
    if (j.contains("alerts")) {
      for (const json& a : j.at("alerts")) v.alerts.push_back(detail::alert_row(a));
    }
    if (j.contains("inspected") && !j.at("inspected").is_null()) v.inspected = j.at("inspected").get<TweetId>();
    if (j.contains("likers")) v.likers = j.at("likers").get<std::vector<std::string>>();
    if (j.contains("retweet_of") && !j.at("retweet_of").is_null()) v.retweet_of = j.at("retweet_of").get<TweetId>();
    if (j.contains("form")) {
      for (const auto& [k, val] : j.at("form").items()) v.form[k] = val.get<std::string>();
    }
    v.alert_count_seen = j.value("alert_count_seen", std::uint64_t{0});
    if ((v.view != View::login && v.view != View::signup) && !v.authenticated()) {
      throw Error(ErrorCode::validation, "view '" + std::string(to_string(v.view)) + "' requires authentication");
    }
    return v;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::parse, ex.what());
  }
}

}  // namespace synthuser
