#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "synthuser/error.hpp"
#include "synthuser/rng.hpp"

namespace synthuser {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Fault injection

struct FaultConfig {
  double follow_error_probability = 0.0;
  bool alert_nav_bug_enabled = false;
  std::uint64_t alert_nav_bug_threshold = 10;

  bool operator==(const FaultConfig&) const = default;
};

inline constexpr double kDefaultFollowErrorProbability = 0.2;
inline constexpr std::uint64_t kDefaultAlertNavThreshold = 10;

inline void validate(const FaultConfig& faults) {
  if (!(faults.follow_error_probability >= 0.0 && faults.follow_error_probability <= 1.0)) {
    throw Error(ErrorCode::validation, "follow_error_probability must be within [0,1]");
  }
  if (faults.alert_nav_bug_threshold == 0) {
    throw Error(ErrorCode::validation, "alert_nav_bug_threshold must be positive");
  }
}

// One uniform draw; error iff u < p. Always consumes exactly one draw.
inline bool fault_follow(Rng& rng, double p) { return rng.uniform() < p; }

// ---------------------------------------------------------------------------
// Server state

using TweetId = std::uint64_t;

struct Account {
  std::string password_hash;
  std::uint64_t created = 0;

  bool operator==(const Account&) const = default;
};

struct Tweet {
  TweetId id = 0;
  std::string author;
  std::string text;
  std::optional<std::string> media;
  std::optional<TweetId> parent;
  std::uint64_t created = 0;

  bool operator==(const Tweet&) const = default;
};

enum class AlertKind { liked, followed };

inline std::string_view to_string(AlertKind kind) { return kind == AlertKind::liked ? "liked" : "followed"; }

struct Alert {
  AlertKind kind = AlertKind::liked;
  std::string actor;
  std::optional<TweetId> subject;
  std::uint64_t ts = 0;

  bool operator==(const Alert&) const = default;
};

struct ServerState {
  std::map<std::string, Account> users;
  std::set<std::pair<std::string, std::string>> follows;  // (follower, followee)
  std::map<TweetId, Tweet> tweets;
  std::set<std::pair<std::string, TweetId>> likes;
  std::map<std::string, std::vector<Alert>> alerts;
  std::map<std::string, std::string> tokens;  // token -> username
  std::uint64_t clock = 0;                     // logical time, one tick per request
  TweetId next_tweet_id = 1;
  std::uint64_t next_token = 1;

  bool operator==(const ServerState&) const = default;
};

// Returns a description of the first broken invariant, if any.
inline std::optional<std::string> check_invariants(const ServerState& s) {
  for (const auto& [follower, followee] : s.follows) {
    if (follower == followee) return "self-follow by " + follower;
    if (!s.users.count(follower) || !s.users.count(followee)) return "follow references unknown user";
  }
  for (const auto& [user, tweet] : s.likes) {
    if (!s.tweets.count(tweet)) return "like of unknown tweet " + std::to_string(tweet);
    if (!s.users.count(user)) return "like by unknown user " + user;
  }
  for (const auto& [id, tweet] : s.tweets) {
    if (tweet.parent) {
      // Parents always precede children, which also rules out cycles.
      if (!s.tweets.count(*tweet.parent)) return "retweet of unknown tweet";
      if (*tweet.parent >= id) return "retweet parent not older than child";
    }
  }
  for (const auto& [user, queue] : s.alerts) {
    for (const Alert& a : queue) {
      if ((a.kind == AlertKind::liked) != a.subject.has_value()) return "alert subject mismatch for " + user;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Requests and responses

namespace request {
struct Signup { std::string username, password; };
struct Login { std::string username, password; };
struct Logout { std::string token; };
struct ListUsers { std::string token; };
struct Follow { std::string token, username; };
struct Unfollow { std::string token, username; };
struct PostTweet { std::string token, text; std::optional<std::string> media; };
struct Retweet { std::string token; TweetId tweet_id = 0; std::string text; };
struct Like { std::string token; TweetId tweet_id = 0; };
struct Unlike { std::string token; TweetId tweet_id = 0; };
struct GetFeed { std::string token; std::optional<std::uint64_t> limit = {}; };
struct GetMyTweets { std::string token; std::optional<std::uint64_t> limit = {}; };
struct GetRetweetsOf { std::string token; TweetId tweet_id = 0; };
struct WhoLiked { std::string token; TweetId tweet_id = 0; };
struct GetAlerts { std::string token; std::optional<std::uint64_t> limit = {}; };
}  // namespace request

using Request = std::variant<request::Signup, request::Login, request::Logout, request::ListUsers, request::Follow,
                             request::Unfollow, request::PostTweet, request::Retweet, request::Like, request::Unlike,
                             request::GetFeed, request::GetMyTweets, request::GetRetweetsOf, request::WhoLiked,
                             request::GetAlerts>;

// Endpoint names, indexed like the Request alternatives.
inline constexpr std::string_view kRequestNames[] = {
    "signup", "login",    "logout",   "list_users", "follow",        "unfollow",  "post_tweet", "retweet",
    "like",   "unlike",   "get_feed", "get_my_tweets", "get_retweets_of", "who_liked", "get_alerts"};

inline std::string_view request_name(const Request& r) { return kRequestNames[r.index()]; }

namespace status {
inline constexpr int ok = 200;
inline constexpr int bad_request = 400;
inline constexpr int unauthorized = 401;
inline constexpr int conflict = 409;
inline constexpr int internal_error = 500;
inline constexpr int unavailable = 503;
}  // namespace status

struct Response {
  int code = status::ok;
  json body = json::object();

  bool ok() const { return code >= 200 && code < 300; }
  std::string message() const { return body.is_object() ? body.value("message", std::string()) : std::string(); }

  static Response success(json body = json::object()) { return Response{status::ok, std::move(body)}; }
  static Response error(int code, std::string message) {
    return Response{code, json{{"code", code}, {"message", std::move(message)}}};
  }
};

inline json request_to_json(const Request& r) {
  return std::visit(
      [](const auto& q) -> json {
        using T = std::decay_t<decltype(q)>;
        json j = json::object();
        if constexpr (requires { q.username; }) j["username"] = q.username;
        if constexpr (requires { q.password; }) j["password"] = q.password;
        if constexpr (requires { q.token; }) j["token"] = q.token;
        if constexpr (requires { q.tweet_id; }) j["tweet_id"] = q.tweet_id;
        if constexpr (requires { q.text; }) j["text"] = q.text;
        if constexpr (std::is_same_v<T, request::PostTweet>) {
          if (q.media) j["media"] = *q.media;
        }
        if constexpr (requires { q.limit; }) {
          if (q.limit) j["limit"] = *q.limit;
        }
        return j;
      },
      r);
}

namespace detail {

template <std::size_t I = 0>
Request request_by_index(std::size_t index, const json& body) {
  if constexpr (I < std::variant_size_v<Request>) {
    if (index != I) return request_by_index<I + 1>(index, body);
    using T = std::variant_alternative_t<I, Request>;
    T q{};
    if constexpr (requires { q.username; }) q.username = body.at("username").get<std::string>();
    if constexpr (requires { q.password; }) q.password = body.at("password").get<std::string>();
    if constexpr (requires { q.token; }) q.token = body.at("token").get<std::string>();
    if constexpr (requires { q.tweet_id; }) q.tweet_id = body.at("tweet_id").get<TweetId>();
    if constexpr (std::is_same_v<T, request::Retweet>) {
      q.text = body.value("text", std::string());
    } else if constexpr (requires { q.text; }) {
      q.text = body.at("text").get<std::string>();
    }
    if constexpr (std::is_same_v<T, request::PostTweet>) {
      if (body.contains("media") && !body.at("media").is_null()) q.media = body.at("media").get<std::string>();
    }
    if constexpr (requires { q.limit; }) {
      if (body.contains("limit") && !body.at("limit").is_null()) q.limit = body.at("limit").get<std::uint64_t>();
    }
    return Request{std::move(q)};
  } else {
    throw Error(ErrorCode::parse, "request index out of range");
  }
}

}  // namespace detail

// Builds a request from its endpoint name and body; throws Error(parse) on
// an unknown name or missing parameters.
inline Request request_from_json(std::string_view name, const json& body) {
  for (std::size_t i = 0; i < std::size(kRequestNames); ++i) {
    if (kRequestNames[i] == name) {
      try {
        return detail::request_by_index(i, body);
      } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::parse, std::string(name) + ": " + ex.what());
      }
    }
  }
  throw Error(ErrorCode::parse, "unknown request '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Request handling

namespace detail {

// FNV-1a. Stands in for a password hash; hardening is not a goal here.
inline std::string hash_password(std::string_view password) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : password) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

inline bool valid_username(std::string_view name) {
  if (name.empty() || name.size() > 64) return false;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
              c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

inline std::map<TweetId, std::uint64_t> like_counts(const ServerState& s) {
  std::map<TweetId, std::uint64_t> counts;
  for (const auto& [user, tweet] : s.likes) ++counts[tweet];
  return counts;
}

inline json tweet_json(const ServerState& s, const Tweet& t, const std::string& viewer,
                       const std::map<TweetId, std::uint64_t>& counts) {
  auto found = counts.find(t.id);
  std::uint64_t likes = found == counts.end() ? 0 : found->second;
  json j{{"id", t.id}, {"author", t.author}, {"text", t.text}};
  j["media"] = t.media ? json(*t.media) : json(nullptr);
  j["parent"] = t.parent ? json(*t.parent) : json(nullptr);
  j["likes"] = likes;
  j["liked"] = s.likes.count({viewer, t.id}) > 0;
  j["created"] = t.created;
  return j;
}

inline json alert_json(const Alert& a) {
  json j{{"kind", to_string(a.kind)}, {"actor", a.actor}};
  j["subject"] = a.subject ? json(*a.subject) : json(nullptr);
  j["ts"] = a.ts;
  return j;
}

}  // namespace detail

struct LikeEvent {
  std::string actor;
  TweetId tweet = 0;
};
struct FollowEvent {
  std::string follower;
  std::string followee;
};

// Appends one alert to the affected user's queue. Self-likes and
// self-follows produce nothing. Callers only invoke this for a newly created
// like or follow pair, so re-likes of an already-liked tweet never reach it.
inline void generate_alert(ServerState& s, const std::variant<LikeEvent, FollowEvent>& event) {
  if (const auto* like = std::get_if<LikeEvent>(&event)) {
    const std::string& author = s.tweets.at(like->tweet).author;
    if (author == like->actor) return;
    s.alerts[author].push_back(Alert{AlertKind::liked, like->actor, like->tweet, s.clock});
  } else {
    const auto& follow = std::get<FollowEvent>(event);
    if (follow.follower == follow.followee) return;
    s.alerts[follow.followee].push_back(Alert{AlertKind::followed, follow.follower, std::nullopt, s.clock});
  }
}

// Applies one request to `s`. On any error response the state is left
// exactly as it was. Deterministic given (s, request, rng
// state, faults).
inline Response handle_request(ServerState& s, const Request& req, Rng& rng, const FaultConfig& faults) {
  const std::uint64_t clock_before = s.clock;
  ++s.clock;
  auto authenticate = [&](const std::string& token) -> const std::string* {
    auto it = s.tokens.find(token);
    return it == s.tokens.end() ? nullptr : &it->second;
  };
  auto unauthorized = [] { return Response::error(status::unauthorized, "unknown session token"); };
  auto newest_first = [](std::vector<const Tweet*>& list) {
    std::sort(list.begin(), list.end(), [](const Tweet* a, const Tweet* b) { return a->id > b->id; });
  };

  Response response = std::visit(
      [&](const auto& q) -> Response {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, request::Signup>) {
          if (!detail::valid_username(q.username)) return Response::error(status::bad_request, "invalid username");
          if (q.password.empty()) return Response::error(status::bad_request, "empty password");
          if (s.users.count(q.username)) return Response::error(status::conflict, "username already taken");
          s.users[q.username] = Account{detail::hash_password(q.password), s.clock};
          return Response::success(json{{"username", q.username}});
        } else if constexpr (std::is_same_v<T, request::Login>) {
          auto it = s.users.find(q.username);
          if (it == s.users.end() || it->second.password_hash != detail::hash_password(q.password)) {
            return Response::error(status::unauthorized, "invalid credentials");
          }
          std::string token = "tok-" + std::to_string(s.next_token++);
          s.tokens[token] = q.username;
          return Response::success(json{{"token", token}, {"username", q.username}});
        } else if constexpr (std::is_same_v<T, request::Logout>) {
          if (!s.tokens.erase(q.token)) return unauthorized();
          return Response::success();
        } else if constexpr (std::is_same_v<T, request::ListUsers>) {
          const std::string* me = authenticate(q.token);
          if (!me) return unauthorized();
          json users = json::array();
          json followers = json::array();
          for (const auto& [name, account] : s.users) {
            if (s.follows.count({name, *me})) followers.push_back(name);
            if (name == *me) continue;
            users.push_back(json{{"username", name},
                                 {"following", s.follows.count({*me, name}) > 0},
                                 {"follows_you", s.follows.count({name, *me}) > 0}});
          }
          return Response::success(json{{"users", std::move(users)}, {"followers", std::move(followers)}});
        } else if constexpr (std::is_same_v<T, request::Follow>) {
          const std::string* me = authenticate(q.token);
          if (!me) return unauthorized();
          if (fault_follow(rng, faults.follow_error_probability)) {
            return Response::error(status::internal_error, "injected fault: follow failed");
          }
          if (q.username == *me) return Response::error(status::bad_request, "cannot follow yourself");
          if (!s.users.count(q.username)) return Response::error(status::bad_request, "no such user");
          if (s.follows.insert({*me, q.username}).second) generate_alert(s, FollowEvent{*me, q.username});
          return Response::success();
        } else if constexpr (std::is_same_v<T, request::Unfollow>) {
          const std::string* me = authenticate(q.token);
          if (!me) return unauthorized();
          if (!s.users.count(q.username)) return Response::error(status::bad_request, "no such user");
          s.follows.erase({*me, q.username});
          return Response::success();
        } else if constexpr (std::is_same_v<T, request::PostTweet>) {
          const std::string* me = authenticate(q.token);
          if (!me) return unauthorized();
          if (q.text.empty()) return Response::error(status::bad_request, "empty tweet");
          TweetId id = s.next_tweet_id++;
          s.tweets[id] = Tweet{id, *me, q.text, q.media, std::nullopt, s.clock};
          return Response::success(json{{"id", id}});
        } else if constexpr (std::is_same_v<T, request::Retweet>) {
          const std::string* me = authenticate(q.token);
          if (!me) return unauthorized();
          if (!s.tweets.count(q.tweet_id)) return Response::error(status::bad_request, "no such tweet");
          TweetId id = s.next_tweet_id++;
          s.tweets[id] = Tweet{id, *me, q.text, std::nullopt, q.tweet_id, s.clock};
          return Response::success(json{{"id", id}});
        } else if constexpr (std::is_same_v<T, request::Like>) {
          const std::string* me = authenticate(q.token);
          if (!me) return unauthorized();
          if (!s.tweets.count(q.tweet_id)) return Response::error(status::bad_request, "no such tweet");
          if (s.likes.insert({*me, q.tweet_id}).second) generate_alert(s, LikeEvent{*me, q.tweet_id});
          return Response::success();
        } else if constexpr (std::is_same_v<T, request::Unlike>) {
          const std::string* me = authenticate(q.token);
          if (!me) return unauthorized();
          if (!s.tweets.count(q.tweet_id)) return Response::error(status::bad_request, "no such tweet");
          s.likes.erase({*me, q.tweet_id});
          return Response::success();
        } else if constexpr (std::is_same_v<T, request::GetFeed> || std::is_same_v<T, request::GetMyTweets>) {
          const std::string* me = authenticate(q.token);
          if (!me) return unauthorized();
          std::vector<const Tweet*> list;
          for (const auto& [id, t] : s.tweets) {
            bool mine = t.author == *me;
            if constexpr (std::is_same_v<T, request::GetFeed>) {
              if (mine || s.follows.count({*me, t.author})) list.push_back(&t);
            } else if (mine) {
              list.push_back(&t);
            }
          }
          newest_first(list);
          if (q.limit && list.size() > *q.limit) list.resize(*q.limit);
          json tweets = json::array();
          const auto counts = detail::like_counts(s);
          for (const Tweet* t : list) tweets.push_back(detail::tweet_json(s, *t, *me, counts));
          return Response::success(json{{"tweets", std::move(tweets)}});
        } else if constexpr (std::is_same_v<T, request::GetRetweetsOf>) {
          const std::string* me = authenticate(q.token);
          if (!me) return unauthorized();
          if (!s.tweets.count(q.tweet_id)) return Response::error(status::bad_request, "no such tweet");
          std::vector<const Tweet*> list;
          for (const auto& [id, t] : s.tweets) {
            if (t.parent == q.tweet_id) list.push_back(&t);
          }
          newest_first(list);
          json tweets = json::array();
          const auto counts = detail::like_counts(s);
          for (const Tweet* t : list) tweets.push_back(detail::tweet_json(s, *t, *me, counts));
          return Response::success(json{{"tweets", std::move(tweets)}});
        } else if constexpr (std::is_same_v<T, request::WhoLiked>) {
          if (!authenticate(q.token)) return unauthorized();
          if (!s.tweets.count(q.tweet_id)) return Response::error(status::bad_request, "no such tweet");
          json users = json::array();
          for (const auto& [user, tweet] : s.likes) {
            if (tweet == q.tweet_id) users.push_back(user);
          }
          return Response::success(json{{"users", std::move(users)}});
        } else {
          static_assert(std::is_same_v<T, request::GetAlerts>);
          const std::string* me = authenticate(q.token);
          if (!me) return unauthorized();
          // Oldest first; with a limit, only the newest `limit` alerts.
          json alerts = json::array();
          std::size_t total = 0;
          if (auto it = s.alerts.find(*me); it != s.alerts.end()) {
            total = it->second.size();
            std::size_t from = q.limit && *q.limit < total ? total - *q.limit : 0;
            for (std::size_t i = from; i < total; ++i) alerts.push_back(detail::alert_json(it->second[i]));
          }
          return Response::success(json{{"alerts", std::move(alerts)}, {"total", total}});
        }
      },
      req);
  if (!response.ok()) s.clock = clock_before;
  return response;
}

// ---------------------------------------------------------------------------
// Transport seam

// Anything that answers requests: the in-process server or a remote one.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Response call(const Request& request) = 0;
};

// The authoritative in-memory target. Requests from any number of threads
// are serialized over one state.
class Server : public Backend {
 public:
  Server(std::uint64_t seed, FaultConfig faults) : rng_(seed), faults_(faults) { validate(faults_); }

  Response call(const Request& request) override {
    std::lock_guard lock(mu_);
    return handle_request(state_, request, rng_, faults_);
  }

  ServerState snapshot() const {
    std::lock_guard lock(mu_);
    return state_;
  }

  const FaultConfig& faults() const { return faults_; }

 private:
  mutable std::mutex mu_;
  ServerState state_;
  Rng rng_;
  FaultConfig faults_;
};

// Creates background accounts `user-0` .. `user-<n-1>`, each with one tweet,
// so a fresh target has someone to follow. Deterministic.
inline void seed_population(Backend& backend, int count) {
  for (int i = 0; i < count; ++i) {
    std::string name = "user-" + std::to_string(i);
    backend.call(request::Signup{name, "pw-" + name});
    Response login = backend.call(request::Login{name, "pw-" + name});
    if (!login.ok()) throw Error(ErrorCode::run, "population bootstrap failed for " + name);
    std::string token = login.body.at("token").get<std::string>();
    backend.call(request::PostTweet{token, "hello from " + name, std::nullopt});
    backend.call(request::Logout{token});
  }
}

}  // namespace synthuser
