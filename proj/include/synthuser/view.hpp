#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace synthuser {

// The closed set of pages the client can show. The view name is the entire
// application state an agent observes.
enum class View { login, signup, users, feed, alerts, composer, who_liked };

inline constexpr std::array<View, 7> kAllViews = {View::login,  View::signup,   View::users,
                                                  View::feed,   View::alerts,   View::composer,
                                                  View::who_liked};

inline std::string_view to_string(View v) {
  switch (v) {
    case View::login: return "login";
    case View::signup: return "signup";
    case View::users: return "users";
    case View::feed: return "feed";
    case View::alerts: return "alerts";
    case View::composer: return "composer";
    case View::who_liked: return "who_liked";
  }
  return "?";
}

inline std::optional<View> view_from_string(std::string_view name) {
  for (View v : kAllViews) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

}  // namespace synthuser
