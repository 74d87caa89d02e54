#pragma once

#include <string>
#include <utility>

#include "httplib.h"
#include "json.hpp"
#include "synthuser/client.hpp"
#include "synthuser/server.hpp"
#include "synthuser/tracker.hpp"

namespace synthuser {

// Route table:
//   POST /api/<request>          one endpoint per request kind, JSON body
//   POST /tracker/report-action  completed UI action -> {"seq": n}
//   POST /tracker/active-ids     view-state projection -> {"ids": [...]}
//   GET  /ui/catalog             published view catalog and navigation table
//   GET  /healthz
inline void mount_routes(httplib::Server& http, Backend& target, ActionReporter* reporter) {
  auto reply = [](httplib::Response& res, int code, const json& body) {
    res.status = code;
    res.set_content(body.dump(), "application/json");
  };
  auto bad_request = [reply](httplib::Response& res, const std::string& message) {
    reply(res, status::bad_request, json{{"code", status::bad_request}, {"message", message}});
  };

  for (std::string_view name : kRequestNames) {
    std::string endpoint(name);
    http.Post("/api/" + endpoint, [&target, endpoint, reply, bad_request](const httplib::Request& req,
                                                                          httplib::Response& res) {
      Request request;
      try {
        request = request_from_json(endpoint, req.body.empty() ? json::object() : json::parse(req.body));
      } catch (const std::exception& e) {
        bad_request(res, e.what());
        return;
      }
      Response out = target.call(request);
      reply(res, out.code, out.body);
    });
  }

  http.Post("/tracker/report-action", [reporter, reply, bad_request](const httplib::Request& req, httplib::Response& res) {
    if (!reporter) {
      reply(res, status::unavailable, json{{"code", status::unavailable}, {"message", "tracking disabled"}});
      return;
    }
    try {
      json j = json::parse(req.body);
      auto before = view_from_string(j.at("state_before").get<std::string>());
      auto after = view_from_string(j.at("state_after").get<std::string>());
      if (!before || !after) throw Error(ErrorCode::parse, "unknown view");
      UiAction action;
      action.component = parse_component_id(j.at("action").at("component").get<std::string>());
      auto kind = action_kind_from_string(j.at("action").at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::parse, "unknown action kind");
      action.kind = *kind;
      if (j.at("action").contains("payload")) action.payload = j.at("action").at("payload").get<std::string>();
      std::uint64_t seq = reporter->report(j.at("session").get<std::string>(), *before, std::move(action), *after);
      reply(res, status::ok, json{{"seq", seq}});
    } catch (const std::exception& e) {
      bad_request(res, e.what());
    }
  });

  http.Post("/tracker/active-ids", [reply, bad_request](const httplib::Request& req, httplib::Response& res) {
    try {
      ViewState v = view_state_from_json(json::parse(req.body));
      json ids = json::array();
      for (const ActionTemplate& t : available_actions(v)) ids.push_back(json{{"id", t.key}, {"kind", to_string(t.kind)}});
      reply(res, status::ok, json{{"view", to_string(v.view)}, {"ids", std::move(ids)}});
    } catch (const std::exception& e) {
      bad_request(res, e.what());
    }
  });

  http.Get("/ui/catalog", [reply](const httplib::Request&, httplib::Response& res) { reply(res, status::ok, catalog_json()); });
  http.Get("/healthz", [reply](const httplib::Request&, httplib::Response& res) { reply(res, status::ok, json{{"ok", true}}); });
}

// Talks to a target over HTTP. Transport failures surface as 503 responses.
class HttpBackend : public Backend {
 public:
  HttpBackend(std::string host, int port) : client_(std::move(host), port) {}

  Response call(const Request& request) override {
    auto res = client_.Post("/api/" + std::string(request_name(request)), request_to_json(request).dump(),
                            "application/json");
    if (!res) return Response::error(status::unavailable, "transport error: " + httplib::to_string(res.error()));
    try {
      return Response{res->status, json::parse(res->body)};
    } catch (const std::exception& e) {
      return Response::error(status::unavailable, std::string("malformed response: ") + e.what());
    }
  }

 private:
  httplib::Client client_;
};

}  // namespace synthuser
