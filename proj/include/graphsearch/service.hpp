#pragma once

// Session-based retrieval service. The handler is transport independent:
// http.hpp binds it to cpp-httplib, tests call handle() directly.
//
//   POST /sessions                 create (body: query JSON)        -> 201
//   GET  /sessions/{id}            session summary
//   PUT  /sessions/{id}            replace the query, back to created
//   POST /sessions/{id}/expand     created|expanded   -> expanded
//   POST /sessions/{id}/select     expanded|selected  -> selected
//   GET  /sessions/{id}/results    selected|retrieved -> retrieved
//   GET  /concepts                 concept browser
//   GET  /healthz
//
// Errors use {code, message, details}.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <stdexcept>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphsearch/query.hpp"

namespace graphsearch::service {

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> params;
  std::string body;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

enum class SessionState { created, expanded, selected, retrieved };

inline std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::created: return "created";
    case SessionState::expanded: return "expanded";
    case SessionState::selected: return "selected";
    case SessionState::retrieved: return "retrieved";
  }
  return "created";
}

inline SessionState state_from_string(std::string_view s) {
  if (s == "created") return SessionState::created;
  if (s == "expanded") return SessionState::expanded;
  if (s == "selected") return SessionState::selected;
  if (s == "retrieved") return SessionState::retrieved;
  throw FormatError("unknown session state '" + std::string(s) + "'");
}

using Clock = std::function<std::chrono::system_clock::time_point()>;

struct ServiceConfig {
  std::chrono::seconds session_ttl{24 * 3600};
  Clock clock = [] { return std::chrono::system_clock::now(); };
  std::size_t default_page = 50;
  std::size_t max_page = 1000;
};

struct QuerySession {
  std::string id;
  GraphQuery query;
  std::vector<Expansion> expansions;
  Selections selections;
  std::optional<nlohmann::json> select_body;
  std::vector<ScoredPublication> results;
  SessionState state = SessionState::created;
  std::chrono::system_clock::time_point created_at;
  std::mutex mutex;
};

/// Non-negative decimal integer; throws std::invalid_argument otherwise.
inline std::size_t parse_count(const std::string& s) {
  if (s.empty() || s.size() > 18 || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw std::invalid_argument("not a count: " + s);
  return std::stoull(s);
}

inline Response error(int status, std::string code, std::string message, nlohmann::json details = nlohmann::json::object()) {
  return {status, {{"code", std::move(code)}, {"message", std::move(message)}, {"details", std::move(details)}}};
}

class Service {
 public:
  explicit Service(const QueryEngine& engine, ServiceConfig config = {}) : engine_(&engine), config_(std::move(config)) {}

  Response handle(const Request& req) {
    try {
      return route(req);
    } catch (const std::exception& e) {
      return error(500, "internal_error", e.what());
    }
  }

  std::size_t session_count() {
    std::lock_guard lock(store_mutex_);
    purge_expired();
    return sessions_.size();
  }

  /// Queries, selections and states of live sessions.
  nlohmann::json snapshot() {
    std::lock_guard lock(store_mutex_);
    purge_expired();
    nlohmann::json out = nlohmann::json::array();
    for (auto& [id, s] : sessions_) {
      std::lock_guard slock(s->mutex);
      out.push_back({{"id", id},
                     {"query", to_json(s->query)},
                     {"selections", selections_to_json(s->selections)},
                     {"select_body", s->select_body ? *s->select_body : nlohmann::json(nullptr)},
                     {"state", to_string(s->state)},
                     {"created_at", std::chrono::duration_cast<std::chrono::seconds>(s->created_at.time_since_epoch()).count()}});
    }
    return out;
  }

  /// Rebuilds sessions from snapshot(); derived state is recomputed.
  void restore(const nlohmann::json& snap) {
    std::lock_guard lock(store_mutex_);
    for (const auto& j : snap) {
      auto s = std::make_shared<QuerySession>();
      s->id = j.at("id").get<std::string>();
      s->query = query_from_json(j.at("query")).query;
      s->selections = selections_from_json(j.at("selections"));
      if (!j.at("select_body").is_null()) s->select_body = j.at("select_body");
      s->state = state_from_string(j.at("state").get<std::string>());
      s->created_at = std::chrono::system_clock::time_point(std::chrono::seconds(j.at("created_at").get<std::int64_t>()));
      if (s->state != SessionState::created) s->expansions = engine_->expand(s->query);
      if (s->state == SessionState::selected || s->state == SessionState::retrieved)
        apply_selections(s->expansions, s->selections);
      if (s->state == SessionState::retrieved) s->results = engine_->retrieve(s->expansions);
      sessions_[s->id] = std::move(s);
    }
  }

 private:
  Response route(const Request& req) {
    auto parts = split_path(req.path);
    if (parts.size() == 1 && parts[0] == "healthz") {
      if (req.method != "GET") return method_not_allowed(req);
      return {200, {{"status", "ok"}}};
    }
    if (parts.size() == 1 && parts[0] == "concepts") {
      if (req.method != "GET") return method_not_allowed(req);
      return concepts(req);
    }
    if (!parts.empty() && parts[0] == "sessions") {
      if (parts.size() == 1) {
        if (req.method != "POST") return method_not_allowed(req);
        return create(req);
      }
      auto session = find(parts[1]);
      if (!session) return error(404, "unknown_session", "no session '" + parts[1] + "'");
      std::lock_guard lock(session->mutex);
      if (parts.size() == 2) {
        if (req.method == "GET") return summary(*session);
        if (req.method == "PUT") return edit(*session, req);
        return method_not_allowed(req);
      }
      if (parts.size() == 3) {
        const auto& step = parts[2];
        if (step == "expand") return req.method == "POST" ? expand(*session) : method_not_allowed(req);
        if (step == "select") return req.method == "POST" ? select(*session, req) : method_not_allowed(req);
        if (step == "results") return req.method == "GET" ? results(*session, req) : method_not_allowed(req);
      }
    }
    return error(404, "not_found", "no route for " + req.method + " " + req.path);
  }

  static std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> out;
    for (auto& p : text::split(path, '/'))
      if (!p.empty()) out.push_back(std::move(p));
    return out;
  }

  static Response method_not_allowed(const Request& req) {
    return error(405, "method_not_allowed", req.method + " is not supported on " + req.path);
  }

  static Response wrong_state(const QuerySession& s, std::string_view step) {
    return error(409, "wrong_state", std::string(step) + " is not allowed in state " + std::string(to_string(s.state)),
                 {{"state", to_string(s.state)}});
  }

  static Response validation_failed(const ValidationReport& rep) {
    return error(422, "validation_failed", rep.message(), rep.to_json());
  }

  std::optional<GraphQuery> parse_query(const Request& req, Response& failure) const {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
      auto file = query_from_json(body);
      auto rep = engine_->validate(file.query);
      if (!rep.ok()) {
        failure = validation_failed(rep);
        return std::nullopt;
      }
      return file.query.normalized();
    } catch (const nlohmann::json::exception& e) {
      failure = error(400, "malformed_body", std::string("body is not valid JSON: ") + e.what());
    } catch (const FormatError& e) {
      failure = error(400, "malformed_body", e.what());
    }
    return std::nullopt;
  }

  Response create(const Request& req) {
    Response failure;
    auto q = parse_query(req, failure);
    if (!q) return failure;
    auto s = std::make_shared<QuerySession>();
    s->query = std::move(*q);
    s->created_at = config_.clock();
    {
      std::lock_guard lock(store_mutex_);
      purge_expired();
      s->id = new_id();
      sessions_[s->id] = s;
    }
    return {201, {{"session_id", s->id}, {"state", to_string(s->state)}, {"validation", ValidationReport{}.to_json()}}};
  }

  Response summary(const QuerySession& s) const {
    return {200,
            {{"session_id", s.id},
             {"state", to_string(s.state)},
             {"query", to_json(s.query)},
             {"selections", selections_to_json(s.selections)}}};
  }

  Response edit(QuerySession& s, const Request& req) {
    Response failure;
    auto q = parse_query(req, failure);
    if (!q) return failure;
    s.query = std::move(*q);
    s.expansions.clear();
    s.selections.clear();
    s.select_body.reset();
    s.results.clear();
    s.state = SessionState::created;
    return summary(s);
  }

  Response expand(QuerySession& s) {
    if (s.state != SessionState::created && s.state != SessionState::expanded) return wrong_state(s, "expand");
    if (s.state == SessionState::created) {
      s.expansions = engine_->expand(s.query);
      s.state = SessionState::expanded;
    }
    return {200, {{"session_id", s.id}, {"state", to_string(s.state)}, {"expansions", expansions_to_json(s.expansions)}}};
  }

  Response select(QuerySession& s, const Request& req) {
    if (s.state != SessionState::expanded && s.state != SessionState::selected) return wrong_state(s, "select");
    nlohmann::json body = nlohmann::json::object();
    Selections chosen;
    try {
      if (!text::trim(req.body).empty()) body = nlohmann::json::parse(req.body);
      if (!body.is_object()) return error(400, "malformed_body", "select body must be a JSON object");
      chosen = selections_from_json(body.value("selections", nlohmann::json::array()));
    } catch (const nlohmann::json::exception& e) {
      return error(400, "malformed_body", std::string("body is not valid JSON: ") + e.what());
    } catch (const FormatError& e) {
      return error(400, "malformed_body", e.what());
    }
    if (s.state == SessionState::selected) {
      if (s.select_body == body) return selected_response(s);
      return wrong_state(s, "a different selection");
    }
    auto trial = s.expansions;
    try {
      apply_selections(trial, chosen);
    } catch (const SelectionError& e) {
      return error(422, "bad_selection", e.what());
    }
    s.expansions = std::move(trial);
    s.selections.clear();
    for (const auto& ex : s.expansions)
      if (ex.selected) s.selections[ex.rel] = *ex.selected;
    s.select_body = body;
    s.state = SessionState::selected;
    return selected_response(s);
  }

  static Response selected_response(const QuerySession& s) {
    return {200, {{"session_id", s.id}, {"state", to_string(s.state)}, {"selections", selections_to_json(s.selections)}}};
  }

  Response results(QuerySession& s, const Request& req) {
    if (s.state != SessionState::selected && s.state != SessionState::retrieved) return wrong_state(s, "results");
    if (s.state == SessionState::selected) {
      s.results = engine_->retrieve(s.expansions);
      s.state = SessionState::retrieved;
    }
    auto param = [&](const char* k, std::string fallback) {
      auto it = req.params.find(k);
      return it == req.params.end() ? fallback : it->second;
    };
    auto sort = param("sort", "score");
    if (sort != "score" && sort != "citations" && sort != "date")
      return error(400, "bad_parameter", "sort must be one of score, citations, date", {{"sort", sort}});
    std::size_t offset = 0, limit = config_.default_page;
    try {
      offset = parse_count(param("offset", "0"));
      limit = std::min(parse_count(param("limit", std::to_string(config_.default_page))), config_.max_page);
    } catch (const std::exception&) {
      return error(400, "bad_parameter", "offset and limit must be non-negative integers");
    }
    auto filter = param("filter", "");

    std::vector<const ScoredPublication*> view;
    for (const auto& r : s.results) {
      if (!filter.empty()) {
        bool hit = r.record && (text::contains_icase(r.record->title, filter) ||
                                (r.record->journal && text::contains_icase(*r.record->journal, filter)));
        if (!hit) continue;
      }
      view.push_back(&r);
    }
    if (sort == "citations") {
      std::stable_sort(view.begin(), view.end(), [](const ScoredPublication* a, const ScoredPublication* b) {
        auto ca = a->record ? a->record->num_cited_by : std::nullopt;
        auto cb = b->record ? b->record->num_cited_by : std::nullopt;
        if (ca.has_value() != cb.has_value()) return ca.has_value();
        return ca && *ca > *cb;
      });
    } else if (sort == "date") {
      std::stable_sort(view.begin(), view.end(), [](const ScoredPublication* a, const ScoredPublication* b) {
        if (a->publish_date.has_value() != b->publish_date.has_value()) return a->publish_date.has_value();
        return a->publish_date && (*a->publish_date <=> *b->publish_date) > 0;
      });
    }
    nlohmann::json page = nlohmann::json::array();
    for (std::size_t i = offset; i < view.size() && i < offset + limit; ++i) page.push_back(to_json(*view[i]));
    return {200,
            {{"session_id", s.id},
             {"state", to_string(s.state)},
             {"sort", sort},
             {"filter", filter},
             {"total", view.size()},
             {"offset", offset},
             {"limit", limit},
             {"results", page}}};
  }

  Response concepts(const Request& req) const {
    auto param = [&](const char* k) {
      auto it = req.params.find(k);
      return it == req.params.end() ? std::string() : it->second;
    };
    auto prefix = param("prefix"), category = param("category"), type = param("type");
    std::size_t offset = 0, limit = config_.default_page;
    try {
      if (auto o = param("offset"); !o.empty()) offset = parse_count(o);
      if (auto l = param("limit"); !l.empty()) limit = std::min(parse_count(l), config_.max_page);
    } catch (const std::exception&) {
      return error(400, "bad_parameter", "offset and limit must be non-negative integers");
    }
    std::vector<const ConceptEntity*> hits;
    for (const auto& e : engine_->network().entities) {
      if (!category.empty() && e.macrocategory != category) continue;
      if (!type.empty() && e.semantic_type != type) continue;
      if (!prefix.empty()) {
        bool match = text::starts_with_icase(e.name, prefix) ||
                     std::any_of(e.synonyms.begin(), e.synonyms.end(),
                                 [&](const std::string& syn) { return text::starts_with_icase(syn, prefix); });
        if (!match) continue;
      }
      hits.push_back(&e);
    }
    nlohmann::json items = nlohmann::json::array();
    for (std::size_t i = offset; i < hits.size() && i < offset + limit; ++i) items.push_back(to_json(*hits[i]));
    return {200, {{"total", hits.size()}, {"offset", offset}, {"limit", limit}, {"items", items}}};
  }

  std::shared_ptr<QuerySession> find(const std::string& id) {
    std::lock_guard lock(store_mutex_);
    purge_expired();
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  void purge_expired() {
    auto now = config_.clock();
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (now - it->second->created_at >= config_.session_ttl)
        it = sessions_.erase(it);
      else
        ++it;
    }
  }

  std::string new_id() {
    std::ostringstream os;
    os << std::hex;
    do {
      os.str("");
      os << rng_() << rng_();
    } while (sessions_.contains(os.str()));
    return os.str();
  }

  const QueryEngine* engine_;
  ServiceConfig config_;
  std::mutex store_mutex_;
  std::map<std::string, std::shared_ptr<QuerySession>> sessions_;
  std::mt19937_64 rng_{std::random_device{}()};
};

}  // namespace graphsearch::service
