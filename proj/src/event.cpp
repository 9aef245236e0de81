#include "fraudlens/event.hpp"

#include <map>

#include "fraudlens/errors.hpp"

namespace fraudlens {

AuthAction AuthAction::parse(std::string_view text) {
  if (text == "login") return {AuthActionKind::login, {}};
  if (text == "login_failure") return {AuthActionKind::login_failure, {}};
  if (text == "logout") return {AuthActionKind::logout, {}};
  return {AuthActionKind::other, std::string(text)};
}

std::string AuthAction::to_string() const {
  switch (kind) {
    case AuthActionKind::login:
      return "login";
    case AuthActionKind::login_failure:
      return "login_failure";
    case AuthActionKind::logout:
      return "logout";
    case AuthActionKind::other:
      return code;
  }
  return code;
}

void QueryFilter::validate() const {
  if (from_ts && to_ts && *from_ts > *to_ts) {
    throw ContractViolation("query filter: from_ts is after to_ts");
  }
}

namespace {

bool in(const std::optional<std::set<std::string>>& clause, const std::string& value) {
  return !clause || clause->count(value) != 0;
}

}  // namespace

bool QueryFilter::matches(const Event& e) const {
  if (from_ts && e.ts < *from_ts) return false;
  if (to_ts && e.ts > *to_ts) return false;
  return in(employees, e.employee) && in(clients, e.client) && in(systems, e.system) &&
         in(actions, e.action);
}

bool QueryFilter::matches(const AuthEvent& e) const {
  if (from_ts && e.ts < *from_ts) return false;
  if (to_ts && e.ts > *to_ts) return false;
  return in(employees, e.employee) && in(actions, e.action.to_string());
}

std::size_t occurrence_bucket(std::size_t occurrences) {
  if (occurrences <= 1) return 0;
  if (occurrences <= 5) return 1;
  if (occurrences <= 10) return 2;
  return 3;
}

CorpusStats compute_stats(const std::vector<Event>& events) {
  CorpusStats stats;
  stats.total_events = events.size();
  std::map<std::string_view, std::size_t> per_client;
  std::set<std::string_view> employees;
  for (const auto& e : events) {
    ++per_client[e.client];
    employees.insert(e.employee);
  }
  stats.distinct_employees = employees.size();
  stats.distinct_clients = per_client.size();
  if (per_client.empty()) return stats;
  std::array<std::size_t, kOccurrenceBuckets> counts{};
  for (const auto& [client, n] : per_client) ++counts[occurrence_bucket(n)];
  for (std::size_t b = 0; b < kOccurrenceBuckets; ++b) {
    stats.client_occurrence_histogram[b] =
        static_cast<double>(counts[b]) / static_cast<double>(per_client.size());
  }
  return stats;
}

nlohmann::json to_json(const Event& e) {
  nlohmann::json j{{"ts", format_iso8601(e.ts)},
                   {"employee", e.employee},
                   {"client", e.client},
                   {"action", e.action},
                   {"system", e.system}};
  if (e.extras.is_object() && !e.extras.empty()) j["extras"] = e.extras;
  return j;
}

nlohmann::json to_json(const AuthEvent& e) {
  return {{"ts", format_iso8601(e.ts)},
          {"employee", e.employee},
          {"ip", e.ip},
          {"computer", e.computer},
          {"action", e.action.to_string()}};
}

nlohmann::json to_json(const CorpusStats& s) {
  const auto& h = s.client_occurrence_histogram;
  return {{"total_events", s.total_events},
          {"distinct_employees", s.distinct_employees},
          {"distinct_clients", s.distinct_clients},
          {"client_occurrence_histogram",
           {{"1", h[0]}, {"2-5", h[1]}, {"6-10", h[2]}, {">10", h[3]}}}};
}

namespace {

std::optional<std::string> read_string(const nlohmann::json& j, const char* key,
                                       std::string& out) {
  auto it = j.find(key);
  if (it == j.end()) return std::string("missing field '") + key + "'";
  if (!it->is_string()) return std::string("field '") + key + "' is not a string";
  out = it->get<std::string>();
  if (out.empty()) return std::string("field '") + key + "' is empty";
  return std::nullopt;
}

std::optional<std::string> read_ts(const nlohmann::json& j, Timestamp& out) {
  std::string text;
  if (auto err = read_string(j, "ts", text)) return err;
  auto ts = parse_iso8601(text);
  if (!ts) return "invalid timestamp '" + text + "'";
  out = *ts;
  return std::nullopt;
}

}  // namespace

std::optional<std::string> event_from_json(const nlohmann::json& j, Event& out) {
  if (!j.is_object()) return "record is not a JSON object";
  Event e;
  if (auto err = read_ts(j, e.ts)) return err;
  for (auto [key, field] : {std::pair{"employee", &e.employee}, std::pair{"client", &e.client},
                            std::pair{"action", &e.action}, std::pair{"system", &e.system}}) {
    if (auto err = read_string(j, key, *field)) return err;
  }
  if (auto it = j.find("extras"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) return "field 'extras' is not an object";
    e.extras = *it;
  }
  out = std::move(e);
  return std::nullopt;
}

std::optional<std::string> auth_event_from_json(const nlohmann::json& j, AuthEvent& out) {
  if (!j.is_object()) return "record is not a JSON object";
  AuthEvent e;
  if (auto err = read_ts(j, e.ts)) return err;
  for (auto [key, field] : {std::pair{"employee", &e.employee}, std::pair{"ip", &e.ip},
                            std::pair{"computer", &e.computer}}) {
    if (auto err = read_string(j, key, *field)) return err;
  }
  std::string action;
  if (auto err = read_string(j, "action", action)) return err;
  e.action = AuthAction::parse(action);
  out = std::move(e);
  return std::nullopt;
}

}  // namespace fraudlens
