#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraudlens/time.hpp"

namespace fraudlens {

// One audit record: who (employee) did what (action) to whom (client), when,
// and through which control system. Secondary source fields are kept
// uninterpreted in extras.
struct Event {
  Timestamp ts{};
  std::string employee;
  std::string client;
  std::string action;
  std::string system;
  nlohmann::json extras = nlohmann::json::object();

  bool valid() const {
    return !employee.empty() && !client.empty() && !action.empty() && !system.empty();
  }
  friend bool operator==(const Event&, const Event&) = default;
};

enum class AuthActionKind { login, login_failure, logout, other };

struct AuthAction {
  AuthActionKind kind = AuthActionKind::other;
  std::string code;  // raw code, only meaningful for `other`

  static AuthAction parse(std::string_view text);
  std::string to_string() const;
  friend bool operator==(const AuthAction&, const AuthAction&) = default;
};

struct AuthEvent {
  Timestamp ts{};
  std::string employee;
  std::string ip;
  std::string computer;
  AuthAction action;

  bool valid() const { return !employee.empty() && !ip.empty() && !computer.empty(); }
  friend bool operator==(const AuthEvent&, const AuthEvent&) = default;
};

// Time-ordered events of one (employee, client) pair, or of one client across
// all employees when employee is empty.
struct EventSeries {
  std::optional<std::string> employee;
  std::string client;
  std::vector<Event> events;

  bool empty() const { return events.empty(); }
  std::size_t size() const { return events.size(); }
};

struct QueryFilter {
  std::optional<std::set<std::string>> employees;
  std::optional<std::set<std::string>> clients;
  std::optional<std::set<std::string>> systems;
  std::optional<std::set<std::string>> actions;
  std::optional<Timestamp> from_ts;  // inclusive
  std::optional<Timestamp> to_ts;    // inclusive
  bool dedupe = false;

  // Throws ContractViolation when from_ts > to_ts.
  void validate() const;
  bool matches(const Event& e) const;
  // Clients and systems do not apply to authentication records; the action
  // clause is compared against the auth action code.
  bool matches(const AuthEvent& e) const;
};

// Buckets of per-client occurrence counts: {1}, {2..5}, {6..10}, {>10}.
inline constexpr std::size_t kOccurrenceBuckets = 4;
std::size_t occurrence_bucket(std::size_t occurrences);

struct CorpusStats {
  std::size_t total_events = 0;
  std::size_t distinct_employees = 0;
  std::size_t distinct_clients = 0;
  std::array<double, kOccurrenceBuckets> client_occurrence_histogram{};

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

CorpusStats compute_stats(const std::vector<Event>& events);

// Canonical line format.
nlohmann::json to_json(const Event& e);
nlohmann::json to_json(const AuthEvent& e);
nlohmann::json to_json(const CorpusStats& s);

// Returns an error message instead of throwing; used by the line-oriented
// ingest path.
std::optional<std::string> event_from_json(const nlohmann::json& j, Event& out);
std::optional<std::string> auth_event_from_json(const nlohmann::json& j, AuthEvent& out);

}  // namespace fraudlens
