#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fraudlens/event.hpp"

namespace fraudlens {

class EventStore;

// A planted behaviour with known ground truth.
struct InjectedScenario {
  enum class Kind {
    // Aperiodic burst in the first month, then a fixed day-of-month window
    // (10th-15th) each month with several actions per day, plus noise days.
    monthly_fraud,
    // Monthly activity through a fraud-management system, off-hours. Looks
    // periodic but the reduced FMS weight keeps it under the volume gate.
    monitoring,
    // One event with an action on the unauthorized list.
    unauthorized_action,
    // Two employees feed one client on alternating half-months; each pair is
    // below the gate, the merged client series is not.
    split_client,
    // A burst of failed logins from two machines (authentication stream).
    failed_login_burst,
  };

  Kind kind = Kind::monthly_fraud;
  std::string label;
  int months = 5;
  int burst_events = 3;
  int events_per_day = 2;
  int noise_events = 1;

  static InjectedScenario from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

std::string to_string(InjectedScenario::Kind k);

struct SyntheticSpec {
  std::size_t employees = 710;
  std::size_t clients = 83030;
  int span_days = 180;
  Date start = Date{std::chrono::year{2023} / std::chrono::April / 1};
  // Fractions of clients with 1, 2-5, 6-10 and >10 occurrences.
  std::array<double, kOccurrenceBuckets> occurrence_histogram{0.662, 0.316, 0.014, 0.008};
  std::vector<InjectedScenario> injected_scenarios;
  std::uint64_t seed = 1;
  std::optional<std::size_t> max_events;  // feasibility cap
  double off_hours_rate = 0.1;
  std::size_t auth_events_per_employee = 0;

  // Scales employees and clients (at least one of each).
  SyntheticSpec scaled(double factor) const;
  static SyntheticSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SyntheticCorpus {
  std::vector<Event> events;
  std::vector<AuthEvent> auth_events;
  nlohmann::json profiles;  // profiles document covering the generated population
  nlohmann::json manifest;  // spec echo, per-scenario ground truth, realized stats
};

// Deterministic for a given spec (including seed). Throws ConfigError when
// the spec is infeasible.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec);

// Appends the corpus to the store and writes manifest.json and profiles.json
// into dir.
void persist_corpus(const SyntheticCorpus& corpus, EventStore& store,
                    const std::filesystem::path& dir);

}  // namespace fraudlens
