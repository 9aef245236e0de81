#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fraudlens/event.hpp"
#include "fraudlens/periodicity.hpp"
#include "fraudlens/profiles.hpp"

namespace fraudlens {

class EventStore;

inline constexpr std::size_t kLayerCount = 5;

// Decision-tree layers, root first.
enum class Layer : std::size_t {
  volume = 0,
  periodicity = 1,
  off_hours = 2,
  infrequent_system = 3,
  uncommon_action = 4,
};

// Outcome of walking the tree for one series. The non-fraud reference is the
// all-zero vector.
struct PatternVector {
  std::array<bool, kLayerCount> components{};

  bool operator[](Layer l) const { return components[static_cast<std::size_t>(l)]; }
  bool& operator[](Layer l) { return components[static_cast<std::size_t>(l)]; }
  bool any() const;
  friend bool operator==(const PatternVector&, const PatternVector&) = default;
};

// One weight per layer. Valid weights are positive and each one exceeds the
// sum of all deeper weights, so a mismatch at a layer outweighs every
// mismatch below it.
struct LayerWeights {
  std::array<double, kLayerCount> w{16.0, 8.0, 4.0, 2.0, 1.0};

  // Throws ConfigError unless positive and dominant.
  void validate() const;
  double total() const;
};

// Normalized weighted Euclidean distance from the all-zero reference:
// sqrt(sum y_i * w_i) / sqrt(sum w_i).
double weighted_distance(const PatternVector& y, const LayerWeights& weights);

struct ScoringConfig {
  double gate_x = 10.0;          // strictly more than this many weighted events
  int gate_y_days = 180;         // within a window of this many days
  double off_hours_fraction_min = 0.5;
  double theta = 0.5;            // periodicity threshold
  double frequent_share_min = 0.05;
  double fms_event_weight = 0.5;
  LcssParams lcss;

  void validate() const;
  static ScoringConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

enum class ShortCircuit { unauthorized_action, unauthorized_system };
std::string to_string(ShortCircuit s);

struct Evidence {
  SimilarityReport similarity;
  double off_hours_fraction = 0.0;
  std::size_t event_count = 0;
  double peak_window_weight = 0.0;  // heaviest gate window
  std::set<std::string> unauthorized_systems;
  std::set<std::string> infrequent_systems;
  std::set<std::string> unauthorized_actions;
  std::set<std::string> uncommon_actions;
  std::vector<std::string> warnings;  // profile gaps
};

struct Evaluation {
  PatternVector vector;
  std::optional<ShortCircuit> short_circuit;
  Evidence evidence;
};

struct SeverityScore {
  double value = 0.0;
  std::optional<PatternVector> vector;  // absent when short-circuited
  std::optional<ShortCircuit> short_circuit;
  Evidence evidence;
  std::optional<std::string> anchor_client;  // employee scores: pair that set the max
};

// Per-employee event counts by system over the whole corpus; the
// infrequent-system layer compares against these totals.
class EmployeeActivity {
 public:
  static EmployeeActivity from_store(const EventStore& store);
  void add(const Event& e) { ++usage_[e.employee][e.system]; }

  // nullopt when the employee has no recorded activity.
  std::optional<double> share(const std::string& employee, const std::string& system) const;

 private:
  std::map<std::string, std::map<std::string, std::size_t>> usage_;
};

// Evaluates series against the five-layer tree. Pair series and client-wide
// series go through the same code: authorization, system frequency and
// action checks always use the employee of each individual event, which
// yields the per-employee OR for client series.
class Scorer {
 public:
  Scorer(ScoringConfig config = {}, Profiles profiles = {}, PatternLibrary library = {},
         LayerWeights weights = {});

  // Heaviest total weight over windows shorter than gate_y_days; FMS events
  // weigh fms_event_weight, others 1.
  double peak_window_weight(const EventSeries& series) const;
  bool volume_gate(const EventSeries& series) const;
  double off_hours_fraction(const EventSeries& series) const;

  // `activity` supplies each employee's corpus-wide system usage; without it
  // the series itself is the reference.
  Evaluation evaluate_pair_vector(const EventSeries& series,
                                  const EmployeeActivity* activity = nullptr) const;
  SeverityScore pair_severity(const EventSeries& series,
                              const EmployeeActivity* activity = nullptr) const;
  SeverityScore client_severity(const EventSeries& client_series,
                                const EmployeeActivity* activity = nullptr) const;

  const ScoringConfig& config() const { return config_; }
  const Profiles& profiles() const { return profiles_; }
  const PatternLibrary& library() const { return library_; }
  const LayerWeights& weights() const { return weights_; }

 private:
  ScoringConfig config_;
  Profiles profiles_;
  PatternLibrary library_;
  LayerWeights weights_;
};

// Maximum over the employee's pair scores (keyed by client). Ties keep the
// lexicographically smallest client as anchor; no pairs scores 0.
SeverityScore employee_severity(const std::map<std::string, SeverityScore>& pairs_by_client);

struct SeverityTables {
  std::map<std::string, SeverityScore> employees;
  std::map<std::string, SeverityScore> clients;
  std::map<std::pair<std::string, std::string>, SeverityScore> pairs;
  std::vector<std::string> warnings;

  const SeverityScore* pair(const std::string& employee, const std::string& client) const;
  double employee_value(const std::string& id) const;
  double client_value(const std::string& id) const;
};

SeverityTables score_corpus(const EventStore& store, const Scorer& scorer);

nlohmann::json to_json(const PatternVector& v);
nlohmann::json to_json(const Evidence& e);
nlohmann::json to_json(const SeverityScore& s);
// {"employees": [...], "clients": [...], "pairs": [...]} in id order.
nlohmann::json to_json(const SeverityTables& t, bool include_pairs = true);

// entity_type,id,severity,short_circuit,y1,y2,y3,y4,y5. Pair ids are
// "employee|client". y columns are empty for short-circuited rows.
std::string to_csv(const SeverityTables& t, bool include_pairs = false);

}  // namespace fraudlens
