#include "fraudlens/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "fraudlens/csv.hpp"
#include "fraudlens/errors.hpp"
#include "fraudlens/event_store.hpp"

namespace fraudlens {

bool PatternVector::any() const {
  return std::any_of(components.begin(), components.end(), [](bool b) { return b; });
}

void LayerWeights::validate() const {
  for (std::size_t i = 0; i < kLayerCount; ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) throw ConfigError("layer weights must be positive");
    const double deeper = std::accumulate(w.begin() + static_cast<long>(i) + 1, w.end(), 0.0);
    if (!(w[i] > deeper)) {
      throw ConfigError("layer weight " + std::to_string(i + 1) +
                        " must exceed the sum of all deeper weights");
    }
  }
}

double LayerWeights::total() const { return std::accumulate(w.begin(), w.end(), 0.0); }

double weighted_distance(const PatternVector& y, const LayerWeights& weights) {
  double num = 0.0;
  for (std::size_t i = 0; i < kLayerCount; ++i) {
    if (y.components[i]) num += weights.w[i];
  }
  return std::sqrt(num) / std::sqrt(weights.total());
}

// ---------------------------------------------------------------------------

void ScoringConfig::validate() const {
  if (!(gate_x >= 1.0)) throw ConfigError("gate_x must be >= 1");
  if (gate_y_days < 1) throw ConfigError("gate_y_days must be >= 1");
  auto fraction = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must be in [0, 1]");
  };
  fraction(off_hours_fraction_min, "off_hours_fraction_min");
  fraction(theta, "theta");
  fraction(frequent_share_min, "frequent_share_min");
  if (!(fms_event_weight > 0.0 && fms_event_weight <= 1.0)) {
    throw ConfigError("fms_event_weight must be in (0, 1]");
  }
  if (lcss.epsilon_days < 0) throw ConfigError("epsilon_days must be >= 0");
  if (lcss.delta && *lcss.delta == 0) throw ConfigError("delta must be positive");
}

ScoringConfig ScoringConfig::from_json(const nlohmann::json& j) {
  ScoringConfig c;
  try {
    c.gate_x = j.value("gate_x", c.gate_x);
    c.gate_y_days = j.value("gate_y_days", c.gate_y_days);
    c.off_hours_fraction_min = j.value("off_hours_fraction_min", c.off_hours_fraction_min);
    c.theta = j.value("theta", c.theta);
    c.frequent_share_min = j.value("frequent_share_min", c.frequent_share_min);
    c.fms_event_weight = j.value("fms_event_weight", c.fms_event_weight);
    c.lcss.epsilon_days = j.value("epsilon_days", c.lcss.epsilon_days);
    if (auto it = j.find("delta"); it != j.end() && !it->is_null()) {
      c.lcss.delta = it->get<std::size_t>();
    }
    c.lcss.absorb_noise = j.value("absorb_noise", c.lcss.absorb_noise);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scoring config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json ScoringConfig::to_json() const {
  return {{"gate_x", gate_x},
          {"gate_y_days", gate_y_days},
          {"off_hours_fraction_min", off_hours_fraction_min},
          {"theta", theta},
          {"frequent_share_min", frequent_share_min},
          {"fms_event_weight", fms_event_weight},
          {"epsilon_days", lcss.epsilon_days},
          {"delta", lcss.delta ? nlohmann::json(*lcss.delta) : nlohmann::json(nullptr)},
          {"absorb_noise", lcss.absorb_noise}};
}

std::string to_string(ShortCircuit s) {
  return s == ShortCircuit::unauthorized_action ? "unauthorized_action" : "unauthorized_system";
}

// ---------------------------------------------------------------------------

EmployeeActivity EmployeeActivity::from_store(const EventStore& store) {
  EmployeeActivity a;
  for (const auto& e : store.query_events({})) a.add(e);
  return a;
}

std::optional<double> EmployeeActivity::share(const std::string& employee,
                                              const std::string& system) const {
  auto it = usage_.find(employee);
  if (it == usage_.end()) return std::nullopt;
  std::size_t total = 0;
  for (const auto& [s, n] : it->second) total += n;
  if (total == 0) return std::nullopt;
  auto sit = it->second.find(system);
  const std::size_t n = sit == it->second.end() ? 0 : sit->second;
  return static_cast<double>(n) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------

Scorer::Scorer(ScoringConfig config, Profiles profiles, PatternLibrary library, LayerWeights weights)
    : config_(std::move(config)),
      profiles_(std::move(profiles)),
      library_(std::move(library)),
      weights_(weights) {
  config_.validate();
  weights_.validate();
}

double Scorer::peak_window_weight(const EventSeries& series) const {
  std::vector<std::pair<Timestamp, double>> weighted;
  weighted.reserve(series.events.size());
  for (const auto& e : series.events) {
    weighted.emplace_back(e.ts, profiles_.is_fms(e.system) ? config_.fms_event_weight : 1.0);
  }
  std::sort(weighted.begin(), weighted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const auto window = std::chrono::seconds{static_cast<std::int64_t>(config_.gate_y_days) * kSecondsPerDay};
  double peak = 0.0, sum = 0.0;
  std::size_t left = 0;
  for (std::size_t right = 0; right < weighted.size(); ++right) {
    sum += weighted[right].second;
    while (weighted[right].first - weighted[left].first >= window) sum -= weighted[left++].second;
    peak = std::max(peak, sum);
  }
  return peak;
}

bool Scorer::volume_gate(const EventSeries& series) const {
  return peak_window_weight(series) > config_.gate_x;
}

double Scorer::off_hours_fraction(const EventSeries& series) const {
  if (series.events.empty()) return 0.0;
  const auto off = std::count_if(series.events.begin(), series.events.end(), [&](const Event& e) {
    return !profiles_.working_calendar.is_working_time(e.ts);
  });
  return static_cast<double>(off) / static_cast<double>(series.events.size());
}

Evaluation Scorer::evaluate_pair_vector(const EventSeries& series,
                                        const EmployeeActivity* activity) const {
  Evaluation out;
  Evidence& ev = out.evidence;
  ev.event_count = series.events.size();

  // Per-employee usage inside the series, the fallback reference when no
  // corpus-wide activity is supplied.
  EmployeeActivity local;
  std::set<std::string> employees;
  for (const auto& e : series.events) {
    local.add(e);
    employees.insert(e.employee);
  }
  const EmployeeActivity& usage = activity ? *activity : local;

  std::set<std::string> missing_auth, missing_roles;
  for (const auto& e : series.events) {
    if (profiles_.unauthorized_actions.count(e.action)) ev.unauthorized_actions.insert(e.action);

    const auto* allowed = profiles_.authorized_for(e.employee);
    if (!allowed) missing_auth.insert(e.employee);
    if (!allowed || !allowed->count(e.system)) ev.unauthorized_systems.insert(e.system);

    const auto* common = profiles_.common_actions_for(e.employee);
    if (!common) {
      missing_roles.insert(e.employee);
    } else if (!common->count(e.action)) {
      ev.uncommon_actions.insert(e.action);
    }

    auto share = usage.share(e.employee, e.system);
    if (!share) share = local.share(e.employee, e.system);
    if (*share < config_.frequent_share_min) ev.infrequent_systems.insert(e.system);
  }
  for (const auto& id : missing_auth) {
    ev.warnings.push_back("no authorized_systems entry for employee '" + id +
                          "'; treated as unauthorized");
  }
  for (const auto& id : missing_roles) {
    ev.warnings.push_back("no common_actions entry for employee '" + id +
                          "'; uncommon-action layer skipped");
  }

  ev.peak_window_weight = peak_window_weight(series);
  ev.similarity = similarity_profile(series, library_, config_.lcss, config_.theta);
  ev.off_hours_fraction = off_hours_fraction(series);

  auto& y = out.vector;
  y[Layer::volume] = ev.peak_window_weight > config_.gate_x;
  y[Layer::periodicity] = ev.similarity.periodic;
  y[Layer::off_hours] = !series.events.empty() && ev.off_hours_fraction >= config_.off_hours_fraction_min;
  y[Layer::infrequent_system] = !ev.infrequent_systems.empty();
  y[Layer::uncommon_action] = !ev.uncommon_actions.empty();

  if (!ev.unauthorized_actions.empty()) {
    out.short_circuit = ShortCircuit::unauthorized_action;
  } else if (!ev.unauthorized_systems.empty()) {
    out.short_circuit = ShortCircuit::unauthorized_system;
  }
  return out;
}

SeverityScore Scorer::pair_severity(const EventSeries& series, const EmployeeActivity* activity) const {
  auto eval = evaluate_pair_vector(series, activity);
  SeverityScore score;
  score.evidence = std::move(eval.evidence);
  if (eval.short_circuit) {
    score.value = 1.0;
    score.short_circuit = eval.short_circuit;
  } else {
    score.value = weighted_distance(eval.vector, weights_);
    score.vector = eval.vector;
  }
  return score;
}

SeverityScore Scorer::client_severity(const EventSeries& client_series,
                                      const EmployeeActivity* activity) const {
  return pair_severity(client_series, activity);
}

SeverityScore employee_severity(const std::map<std::string, SeverityScore>& pairs_by_client) {
  SeverityScore best;
  for (const auto& [client, score] : pairs_by_client) {
    if (!best.anchor_client || score.value > best.value) {
      best = score;
      best.anchor_client = client;
    }
  }
  if (!best.anchor_client) best.vector = PatternVector{};
  return best;
}

// ---------------------------------------------------------------------------

const SeverityScore* SeverityTables::pair(const std::string& employee,
                                          const std::string& client) const {
  auto it = pairs.find({employee, client});
  return it == pairs.end() ? nullptr : &it->second;
}

double SeverityTables::employee_value(const std::string& id) const {
  auto it = employees.find(id);
  return it == employees.end() ? 0.0 : it->second.value;
}

double SeverityTables::client_value(const std::string& id) const {
  auto it = clients.find(id);
  return it == clients.end() ? 0.0 : it->second.value;
}

SeverityTables score_corpus(const EventStore& store, const Scorer& scorer) {
  SeverityTables tables;
  const auto activity = EmployeeActivity::from_store(store);
  std::set<std::string> warnings;
  auto note = [&](const SeverityScore& s) {
    warnings.insert(s.evidence.warnings.begin(), s.evidence.warnings.end());
  };

  std::map<std::string, std::map<std::string, SeverityScore>> by_employee;
  for (const auto& [employee, client] : store.pairs()) {
    auto score = scorer.pair_severity(store.series_for_pair(employee, client), &activity);
    note(score);
    by_employee[employee][client] = score;
    tables.pairs.emplace(std::pair{employee, client}, std::move(score));
  }
  for (const auto& [employee, pairs] : by_employee) {
    tables.employees.emplace(employee, employee_severity(pairs));
  }
  for (const auto& client : store.clients()) {
    auto score = scorer.client_severity(store.series_for_client(client), &activity);
    note(score);
    tables.clients.emplace(client, std::move(score));
  }
  tables.warnings.assign(warnings.begin(), warnings.end());
  return tables;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const PatternVector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (bool b : v.components) arr.push_back(b ? 1 : 0);
  return arr;
}

nlohmann::json to_json(const Evidence& e) {
  return {{"similarity", to_json(e.similarity)},
          {"off_hours_fraction", e.off_hours_fraction},
          {"event_count", e.event_count},
          {"peak_window_weight", e.peak_window_weight},
          {"unauthorized_systems", e.unauthorized_systems},
          {"infrequent_systems", e.infrequent_systems},
          {"unauthorized_actions", e.unauthorized_actions},
          {"uncommon_actions", e.uncommon_actions},
          {"warnings", e.warnings}};
}

nlohmann::json to_json(const SeverityScore& s) {
  nlohmann::json j{{"severity", s.value},
                   {"short_circuit", s.short_circuit ? nlohmann::json(to_string(*s.short_circuit))
                                                     : nlohmann::json(nullptr)},
                   {"vector", s.vector ? to_json(*s.vector) : nlohmann::json(nullptr)},
                   {"evidence", to_json(s.evidence)}};
  if (s.anchor_client) j["anchor_client"] = *s.anchor_client;
  return j;
}

nlohmann::json to_json(const SeverityTables& t, bool include_pairs) {
  auto rows = [](const std::map<std::string, SeverityScore>& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [id, s] : m) {
      auto j = to_json(s);
      j["id"] = id;
      arr.push_back(std::move(j));
    }
    return arr;
  };
  nlohmann::json j{{"employees", rows(t.employees)}, {"clients", rows(t.clients)},
                   {"warnings", t.warnings}};
  if (include_pairs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [key, s] : t.pairs) {
      auto row = to_json(s);
      row["employee"] = key.first;
      row["client"] = key.second;
      arr.push_back(std::move(row));
    }
    j["pairs"] = std::move(arr);
  }
  return j;
}

namespace {

void csv_row(std::ostringstream& out, const char* type, const std::string& id,
             const SeverityScore& s) {
  out << type << ',' << csv::escape(id) << ',' << std::setprecision(17) << s.value << ','
      << (s.short_circuit ? to_string(*s.short_circuit) : "");
  for (std::size_t i = 0; i < kLayerCount; ++i) {
    out << ',';
    if (s.vector) out << (s.vector->components[i] ? 1 : 0);
  }
  out << '\n';
}

}  // namespace

std::string to_csv(const SeverityTables& t, bool include_pairs) {
  std::ostringstream out;
  out << "entity_type,id,severity,short_circuit,y1,y2,y3,y4,y5\n";
  for (const auto& [id, s] : t.employees) csv_row(out, "employee", id, s);
  for (const auto& [id, s] : t.clients) csv_row(out, "client", id, s);
  if (include_pairs) {
    for (const auto& [key, s] : t.pairs) csv_row(out, "pair", key.first + "|" + key.second, s);
  }
  return out.str();
}

}  // namespace fraudlens
