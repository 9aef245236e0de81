#include "fraudlens/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "fraudlens/errors.hpp"
#include "fraudlens/event_store.hpp"

namespace fraudlens {

namespace {

using namespace std::chrono;

// Portable draws on top of mt19937_64 (the std distributions are
// implementation-defined, which would break cross-platform determinism).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  int uniform(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 gen_;
};

const std::vector<std::string> kBusinessSystems = {"CRM", "BILLING"};
const std::string kFmsSystem = "FMS";
const std::string kForbiddenAction = "A900";

std::vector<std::string> common_actions() {
  std::vector<std::string> out;
  for (int a = 101; a <= 110; ++a) out.push_back("A" + std::to_string(a));
  return out;
}

bool is_weekday(Date d) {
  const unsigned wd = weekday{d}.c_encoding();
  return wd >= 1 && wd <= 5;
}

Timestamp at(Date d, int minute_of_day, int second) {
  return Timestamp{d} + minutes{minute_of_day} + seconds{second};
}

std::string padded(char prefix, std::size_t n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

int width_for(std::size_t count) {
  int w = 4;
  while (count >= static_cast<std::size_t>(std::pow(10, w))) ++w;
  return w;
}

Date day_in_month(year_month ym, int dom) {
  return sys_days{ym / day{static_cast<unsigned>(dom)}};
}

struct Population {
  std::vector<std::string> employees;
  std::vector<int> primary_system;  // index into kBusinessSystems
};

class Generator {
 public:
  explicit Generator(const SyntheticSpec& spec) : spec_(spec), rng_(spec.seed) {}

  SyntheticCorpus run();

 private:
  Date end() const { return spec_.start + days{spec_.span_days}; }
  bool in_span(Date d) const { return d >= spec_.start && d < end(); }

  Timestamp background_time();
  Timestamp working_time(Date d) { return at(d, rng_.uniform(9 * 60, 17 * 60 + 59), rng_.uniform(0, 59)); }
  const std::string& business_system(std::size_t emp);
  Event make(std::size_t emp, const std::string& client, Timestamp ts, std::string action,
             std::string system) {
    return Event{ts, pop_.employees[emp], client, std::move(action), std::move(system), nlohmann::json::object()};
  }

  void build_population();
  void background();
  std::size_t next_scenario_employee();
  nlohmann::json inject(const InjectedScenario& s);
  nlohmann::json monthly_fraud(const InjectedScenario& s);
  nlohmann::json monitoring(const InjectedScenario& s);
  nlohmann::json unauthorized(const InjectedScenario& s);
  nlohmann::json split_client(const InjectedScenario& s);
  nlohmann::json failed_logins(const InjectedScenario& s);
  void auth_background();

  // Monthly days in [lo, hi] whose successive gaps stay within 30 +/- 2.
  std::vector<Date> monthly_days(year_month first, int count, int lo, int hi, bool weekdays_only);

  const SyntheticSpec& spec_;
  Rng rng_;
  Population pop_;
  std::vector<std::size_t> scenario_pool_;
  std::vector<Event> events_;
  std::vector<AuthEvent> auth_;
  std::vector<std::string> actions_ = common_actions();
};

const std::string& Generator::business_system(std::size_t emp) {
  const int primary = pop_.primary_system[emp];
  const int pick = rng_.chance(0.75) ? primary : 1 - primary;
  return kBusinessSystems[static_cast<std::size_t>(pick)];
}

Timestamp Generator::background_time() {
  Date d = spec_.start + days{rng_.uniform(0, spec_.span_days - 1)};
  if (rng_.chance(spec_.off_hours_rate)) {
    return at(d, rng_.uniform(19 * 60, 23 * 60 + 59), rng_.uniform(0, 59));
  }
  for (int tries = 0; tries < 16 && !is_weekday(d); ++tries) {
    d = spec_.start + days{rng_.uniform(0, spec_.span_days - 1)};
  }
  return working_time(d);
}

void Generator::build_population() {
  const int w = width_for(spec_.employees);
  for (std::size_t i = 0; i < spec_.employees; ++i) {
    pop_.employees.push_back(padded('E', i + 1, w));
    pop_.primary_system.push_back(rng_.uniform(0, 1));
  }
  scenario_pool_.resize(spec_.employees);
  std::iota(scenario_pool_.begin(), scenario_pool_.end(), std::size_t{0});
  rng_.shuffle(scenario_pool_);
  std::reverse(scenario_pool_.begin(), scenario_pool_.end());
}

std::size_t Generator::next_scenario_employee() {
  if (scenario_pool_.empty()) throw ConfigError("not enough employees for the injected scenarios");
  const auto e = scenario_pool_.back();
  scenario_pool_.pop_back();
  return e;
}

std::array<std::size_t, kOccurrenceBuckets> allocate_clients(
    std::size_t clients, const std::array<double, kOccurrenceBuckets>& hist) {
  std::array<std::size_t, kOccurrenceBuckets> counts{};
  std::array<double, kOccurrenceBuckets> rem{};
  std::size_t assigned = 0;
  for (std::size_t b = 0; b < kOccurrenceBuckets; ++b) {
    const double exact = hist[b] * static_cast<double>(clients);
    counts[b] = static_cast<std::size_t>(std::floor(exact));
    rem[b] = exact - std::floor(exact);
    assigned += counts[b];
  }
  std::array<std::size_t, kOccurrenceBuckets> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < clients; ++k, ++assigned) ++counts[order[k % kOccurrenceBuckets]];
  return counts;
}

void Generator::background() {
  const auto counts = allocate_clients(spec_.clients, spec_.occurrence_histogram);
  std::vector<std::size_t> buckets;
  for (std::size_t b = 0; b < kOccurrenceBuckets; ++b) buckets.insert(buckets.end(), counts[b], b);
  rng_.shuffle(buckets);

  const int w = std::max(6, width_for(spec_.clients));
  const std::size_t n_emp = pop_.employees.size();
  for (std::size_t c = 0; c < buckets.size(); ++c) {
    const std::string client = padded('C', c + 1, w);
    int occurrences = 1;
    switch (buckets[c]) {
      case 1: occurrences = rng_.uniform(2, 5); break;
      case 2: occurrences = rng_.uniform(6, 10); break;
      case 3: occurrences = rng_.uniform(11, 20); break;
      default: break;
    }
    const std::size_t home = rng_.index(n_emp);
    const bool heavy = buckets[c] == 3;
    if (heavy && rng_.chance(0.5)) {
      // Supervised through the fraud-management system by one employee.
      for (int k = 0; k < occurrences; ++k) {
        events_.push_back(make(home, client, background_time(),
                               actions_[rng_.index(actions_.size())], kFmsSystem));
      }
      continue;
    }
    std::map<std::size_t, int> per_employee;
    for (int k = 0; k < occurrences; ++k) {
      std::size_t emp = (k == 0 || rng_.chance(0.7)) ? home : rng_.index(n_emp);
      // Keep non-FMS background pairs at or under ten events.
      for (int tries = 0; per_employee[emp] >= 10 && tries < 64; ++tries) emp = rng_.index(n_emp);
      ++per_employee[emp];
      events_.push_back(make(emp, client, background_time(), actions_[rng_.index(actions_.size())],
                             business_system(emp)));
    }
  }
}

std::vector<Date> Generator::monthly_days(year_month first, int count, int lo, int hi,
                                          bool weekdays_only) {
  std::vector<Date> out;
  std::vector<int> candidates;
  for (int d = lo; d <= hi; ++d) {
    if (!weekdays_only || is_weekday(day_in_month(first, d))) candidates.push_back(d);
  }
  if (candidates.empty()) candidates = {lo};
  out.push_back(day_in_month(first, candidates[rng_.index(candidates.size())]));
  for (int m = 1; m < count; ++m) {
    const year_month ym = first + months{m};
    std::vector<int> strict, loose;
    for (int d = lo; d <= hi; ++d) {
      const Date cand = day_in_month(ym, d);
      const auto gap = (cand - out.back()).count();
      if (gap < 28 || gap > 32) continue;
      loose.push_back(d);
      if (!weekdays_only || is_weekday(cand)) strict.push_back(d);
    }
    const auto& pool = strict.empty() ? loose : strict;
    if (pool.empty()) throw ConfigError("cannot place monthly scenario days");
    out.push_back(day_in_month(ym, pool[rng_.index(pool.size())]));
  }
  return out;
}

nlohmann::json Generator::monthly_fraud(const InjectedScenario& s) {
  if (s.months < 2 || s.events_per_day < 1 || s.burst_events < 0 || s.noise_events < 0) {
    throw ConfigError("monthly_fraud: invalid scenario parameters");
  }
  const std::size_t emp = next_scenario_employee();
  const std::string client = "S-" + s.label;
  const year_month first{year_month_day{spec_.start}.year(), year_month_day{spec_.start}.month()};

  std::set<Date> used;
  // Aperiodic preparation in the first month.
  std::vector<Date> burst;
  for (int tries = 0; static_cast<int>(burst.size()) < s.burst_events && tries < 1000; ++tries) {
    const Date d = day_in_month(first, rng_.uniform(1, 25));
    if (!in_span(d) || !is_weekday(d) || used.count(d)) continue;
    used.insert(d);
    burst.push_back(d);
  }
  if (static_cast<int>(burst.size()) < s.burst_events) {
    throw ConfigError("monthly_fraud: span too short for the burst");
  }
  const auto periodic = monthly_days(first + months{1}, s.months, 10, 15, true);
  if (!in_span(periodic.back())) throw ConfigError("monthly_fraud: span too short for " +
                                                   std::to_string(s.months) + " months");
  for (auto d : periodic) used.insert(d);

  std::vector<Date> noise;
  for (int tries = 0; static_cast<int>(noise.size()) < s.noise_events && tries < 1000; ++tries) {
    const std::size_t k = rng_.index(periodic.size() - 1);
    const auto gap = static_cast<int>((periodic[k + 1] - periodic[k]).count());
    const Date d = periodic[k] + days{rng_.uniform(1, gap - 1)};
    if (!is_weekday(d) || used.count(d)) continue;
    used.insert(d);
    noise.push_back(d);
  }

  std::size_t n = 0;
  const std::size_t before = events_.size();
  for (auto d : burst) {
    events_.push_back(make(emp, client, working_time(d), actions_[rng_.index(actions_.size())],
                           kBusinessSystems[static_cast<std::size_t>(pop_.primary_system[emp])]));
  }
  for (auto d : periodic) {
    for (int k = 0; k < s.events_per_day; ++k) {
      // A101 / A107 alternate, through both business systems.
      const std::string action = k % 2 == 0 ? "A101" : "A107";
      events_.push_back(make(emp, client, working_time(d), action,
                             kBusinessSystems[static_cast<std::size_t>(k % 2)]));
    }
  }
  for (auto d : noise) {
    events_.push_back(make(emp, client, working_time(d), actions_[rng_.index(actions_.size())],
                           kBusinessSystems[static_cast<std::size_t>(pop_.primary_system[emp])]));
  }
  n = events_.size() - before;

  nlohmann::json days_json = nlohmann::json::array();
  for (auto d : periodic) days_json.push_back(format_date(d));
  return {{"employee", pop_.employees[emp]}, {"client", client}, {"events", n},
          {"periodic_days", days_json}};
}

nlohmann::json Generator::monitoring(const InjectedScenario& s) {
  if (s.months < 2 || s.events_per_day < 1) throw ConfigError("monitoring: invalid scenario parameters");
  const std::size_t emp = next_scenario_employee();
  const std::string client = "S-" + s.label;
  const year_month first{year_month_day{spec_.start}.year(), year_month_day{spec_.start}.month()};
  const auto periodic = monthly_days(first, s.months, 18, 25, false);
  if (!in_span(periodic.front()) || !in_span(periodic.back())) {
    throw ConfigError("monitoring: span too short");
  }
  const std::size_t before = events_.size();
  auto evening = [&](Date d) { return at(d, rng_.uniform(20 * 60, 22 * 60 + 59), rng_.uniform(0, 59)); };
  for (auto d : periodic) {
    for (int k = 0; k < s.events_per_day; ++k) {
      events_.push_back(make(emp, client, evening(d), "A101", kFmsSystem));
    }
  }
  for (int k = 0; k < s.noise_events; ++k) {
    const Date d = periodic.front() + days{rng_.uniform(3, 12)};
    events_.push_back(make(emp, client, evening(d), "A101", kFmsSystem));
  }
  nlohmann::json days_json = nlohmann::json::array();
  for (auto d : periodic) days_json.push_back(format_date(d));
  return {{"employee", pop_.employees[emp]}, {"client", client},
          {"events", events_.size() - before}, {"periodic_days", days_json}};
}

nlohmann::json Generator::unauthorized(const InjectedScenario& s) {
  const std::size_t emp = next_scenario_employee();
  const std::string client = "S-" + s.label;
  events_.push_back(make(emp, client, background_time(), "A102", business_system(emp)));
  events_.push_back(make(emp, client, background_time(), kForbiddenAction, business_system(emp)));
  return {{"employee", pop_.employees[emp]}, {"client", client}, {"events", 2},
          {"action", kForbiddenAction}};
}

nlohmann::json Generator::split_client(const InjectedScenario& s) {
  if (s.months < 1) throw ConfigError("split_client: invalid scenario parameters");
  const std::size_t a = next_scenario_employee();
  const std::size_t b = next_scenario_employee();
  const std::string client = "S-" + s.label;
  const year_month first{year_month_day{spec_.start}.year(), year_month_day{spec_.start}.month()};
  for (int m = 0; m < s.months; ++m) {
    const year_month ym = first + months{m};
    const Date da = day_in_month(ym, 5);
    const Date db = day_in_month(ym, 20);
    if (!in_span(da) || !in_span(db)) throw ConfigError("split_client: span too short");
    events_.push_back(make(a, client, working_time(da), "A102",
                           kBusinessSystems[static_cast<std::size_t>(pop_.primary_system[a])]));
    events_.push_back(make(b, client, working_time(db), "A102",
                           kBusinessSystems[static_cast<std::size_t>(pop_.primary_system[b])]));
  }
  return {{"employees", {pop_.employees[a], pop_.employees[b]}},
          {"client", client},
          {"events", 2 * s.months}};
}

nlohmann::json Generator::failed_logins(const InjectedScenario& s) {
  const std::size_t emp = next_scenario_employee();
  const Date d = spec_.start + days{rng_.uniform(0, spec_.span_days - 1)};
  const int base = rng_.uniform(9 * 60, 15 * 60);
  const int failures = std::max(1, s.burst_events > 0 ? s.burst_events * 2 : 6);
  for (int k = 0; k < failures; ++k) {
    const bool second = k % 2 == 1;
    auth_.push_back(AuthEvent{at(d, base + k * 5, 0), pop_.employees[emp],
                              second ? "10.9.9.9" : "10.0.0.1", second ? "WS-UNKNOWN" : "WS-HOME",
                              AuthAction{AuthActionKind::login_failure, {}}});
  }
  return {{"employee", pop_.employees[emp]}, {"date", format_date(d)}, {"failures", failures}};
}

void Generator::auth_background() {
  for (std::size_t i = 0; i < pop_.employees.size(); ++i) {
    char ip[32];
    std::snprintf(ip, sizeof ip, "10.1.%zu.%zu", (i / 250) % 250, i % 250 + 1);
    const std::string computer = "WS-" + pop_.employees[i];
    for (std::size_t k = 0; k < spec_.auth_events_per_employee; ++k) {
      const AuthActionKind kind = rng_.chance(0.05)   ? AuthActionKind::login_failure
                                  : rng_.chance(0.4) ? AuthActionKind::logout
                                                     : AuthActionKind::login;
      auth_.push_back(AuthEvent{background_time(), pop_.employees[i], ip, computer, AuthAction{kind, {}}});
    }
  }
}

nlohmann::json Generator::inject(const InjectedScenario& s) {
  nlohmann::json truth;
  switch (s.kind) {
    case InjectedScenario::Kind::monthly_fraud: truth = monthly_fraud(s); break;
    case InjectedScenario::Kind::monitoring: truth = monitoring(s); break;
    case InjectedScenario::Kind::unauthorized_action: truth = unauthorized(s); break;
    case InjectedScenario::Kind::split_client: truth = split_client(s); break;
    case InjectedScenario::Kind::failed_login_burst: truth = failed_logins(s); break;
  }
  truth["label"] = s.label;
  truth["kind"] = to_string(s.kind);
  return truth;
}

std::size_t scenario_min_events(const InjectedScenario& s) {
  switch (s.kind) {
    case InjectedScenario::Kind::monthly_fraud:
      return static_cast<std::size_t>(s.burst_events + s.months * s.events_per_day + s.noise_events);
    case InjectedScenario::Kind::monitoring:
      return static_cast<std::size_t>(s.months * s.events_per_day + s.noise_events);
    case InjectedScenario::Kind::unauthorized_action: return 2;
    case InjectedScenario::Kind::split_client: return static_cast<std::size_t>(2 * s.months);
    case InjectedScenario::Kind::failed_login_burst: return 0;
  }
  return 0;
}

void validate(const SyntheticSpec& spec) {
  double sum = 0.0;
  for (double f : spec.occurrence_histogram) {
    if (!(f >= 0.0)) throw ConfigError("occurrence histogram fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ConfigError("occurrence histogram must sum to 1");
  if (spec.employees == 0 && spec.clients > 0) throw ConfigError("clients need at least one employee");
  if (spec.span_days < 1) throw ConfigError("span_days must be >= 1");
  if (!(spec.off_hours_rate >= 0.0 && spec.off_hours_rate <= 1.0)) {
    throw ConfigError("off_hours_rate must be in [0, 1]");
  }
  std::set<std::string> labels;
  for (const auto& s : spec.injected_scenarios) {
    if (s.label.empty()) throw ConfigError("injected scenarios need a label");
    if (!labels.insert(s.label).second) throw ConfigError("duplicate scenario label '" + s.label + "'");
  }
  if (spec.max_events) {
    const auto counts = allocate_clients(spec.clients, spec.occurrence_histogram);
    std::size_t minimum = counts[0] + 2 * counts[1] + 6 * counts[2] + 11 * counts[3];
    for (const auto& s : spec.injected_scenarios) minimum += scenario_min_events(s);
    if (minimum > *spec.max_events) {
      throw ConfigError("infeasible corpus: the histogram needs at least " + std::to_string(minimum) +
                        " events but max_events is " + std::to_string(*spec.max_events));
    }
  }
}

SyntheticCorpus Generator::run() {
  validate(spec_);
  build_population();
  background();
  nlohmann::json scenarios = nlohmann::json::array();
  for (const auto& s : spec_.injected_scenarios) scenarios.push_back(inject(s));
  auth_background();

  // Stable time order makes exports and manifests reproducible.
  std::stable_sort(events_.begin(), events_.end(),
                   [](const Event& a, const Event& b) { return a.ts < b.ts; });
  std::stable_sort(auth_.begin(), auth_.end(),
                   [](const AuthEvent& a, const AuthEvent& b) { return a.ts < b.ts; });

  SyntheticCorpus corpus;
  std::set<std::string> systems(kBusinessSystems.begin(), kBusinessSystems.end());
  systems.insert(kFmsSystem);
  corpus.profiles = {
      {"authorized_systems", {{"*", systems}}},
      {"unauthorized_actions", {kForbiddenAction}},
      {"employee_roles", nlohmann::json::object()},
      {"common_actions", {{"*", actions_}}},
      {"fms_systems", {kFmsSystem}},
  };
  corpus.manifest = {{"spec", spec_.to_json()},
                     {"scenarios", scenarios},
                     {"stats", to_json(compute_stats(events_))},
                     {"auth_events", auth_.size()}};
  corpus.events = std::move(events_);
  corpus.auth_events = std::move(auth_);
  return corpus;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(InjectedScenario::Kind k) {
  switch (k) {
    case InjectedScenario::Kind::monthly_fraud: return "monthly_fraud";
    case InjectedScenario::Kind::monitoring: return "monitoring";
    case InjectedScenario::Kind::unauthorized_action: return "unauthorized_action";
    case InjectedScenario::Kind::split_client: return "split_client";
    case InjectedScenario::Kind::failed_login_burst: return "failed_login_burst";
  }
  return "unknown";
}

InjectedScenario InjectedScenario::from_json(const nlohmann::json& j) {
  InjectedScenario s;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "monthly_fraud") s.kind = Kind::monthly_fraud;
  else if (kind == "monitoring") s.kind = Kind::monitoring;
  else if (kind == "unauthorized_action") s.kind = Kind::unauthorized_action;
  else if (kind == "split_client") s.kind = Kind::split_client;
  else if (kind == "failed_login_burst") s.kind = Kind::failed_login_burst;
  else throw ConfigError("unknown scenario kind '" + kind + "'");
  s.label = j.value("label", kind);
  if (s.kind == Kind::split_client) s.months = 6;
  s.months = j.value("months", s.months);
  s.burst_events = j.value("burst_events", s.burst_events);
  s.events_per_day = j.value("events_per_day", s.events_per_day);
  s.noise_events = j.value("noise_events", s.noise_events);
  return s;
}

nlohmann::json InjectedScenario::to_json() const {
  return {{"kind", to_string(kind)},         {"label", label},
          {"months", months},                {"burst_events", burst_events},
          {"events_per_day", events_per_day}, {"noise_events", noise_events}};
}

SyntheticSpec SyntheticSpec::scaled(double factor) const {
  SyntheticSpec s = *this;
  s.employees = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(employees * factor)));
  s.clients = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(clients * factor)));
  return s;
}

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  try {
    s.employees = j.value("employees", s.employees);
    s.clients = j.value("clients", s.clients);
    s.span_days = j.value("span_days", s.span_days);
    if (auto it = j.find("start"); it != j.end()) {
      auto d = parse_date(it->get<std::string>());
      if (!d) throw ConfigError("invalid start date");
      s.start = *d;
    }
    if (auto it = j.find("occurrence_histogram"); it != j.end()) {
      const auto v = it->get<std::vector<double>>();
      if (v.size() != kOccurrenceBuckets) throw ConfigError("occurrence_histogram needs 4 buckets");
      std::copy(v.begin(), v.end(), s.occurrence_histogram.begin());
    }
    if (auto it = j.find("injected_scenarios"); it != j.end()) {
      for (const auto& sc : *it) s.injected_scenarios.push_back(InjectedScenario::from_json(sc));
    }
    s.seed = j.value("seed", s.seed);
    if (auto it = j.find("max_events"); it != j.end() && !it->is_null()) {
      s.max_events = it->get<std::size_t>();
    }
    s.off_hours_rate = j.value("off_hours_rate", s.off_hours_rate);
    s.auth_events_per_employee = j.value("auth_events_per_employee", s.auth_events_per_employee);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  return s;
}

nlohmann::json SyntheticSpec::to_json() const {
  nlohmann::json scenarios = nlohmann::json::array();
  for (const auto& s : injected_scenarios) scenarios.push_back(s.to_json());
  return {{"employees", employees},
          {"clients", clients},
          {"span_days", span_days},
          {"start", format_date(start)},
          {"occurrence_histogram", occurrence_histogram},
          {"injected_scenarios", scenarios},
          {"seed", seed},
          {"max_events", max_events ? nlohmann::json(*max_events) : nlohmann::json(nullptr)},
          {"off_hours_rate", off_hours_rate},
          {"auth_events_per_employee", auth_events_per_employee}};
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec) {
  return Generator(spec).run();
}

void persist_corpus(const SyntheticCorpus& corpus, EventStore& store,
                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  store.append(corpus.events);
  store.append_auth(corpus.auth_events);
  auto write = [&](const char* name, const nlohmann::json& doc) {
    std::ofstream out(dir / name, std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) throw IngestError(std::string("cannot write ") + name);
  };
  write("manifest.json", corpus.manifest);
  write("profiles.json", corpus.profiles);
}

}  // namespace fraudlens
