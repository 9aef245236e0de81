#include "fraudlens/plots.hpp"

#include <algorithm>
#include <set>

#include "fraudlens/errors.hpp"
#include "fraudlens/event_store.hpp"

namespace fraudlens {

using namespace std::chrono;

// ---------------------------------------------------------------- timeline

TimelinePlotData timeline_data(const std::vector<Event>& pair_events, std::vector<Date> billing_dates) {
  TimelinePlotData d;
  if (!pair_events.empty()) {
    d.employee = pair_events.front().employee;
    d.client = pair_events.front().client;
  }
  std::map<Date, std::size_t> per_day;
  for (const auto& e : pair_events) ++per_day[day_of(e.ts)];
  for (auto& [date, n] : per_day) d.points.push_back({date, n});
  d.billing_dates = std::move(billing_dates);
  return d;
}

TimelinePlotData timeline_data(const EventStore& store, const std::string& employee,
                               const std::string& client, std::vector<Date> billing_dates) {
  auto d = timeline_data(store.series_for_pair(employee, client).events, std::move(billing_dates));
  d.employee = employee;
  d.client = client;
  return d;
}

std::size_t BillingRegistry::load(std::istream& in) {
  std::string line;
  std::size_t n = 0, line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto client = j.at("client").get<std::string>();
      if (j.contains("billing_day_of_month")) {
        set_day_of_month(client, j.at("billing_day_of_month").get<int>());
      }
      if (j.contains("dates")) {
        std::vector<Date> dates;
        for (const auto& s : j.at("dates")) {
          auto d = parse_date(s.get<std::string>());
          if (!d) throw ConfigError("bad date");
          dates.push_back(*d);
        }
        add_dates(client, std::move(dates));
      }
      ++n;
    } catch (const std::exception& e) {
      throw ConfigError("billing line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return n;
}

void BillingRegistry::set_day_of_month(const std::string& client, int day) {
  if (day < 1 || day > 31) throw ConfigError("billing day of month must be in 1..31");
  days_[client] = day;
}

void BillingRegistry::add_dates(const std::string& client, std::vector<Date> dates) {
  auto& v = dates_[client];
  v.insert(v.end(), dates.begin(), dates.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<Date> BillingRegistry::dates_for(const std::string& client, Date from, Date to) const {
  std::set<Date> out;
  if (auto it = dates_.find(client); it != dates_.end()) {
    for (auto d : it->second) {
      if (d >= from && d <= to) out.insert(d);
    }
  }
  if (auto it = days_.find(client); it != days_.end() && from <= to) {
    const year_month_day a{from};
    year_month ym{a.year(), a.month()};
    const year_month_day b{to};
    const year_month last{b.year(), b.month()};
    for (; ym <= last; ym += months{1}) {
      const unsigned end = static_cast<unsigned>((ym / std::chrono::last).day());
      const unsigned dom = std::min(static_cast<unsigned>(it->second), end);
      const Date d = sys_days{ym / day{dom}};
      if (d >= from && d <= to) out.insert(d);
    }
  }
  return {out.begin(), out.end()};
}

// ---------------------------------------------------------------- periodicity plot

PeriodicityPlotData periodicity_plot_data(const std::vector<Event>& pair_events) {
  PeriodicityPlotData d;
  if (!pair_events.empty()) {
    d.employee = pair_events.front().employee;
    d.client = pair_events.front().client;
  }
  std::map<std::string, std::set<Date>> days;
  for (const auto& e : pair_events) days[e.action].insert(day_of(e.ts));
  for (auto& [action, set] : days) {
    auto& pts = d.series[action];
    int k = 1;
    for (auto date : set) {
      const auto dom = static_cast<int>(static_cast<unsigned>(year_month_day{date}.day()));
      pts.push_back({k++, dom, date});
    }
  }
  return d;
}

PeriodicityPlotData periodicity_plot_data(const EventStore& store, const std::string& employee,
                                          const std::string& client) {
  auto d = periodicity_plot_data(store.series_for_pair(employee, client).events);
  d.employee = employee;
  d.client = client;
  return d;
}

// ---------------------------------------------------------------- login monitoring

void AuthFlagConfig::validate() const {
  if (fail_y_days < 1) throw ConfigError("fail_y_days must be >= 1");
}

std::string to_string(AuthFlagKind k) {
  switch (k) {
    case AuthFlagKind::burst_failures: return "burst_failures";
    case AuthFlagKind::multi_ip: return "multi_ip";
    case AuthFlagKind::multi_computer: return "multi_computer";
  }
  return "unknown";
}

std::vector<AuthFlag> auth_pattern_flags(const std::vector<AuthEvent>& events, const AuthFlagConfig& cfg) {
  cfg.validate();
  struct PerEmployee {
    std::vector<Timestamp> failures;
    std::set<std::string> ips;
    std::set<std::string> computers;
  };
  std::map<std::string, PerEmployee> by_emp;
  for (const auto& e : events) {
    const auto kind = e.action.kind;
    if (kind != AuthActionKind::login && kind != AuthActionKind::login_failure) continue;
    auto& p = by_emp[e.employee];
    if (kind == AuthActionKind::login_failure) p.failures.push_back(e.ts);
    p.ips.insert(e.ip);
    p.computers.insert(e.computer);
  }

  std::vector<AuthFlag> flags;
  const seconds window{static_cast<std::int64_t>(cfg.fail_y_days) * 86400};
  for (auto& [emp, p] : by_emp) {
    auto& f = p.failures;
    std::sort(f.begin(), f.end());
    std::size_t best = 0, best_i = 0, best_j = 0;
    for (std::size_t i = 0, j = 0; j < f.size(); ++j) {
      while (f[j] - f[i] >= window) ++i;
      if (j - i + 1 > best) {
        best = j - i + 1;
        best_i = i;
        best_j = j;
      }
    }
    if (best > cfg.fail_x) {
      flags.push_back({emp, AuthFlagKind::burst_failures,
                       {{"failures", best},
                        {"window_start", format_iso8601(f[best_i])},
                        {"window_end", format_iso8601(f[best_j])},
                        {"fail_x", cfg.fail_x},
                        {"fail_y_days", cfg.fail_y_days}}});
    }
    if (p.ips.size() >= 2) {
      flags.push_back({emp, AuthFlagKind::multi_ip, {{"count", p.ips.size()}, {"ips", p.ips}}});
    }
    if (p.computers.size() >= 2) {
      flags.push_back({emp, AuthFlagKind::multi_computer,
                       {{"count", p.computers.size()}, {"computers", p.computers}}});
    }
  }
  return flags;
}

std::vector<AuthFlag> auth_pattern_flags(const EventStore& store, const AuthFlagConfig& cfg) {
  return auth_pattern_flags(store.query_auth(QueryFilter{}), cfg);
}

ParallelCoordsData parallel_coords_data(const std::vector<AuthEvent>& events, const AuthFlagConfig& cfg) {
  static const char* kAxes[] = {"employee", "ip", "computer", "action"};
  ParallelCoordsData d;
  std::array<std::map<std::string, std::size_t>, 4> counts;
  std::array<std::map<std::pair<std::string, std::string>, std::size_t>, 3> links;
  for (const auto& e : events) {
    const std::array<std::string, 4> v{e.employee, e.ip, e.computer, e.action.to_string()};
    for (std::size_t a = 0; a < 4; ++a) ++counts[a][v[a]];
    for (std::size_t a = 0; a < 3; ++a) ++links[a][{v[a], v[a + 1]}];
  }
  for (std::size_t a = 0; a < 4; ++a) {
    Axis axis{kAxes[a], {}};
    std::size_t max = 0;
    for (auto& [value, n] : counts[a]) {
      axis.nodes.push_back({value, n, 0.0});
      max = std::max(max, n);
    }
    std::stable_sort(axis.nodes.begin(), axis.nodes.end(),
                     [](const AxisNode& x, const AxisNode& y) { return x.count > y.count; });
    for (auto& n : axis.nodes) n.weight = static_cast<double>(n.count) / static_cast<double>(max);
    d.axes.push_back(std::move(axis));
  }
  for (std::size_t a = 0; a < 3; ++a) {
    std::size_t max = 0;
    for (auto& [k, n] : links[a]) max = std::max(max, n);
    for (auto& [k, n] : links[a]) {
      d.edges.push_back({a, k.first, k.second, n, static_cast<double>(n) / static_cast<double>(max)});
    }
  }
  d.flags = auth_pattern_flags(events, cfg);
  return d;
}

ParallelCoordsData parallel_coords_data(const EventStore& store, const QueryFilter& filter,
                                        const AuthFlagConfig& cfg) {
  return parallel_coords_data(store.query_auth(filter), cfg);
}

// ---------------------------------------------------------------- json

nlohmann::json to_json(const TimelinePlotData& d) {
  nlohmann::json pts = nlohmann::json::array(), billing = nlohmann::json::array();
  for (const auto& p : d.points) pts.push_back({{"date", format_date(p.date)}, {"count", p.count}});
  for (auto b : d.billing_dates) billing.push_back(format_date(b));
  return {{"employee", d.employee}, {"client", d.client}, {"points", pts}, {"billing_dates", billing}};
}

nlohmann::json to_json(const PeriodicityPlotData& d) {
  nlohmann::json series = nlohmann::json::object();
  for (const auto& [action, pts] : d.series) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : pts) {
      arr.push_back({{"k", p.k}, {"day_of_month", p.day_of_month}, {"date", format_date(p.date)}});
    }
    series[action] = arr;
  }
  return {{"employee", d.employee}, {"client", d.client}, {"series", series}};
}

nlohmann::json to_json(const AuthFlag& f) {
  return {{"employee", f.employee}, {"kind", to_string(f.kind)}, {"detail", f.detail}};
}

nlohmann::json to_json(const std::vector<AuthFlag>& flags) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& f : flags) out.push_back(to_json(f));
  return out;
}

nlohmann::json to_json(const ParallelCoordsData& d) {
  nlohmann::json axes = nlohmann::json::array(), edges = nlohmann::json::array();
  for (const auto& a : d.axes) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : a.nodes) nodes.push_back({{"value", n.value}, {"count", n.count}, {"weight", n.weight}});
    axes.push_back({{"name", a.name}, {"nodes", nodes}});
  }
  for (const auto& e : d.edges) {
    edges.push_back({{"from_axis", d.axes[e.from_axis].name},
                     {"to_axis", d.axes[e.from_axis + 1].name},
                     {"from", e.from},
                     {"to", e.to},
                     {"count", e.count},
                     {"weight", e.weight}});
  }
  return {{"axes", axes}, {"edges", edges}, {"flags", to_json(d.flags)}};
}

}  // namespace fraudlens
