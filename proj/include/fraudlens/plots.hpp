#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fraudlens/event.hpp"

namespace fraudlens {

class EventStore;

// ---------------------------------------------------------------- timeline

struct TimelinePoint {
  Date date;
  std::size_t count = 0;
  friend bool operator==(const TimelinePoint&, const TimelinePoint&) = default;
};

struct TimelinePlotData {
  std::string employee;
  std::string client;
  std::vector<TimelinePoint> points;  // ascending, one per UTC date with events
  std::vector<Date> billing_dates;
};

TimelinePlotData timeline_data(const std::vector<Event>& pair_events,
                               std::vector<Date> billing_dates = {});
TimelinePlotData timeline_data(const EventStore& store, const std::string& employee,
                               const std::string& client, std::vector<Date> billing_dates = {});

// Per-client billing information: either a fixed day of the month or
// explicit dates. JSONL lines {"client": .., "billing_day_of_month": 10} or
// {"client": .., "dates": ["2023-05-10", ...]}.
class BillingRegistry {
 public:
  // Returns the number of records read; throws ConfigError on a bad line.
  std::size_t load(std::istream& in);
  void set_day_of_month(const std::string& client, int day);
  void add_dates(const std::string& client, std::vector<Date> dates);

  // Billing dates within [from, to]. A day of month past the end of a short
  // month falls on its last day.
  std::vector<Date> dates_for(const std::string& client, Date from, Date to) const;
  bool empty() const { return days_.empty() && dates_.empty(); }

 private:
  std::map<std::string, int> days_;
  std::map<std::string, std::vector<Date>> dates_;
};

// ---------------------------------------------------------------- periodicity plot

struct PeriodicityPoint {
  int k = 0;             // occurrence index from 1
  int day_of_month = 0;  // 1..31, UTC
  Date date;
  friend bool operator==(const PeriodicityPoint&, const PeriodicityPoint&) = default;
};

struct PeriodicityPlotData {
  std::string employee;
  std::string client;
  std::map<std::string, std::vector<PeriodicityPoint>> series;  // by action
};

PeriodicityPlotData periodicity_plot_data(const std::vector<Event>& pair_events);
PeriodicityPlotData periodicity_plot_data(const EventStore& store, const std::string& employee,
                                          const std::string& client);

// ---------------------------------------------------------------- login monitoring

struct AuthFlagConfig {
  std::size_t fail_x = 5;  // strictly more failures than this
  int fail_y_days = 1;     // within a window shorter than this many days

  void validate() const;
};

enum class AuthFlagKind { burst_failures, multi_ip, multi_computer };
std::string to_string(AuthFlagKind k);

struct AuthFlag {
  std::string employee;
  AuthFlagKind kind = AuthFlagKind::burst_failures;
  nlohmann::json detail;
};

std::vector<AuthFlag> auth_pattern_flags(const std::vector<AuthEvent>& events,
                                         const AuthFlagConfig& cfg = {});
std::vector<AuthFlag> auth_pattern_flags(const EventStore& store, const AuthFlagConfig& cfg = {});

struct AxisNode {
  std::string value;
  std::size_t count = 0;
  double weight = 0.0;  // count / largest count on the axis
};

struct Axis {
  std::string name;
  std::vector<AxisNode> nodes;  // count desc, value asc
};

struct AxisEdge {
  std::size_t from_axis = 0;  // to_axis = from_axis + 1
  std::string from;
  std::string to;
  std::size_t count = 0;
  double weight = 0.0;  // count / largest count between the same two axes
};

struct ParallelCoordsData {
  std::vector<Axis> axes;  // employee, ip, computer, action
  std::vector<AxisEdge> edges;
  std::vector<AuthFlag> flags;
};

ParallelCoordsData parallel_coords_data(const std::vector<AuthEvent>& events,
                                        const AuthFlagConfig& cfg = {});
ParallelCoordsData parallel_coords_data(const EventStore& store, const QueryFilter& filter,
                                        const AuthFlagConfig& cfg = {});

nlohmann::json to_json(const TimelinePlotData& d);
nlohmann::json to_json(const PeriodicityPlotData& d);
nlohmann::json to_json(const AuthFlag& f);
nlohmann::json to_json(const std::vector<AuthFlag>& flags);
nlohmann::json to_json(const ParallelCoordsData& d);

}  // namespace fraudlens
