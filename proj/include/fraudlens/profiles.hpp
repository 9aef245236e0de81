#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fraudlens/time.hpp"

namespace fraudlens {

// Weekly working-hours schedule (UTC-normalized) plus holidays. Anything
// outside a listed interval, on a day without intervals, or on a holiday is
// off-hours.
class WorkingCalendar {
 public:
  // Minutes since midnight, [start, end).
  using Interval = std::pair<int, int>;

  // Monday to Friday, 09:00-18:00.
  static WorkingCalendar standard();

  // Index 0 = Sunday ... 6 = Saturday.
  void set_day(unsigned weekday, std::vector<Interval> intervals);
  void add_holiday(Date d) { holidays_.insert(d); }

  bool is_working_time(Timestamp ts) const;

  const std::array<std::vector<Interval>, 7>& weekly() const { return weekly_; }
  const std::set<Date>& holidays() const { return holidays_; }

  // {"weekly": {"mon": [["09:00", "18:00"]], ...}, "holidays": ["2023-08-15"]}
  static WorkingCalendar from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  std::array<std::vector<Interval>, 7> weekly_;
  std::set<Date> holidays_;
};

// Auditor-maintained knowledge the decision tree reads. Employee entries fall
// back to a "*" entry when present; roles map employees onto common-action
// sets.
struct Profiles {
  WorkingCalendar working_calendar = WorkingCalendar::standard();
  std::map<std::string, std::set<std::string>> authorized_systems;
  std::set<std::string> unauthorized_actions;
  std::map<std::string, std::string> employee_roles;
  std::map<std::string, std::set<std::string>> common_actions;  // role -> actions
  std::set<std::string> fms_systems;

  // nullptr when neither the employee nor "*" has an entry.
  const std::set<std::string>* authorized_for(const std::string& employee) const;
  const std::set<std::string>* common_actions_for(const std::string& employee) const;
  bool is_fms(const std::string& system) const { return fms_systems.count(system) != 0; }

  static Profiles from_json(const nlohmann::json& j);
  static Profiles load(const std::string& path);
  nlohmann::json to_json() const;
};

}  // namespace fraudlens
