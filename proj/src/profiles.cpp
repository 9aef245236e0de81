#include "fraudlens/profiles.hpp"

#include <cstdio>
#include <fstream>

#include "fraudlens/errors.hpp"

namespace fraudlens {

namespace {

constexpr std::array<const char*, 7> kDayNames = {"sun", "mon", "tue", "wed", "thu", "fri", "sat"};

int parse_clock(const std::string& text) {
  int h = -1, m = -1;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d:%d%c", &h, &m, &tail) != 2 || h < 0 || m < 0 || m > 59 ||
      h * 60 + m > 24 * 60) {
    throw ConfigError("invalid clock time '" + text + "'");
  }
  return h * 60 + m;
}

std::string format_clock(int minutes) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

}  // namespace

WorkingCalendar WorkingCalendar::standard() {
  WorkingCalendar c;
  for (unsigned d = 1; d <= 5; ++d) c.weekly_[d] = {{9 * 60, 18 * 60}};
  return c;
}

void WorkingCalendar::set_day(unsigned weekday, std::vector<Interval> intervals) {
  if (weekday > 6) throw ConfigError("weekday index out of range");
  for (const auto& [start, end] : intervals) {
    if (start < 0 || end > 24 * 60 || start >= end) {
      throw ConfigError(std::string("working interval must satisfy start < end on ") +
                        kDayNames[weekday]);
    }
  }
  weekly_[weekday] = std::move(intervals);
}

bool WorkingCalendar::is_working_time(Timestamp ts) const {
  const Date d = day_of(ts);
  if (holidays_.count(d)) return false;
  const unsigned wd = std::chrono::weekday{d}.c_encoding();
  const auto minute = static_cast<int>((ts - Timestamp{d}).count() / 60);
  for (const auto& [start, end] : weekly_[wd]) {
    if (minute >= start && minute < end) return true;
  }
  return false;
}

WorkingCalendar WorkingCalendar::from_json(const nlohmann::json& j) {
  WorkingCalendar c;
  if (auto it = j.find("weekly"); it != j.end()) {
    for (unsigned d = 0; d < 7; ++d) {
      std::vector<Interval> intervals;
      if (auto day = it->find(kDayNames[d]); day != it->end()) {
        for (const auto& iv : *day) {
          if (!iv.is_array() || iv.size() != 2) throw ConfigError("working interval must be [start, end]");
          intervals.emplace_back(parse_clock(iv[0].get<std::string>()),
                                 parse_clock(iv[1].get<std::string>()));
        }
      }
      c.set_day(d, std::move(intervals));
    }
  } else {
    c = standard();
  }
  if (auto it = j.find("holidays"); it != j.end()) {
    for (const auto& h : *it) {
      auto d = parse_date(h.get<std::string>());
      if (!d) throw ConfigError("invalid holiday date '" + h.get<std::string>() + "'");
      c.add_holiday(*d);
    }
  }
  return c;
}

nlohmann::json WorkingCalendar::to_json() const {
  nlohmann::json weekly = nlohmann::json::object();
  for (unsigned d = 0; d < 7; ++d) {
    nlohmann::json day = nlohmann::json::array();
    for (const auto& [start, end] : weekly_[d]) day.push_back({format_clock(start), format_clock(end)});
    weekly[kDayNames[d]] = day;
  }
  nlohmann::json holidays = nlohmann::json::array();
  for (auto d : holidays_) holidays.push_back(format_date(d));
  return {{"weekly", weekly}, {"holidays", holidays}};
}

// ---------------------------------------------------------------------------

const std::set<std::string>* Profiles::authorized_for(const std::string& employee) const {
  if (auto it = authorized_systems.find(employee); it != authorized_systems.end()) return &it->second;
  if (auto it = authorized_systems.find("*"); it != authorized_systems.end()) return &it->second;
  return nullptr;
}

const std::set<std::string>* Profiles::common_actions_for(const std::string& employee) const {
  std::string role = "*";
  if (auto it = employee_roles.find(employee); it != employee_roles.end()) role = it->second;
  if (auto it = common_actions.find(role); it != common_actions.end()) return &it->second;
  if (auto it = common_actions.find("*"); it != common_actions.end()) return &it->second;
  return nullptr;
}

Profiles Profiles::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("profiles document must be an object");
  Profiles p;
  try {
    if (auto it = j.find("working_calendar"); it != j.end()) {
      p.working_calendar = WorkingCalendar::from_json(*it);
    }
    if (auto it = j.find("authorized_systems"); it != j.end()) {
      p.authorized_systems = it->get<std::map<std::string, std::set<std::string>>>();
    }
    if (auto it = j.find("unauthorized_actions"); it != j.end()) {
      p.unauthorized_actions = it->get<std::set<std::string>>();
    }
    if (auto it = j.find("employee_roles"); it != j.end()) {
      p.employee_roles = it->get<std::map<std::string, std::string>>();
    }
    if (auto it = j.find("common_actions"); it != j.end()) {
      p.common_actions = it->get<std::map<std::string, std::set<std::string>>>();
    }
    if (auto it = j.find("fms_systems"); it != j.end()) {
      p.fms_systems = it->get<std::set<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("profiles: ") + e.what());
  }
  return p;
}

Profiles Profiles::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read profiles file " + path);
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("profiles file " + path + " is not valid JSON");
  return from_json(j);
}

nlohmann::json Profiles::to_json() const {
  return {{"working_calendar", working_calendar.to_json()},
          {"authorized_systems", authorized_systems},
          {"unauthorized_actions", unauthorized_actions},
          {"employee_roles", employee_roles},
          {"common_actions", common_actions},
          {"fms_systems", fms_systems}};
}

}  // namespace fraudlens
