#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "fraudlens/errors.hpp"
#include "fraudlens/event_store.hpp"
#include "fraudlens/plots.hpp"
#include "test_support.hpp"

using namespace fraudlens;
using namespace fraudlens::testing;

namespace {

AuthEvent auth(const std::string& iso, std::string emp, std::string ip, std::string computer,
               const std::string& action = "login") {
  return {ts(iso), std::move(emp), std::move(ip), std::move(computer), AuthAction::parse(action)};
}

std::vector<AuthEvent> failures(int n, const std::string& emp, const std::string& day = "2023-04-03") {
  std::vector<AuthEvent> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(auth(day + "T0" + std::to_string(i % 10) + ":15:00Z", emp, "10.0.0.1", "PC1", "login_failure"));
  }
  return out;
}

bool has_flag(const std::vector<AuthFlag>& flags, const std::string& emp, AuthFlagKind kind) {
  for (const auto& f : flags) {
    if (f.employee == emp && f.kind == kind) return true;
  }
  return false;
}

std::set<std::pair<std::string, AuthFlagKind>> flag_set(const std::vector<AuthFlag>& flags) {
  std::set<std::pair<std::string, AuthFlagKind>> out;
  for (const auto& f : flags) out.emplace(f.employee, f.kind);
  return out;
}

// Most failures of one employee in any half-open window of `days` starting at a failure.
std::size_t brute_burst(const std::vector<AuthEvent>& events, const std::string& emp, int days) {
  std::vector<Timestamp> f;
  for (const auto& e : events) {
    if (e.employee == emp && e.action.kind == AuthActionKind::login_failure) f.push_back(e.ts);
  }
  std::size_t best = 0;
  for (auto a : f) {
    std::size_t n = 0;
    for (auto b : f) n += b >= a && b < a + std::chrono::days{days};
    best = std::max(best, n);
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------- timeline

TEST(Timeline, GroupsByDate) {
  const std::vector<Event> events = {ev("2023-06-22T09:00:00Z", "u", "c"), ev("2023-06-22T17:00:00Z", "u", "c"),
                                     ev("2023-07-21T10:00:00Z", "u", "c")};
  const auto d = timeline_data(events);
  ASSERT_EQ(d.points.size(), 2u);
  EXPECT_EQ(d.points[0], (TimelinePoint{date("2023-06-22"), 2}));
  EXPECT_EQ(d.points[1], (TimelinePoint{date("2023-07-21"), 1}));
  EXPECT_TRUE(d.billing_dates.empty());
}

TEST(Timeline, EmptyAndBillingPassthrough) {
  EXPECT_TRUE(timeline_data(std::vector<Event>{}).points.empty());
  const std::vector<Date> billing = {date("2023-07-10"), date("2023-06-10"), date("2023-06-10")};
  const auto d = timeline_data({ev("2023-06-22T09:00:00Z", "u", "c")}, billing);
  EXPECT_EQ(d.billing_dates, billing);
}

TEST(Timeline, ConservesEventsAgainstGroupCountOracle) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 50; ++round) {
    EventStore store;
    std::vector<Event> events;
    const int n = 1 + static_cast<int>(rng() % 200);
    std::map<Date, std::size_t> oracle;
    for (int i = 0; i < n; ++i) {
      const auto d = date("2023-01-01") + std::chrono::days{static_cast<int>(rng() % 120)};
      auto e = ev("2023-01-01T00:00:00Z", "u", rng() % 4 ? "c" : "other");
      e.ts = Timestamp{d} + std::chrono::minutes{static_cast<int>(rng() % 1440)};
      if (e.client == "c") ++oracle[d];
      events.push_back(e);
    }
    store.append(events);
    const auto t = timeline_data(store, "u", "c");
    std::size_t total = 0;
    ASSERT_EQ(t.points.size(), oracle.size());
    auto it = oracle.begin();
    for (std::size_t i = 0; i < t.points.size(); ++i, ++it) {
      EXPECT_EQ(t.points[i].date, it->first);
      EXPECT_EQ(t.points[i].count, it->second);
      EXPECT_GE(t.points[i].count, 1u);
      if (i > 0) {
        EXPECT_LT(t.points[i - 1].date, t.points[i].date);
      }
      total += t.points[i].count;
    }
    EXPECT_EQ(total, store.series_for_pair("u", "c").events.size());
  }
}

TEST(Timeline, UnknownPairIsEmpty) {
  EventStore store;
  store.append({ev("2023-06-22T09:00:00Z", "u", "c")});
  const auto d = timeline_data(store, "nobody", "c");
  EXPECT_TRUE(d.points.empty());
  EXPECT_EQ(d.employee, "nobody");
}

TEST(Timeline, JsonShape) {
  const auto j = to_json(timeline_data({ev("2023-06-22T09:00:00Z", "u", "c")}, {date("2023-06-10")}));
  EXPECT_EQ(j.at("points").at(0).at("date"), "2023-06-22");
  EXPECT_EQ(j.at("points").at(0).at("count"), 1);
  EXPECT_EQ(j.at("billing_dates"), nlohmann::json::array({"2023-06-10"}));
}

// ---------------------------------------------------------------- billing

TEST(Billing, DayOfMonthClampsToShortMonths) {
  BillingRegistry reg;
  std::istringstream in(R"({"client":"c1","billing_day_of_month":31})" "\n\n"
                        R"({"client":"c2","dates":["2023-05-02","2023-03-09"]})" "\n");
  EXPECT_EQ(reg.load(in), 2u);
  EXPECT_EQ(reg.dates_for("c1", date("2023-01-15"), date("2023-04-30")),
            (std::vector<Date>{date("2023-01-31"), date("2023-02-28"), date("2023-03-31"), date("2023-04-30")}));
  EXPECT_EQ(reg.dates_for("c2", date("2023-01-01"), date("2023-12-31")),
            (std::vector<Date>{date("2023-03-09"), date("2023-05-02")}));
  EXPECT_EQ(reg.dates_for("c2", date("2023-04-01"), date("2023-04-30")), std::vector<Date>{});
  EXPECT_TRUE(reg.dates_for("unknown", date("2023-01-01"), date("2023-12-31")).empty());
}

TEST(Billing, BadLinesAreConfigErrors) {
  BillingRegistry reg;
  std::istringstream a(R"({"client":"c","billing_day_of_month":0})");
  EXPECT_THROW(reg.load(a), ConfigError);
  std::istringstream b(R"({"client":"c","dates":["June"]})");
  EXPECT_THROW(reg.load(b), ConfigError);
  std::istringstream c("{");
  EXPECT_THROW(reg.load(c), ConfigError);
  EXPECT_TRUE(reg.empty());
}

// ---------------------------------------------------------------- periodicity plot

TEST(PeriodicityPlot, FifteenthOfThreeMonths) {
  const auto d = periodicity_plot_data(on_dates(monthly(date("2023-01-15"), 3), "u", "c"));
  ASSERT_EQ(d.series.size(), 1u);
  const auto& a = d.series.at("A101");
  ASSERT_EQ(a.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(a[static_cast<std::size_t>(k)].k, k + 1);
    EXPECT_EQ(a[static_cast<std::size_t>(k)].day_of_month, 15);
  }
}

TEST(PeriodicityPlot, SameDaySameActionCollapses) {
  const auto d = periodicity_plot_data({ev("2023-03-04T08:00:00Z", "u", "c"), ev("2023-03-04T22:00:00Z", "u", "c")});
  ASSERT_EQ(d.series.at("A101").size(), 1u);
  EXPECT_EQ(d.series.at("A101")[0], (PeriodicityPoint{1, 4, date("2023-03-04")}));
}

TEST(PeriodicityPlot, ActionsPartitionedIndependently) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 50; ++round) {
    std::vector<Event> events;
    std::map<std::string, std::set<Date>> oracle;
    for (int i = 0; i < 60; ++i) {
      const std::string action = "A10" + std::to_string(rng() % 3);
      auto e = ev("2023-01-01T00:00:00Z", "u", "c", action);
      const auto d = date("2023-01-01") + std::chrono::days{static_cast<int>(rng() % 90)};
      e.ts = Timestamp{d} + std::chrono::hours{static_cast<int>(rng() % 24)};
      oracle[action].insert(d);
      events.push_back(e);
    }
    const auto plot = periodicity_plot_data(events);
    ASSERT_EQ(plot.series.size(), oracle.size());
    for (const auto& [action, days] : oracle) {
      const auto& s = plot.series.at(action);
      ASSERT_EQ(s.size(), days.size());
      auto it = days.begin();
      for (std::size_t i = 0; i < s.size(); ++i, ++it) {
        EXPECT_EQ(s[i].k, static_cast<int>(i) + 1);
        EXPECT_EQ(s[i].date, *it);
        EXPECT_EQ(s[i].day_of_month, static_cast<int>(static_cast<unsigned>(std::chrono::year_month_day{*it}.day())));
      }
    }
  }
}

TEST(PeriodicityPlot, PerfectMonthlyIsFlat) {
  const auto d = periodicity_plot_data(on_dates(monthly(date("2023-01-10"), 12), "u", "c"));
  for (const auto& p : d.series.at("A101")) EXPECT_EQ(p.day_of_month, 10);
}

// ---------------------------------------------------------------- auth flags

TEST(AuthFlags, BurstIsStrict) {
  AuthFlagConfig cfg;
  EXPECT_TRUE(has_flag(auth_pattern_flags(failures(6, "e"), cfg), "e", AuthFlagKind::burst_failures));
  EXPECT_FALSE(has_flag(auth_pattern_flags(failures(5, "e"), cfg), "e", AuthFlagKind::burst_failures));
}

TEST(AuthFlags, WindowIsShorterThanYDays) {
  // Six failures spread so that no 24h window holds more than three.
  std::vector<AuthEvent> v;
  for (auto iso : {"2023-04-03T01:00:00Z", "2023-04-03T02:00:00Z", "2023-04-03T03:00:00Z", "2023-04-04T03:00:00Z",
                   "2023-04-04T04:00:00Z", "2023-04-04T05:00:00Z"}) {
    v.push_back(auth(iso, "e", "ip", "pc", "login_failure"));
  }
  AuthFlagConfig cfg;
  EXPECT_FALSE(has_flag(auth_pattern_flags(v, cfg), "e", AuthFlagKind::burst_failures));
  cfg.fail_y_days = 2;
  const auto flags = auth_pattern_flags(v, cfg);
  ASSERT_TRUE(has_flag(flags, "e", AuthFlagKind::burst_failures));
  EXPECT_EQ(flags.front().detail.at("failures"), 6);
}

TEST(AuthFlags, MultiIpAndComputer) {
  const std::vector<AuthEvent> v = {auth("2023-04-03T08:00:00Z", "e", "10.0.0.1", "PC1"),
                                    auth("2023-04-05T08:00:00Z", "e", "10.0.0.1", "PC2"),
                                    auth("2023-04-05T08:00:00Z", "f", "10.0.0.1", "PC1"),
                                    auth("2023-04-05T09:00:00Z", "f", "10.0.0.9", "PC1", "login_failure"),
                                    auth("2023-04-05T09:00:00Z", "g", "10.0.0.7", "PC7", "logout"),
                                    auth("2023-04-05T09:00:00Z", "g", "10.0.0.8", "PC8", "logout")};
  const auto flags = auth_pattern_flags(v);
  EXPECT_TRUE(has_flag(flags, "e", AuthFlagKind::multi_computer));
  EXPECT_FALSE(has_flag(flags, "e", AuthFlagKind::multi_ip));
  EXPECT_TRUE(has_flag(flags, "f", AuthFlagKind::multi_ip));
  EXPECT_FALSE(has_flag(flags, "f", AuthFlagKind::multi_computer));
  EXPECT_FALSE(has_flag(flags, "g", AuthFlagKind::multi_ip));
  for (const auto& f : flags) {
    if (f.kind == AuthFlagKind::multi_computer) {
      EXPECT_EQ(f.detail.at("count"), 2);
    }
  }
  EXPECT_THROW(auth_pattern_flags(v, AuthFlagConfig{5, 0}), ConfigError);
}

TEST(AuthFlags, BurstMatchesSlidingWindowOracleAndIsMonotone) {
  std::mt19937_64 rng(21);
  const char* kinds[] = {"login", "login_failure", "logout"};
  for (int round = 0; round < 100; ++round) {
    AuthFlagConfig cfg{static_cast<std::size_t>(rng() % 6), 1 + static_cast<int>(rng() % 3)};
    std::vector<AuthEvent> v;
    std::set<std::pair<std::string, AuthFlagKind>> prev;
    for (int i = 0; i < 40; ++i) {
      AuthEvent e;
      e.ts = ts("2023-04-01T00:00:00Z") + std::chrono::minutes{static_cast<int>(rng() % (6 * 1440))};
      e.employee = "e" + std::to_string(rng() % 3);
      e.ip = "ip" + std::to_string(rng() % 3);
      e.computer = "pc" + std::to_string(rng() % 4);
      e.action = AuthAction::parse(kinds[rng() % 3]);
      v.push_back(e);
      const auto flags = auth_pattern_flags(v, cfg);
      const auto now = flag_set(flags);
      for (const auto& f : prev) ASSERT_TRUE(now.count(f)) << "flag lost at event " << i;
      prev = now;
      for (std::string emp : {"e0", "e1", "e2"}) {
        ASSERT_EQ(now.count({emp, AuthFlagKind::burst_failures}) == 1, brute_burst(v, emp, cfg.fail_y_days) > cfg.fail_x);
      }
    }
  }
}

// ---------------------------------------------------------------- parallel coordinates

TEST(ParallelCoords, OrderedByOccurrence) {
  std::vector<AuthEvent> v;
  v.push_back(auth("2023-04-03T08:00:00Z", "e", "ip2", "PC1"));
  for (int i = 0; i < 3; ++i) v.push_back(auth("2023-04-03T09:00:00Z", "e", "ip1", "PC1"));
  const auto d = parallel_coords_data(v);
  ASSERT_EQ(d.axes.size(), 4u);
  EXPECT_EQ(d.axes[0].name, "employee");
  EXPECT_EQ(d.axes[1].name, "ip");
  EXPECT_EQ(d.axes[2].name, "computer");
  EXPECT_EQ(d.axes[3].name, "action");
  const auto& ip = d.axes[1].nodes;
  ASSERT_EQ(ip.size(), 2u);
  EXPECT_EQ(ip[0].value, "ip1");
  EXPECT_EQ(ip[0].count, 3u);
  EXPECT_EQ(ip[1].value, "ip2");
  EXPECT_EQ(ip[1].count, 1u);
  EXPECT_NEAR(ip[1].weight, 1.0 / 3.0, 1e-12);
}

TEST(ParallelCoords, EmptyAndSingle) {
  const auto empty = parallel_coords_data(std::vector<AuthEvent>{});
  for (const auto& a : empty.axes) EXPECT_TRUE(a.nodes.empty());
  EXPECT_TRUE(empty.edges.empty());
  EXPECT_TRUE(empty.flags.empty());

  const auto one = parallel_coords_data({auth("2023-04-03T08:00:00Z", "e", "ip", "pc")});
  for (const auto& a : one.axes) {
    ASSERT_EQ(a.nodes.size(), 1u);
    EXPECT_EQ(a.nodes[0].count, 1u);
  }
  ASSERT_EQ(one.edges.size(), 3u);
  for (const auto& e : one.edges) EXPECT_EQ(e.count, 1u);
}

TEST(ParallelCoords, CountsSumPerAxisAndEdgesAreCoOccurrences) {
  std::mt19937_64 rng(8);
  const char* kinds[] = {"login", "login_failure", "logout", "vpn"};
  EventStore store;
  std::vector<AuthEvent> v;
  for (int i = 0; i < 500; ++i) {
    AuthEvent e;
    e.ts = ts("2023-04-01T00:00:00Z") + std::chrono::minutes{static_cast<int>(rng() % 50000)};
    e.employee = "e" + std::to_string(rng() % 5);
    e.ip = "ip" + std::to_string(rng() % 7);
    e.computer = "pc" + std::to_string(rng() % 6);
    e.action = AuthAction::parse(kinds[rng() % 4]);
    v.push_back(e);
  }
  store.append_auth(v);
  QueryFilter filter;
  filter.employees = {"e1", "e2"};
  const auto matching = store.query_auth(filter);
  const auto d = parallel_coords_data(store, filter);
  for (const auto& a : d.axes) {
    std::size_t sum = 0;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
      sum += a.nodes[i].count;
      if (i > 0) {
        EXPECT_GE(a.nodes[i - 1].count, a.nodes[i].count);
      }
    }
    EXPECT_EQ(sum, matching.size()) << a.name;
  }
  std::array<std::size_t, 3> edge_sums{};
  for (const auto& e : d.edges) {
    edge_sums[e.from_axis] += e.count;
    if (e.from_axis == 1) {
      std::size_t n = 0;
      for (const auto& m : matching) n += m.ip == e.from && m.computer == e.to;
      EXPECT_EQ(e.count, n);
    }
  }
  for (auto s : edge_sums) EXPECT_EQ(s, matching.size());
  EXPECT_EQ(d.axes[0].nodes.size(), 2u);

  const auto j = to_json(d);
  EXPECT_EQ(j.at("axes").size(), 4u);
  EXPECT_EQ(j.at("edges").size(), d.edges.size());
}
