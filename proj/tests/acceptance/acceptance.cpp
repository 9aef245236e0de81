// Acceptance suite: one PASS/FAIL line per primary criterion, each with its
// tolerance and wall-clock limit. Exit status is non-zero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fraudlens/color.hpp"
#include "fraudlens/errors.hpp"
#include "fraudlens/event_store.hpp"
#include "fraudlens/layout.hpp"
#include "fraudlens/periodicity.hpp"
#include "fraudlens/plots.hpp"
#include "fraudlens/scoring.hpp"
#include "fraudlens/session.hpp"
#include "fraudlens/synth.hpp"
#include "test_support.hpp"

using namespace fraudlens;
using namespace fraudlens::testing;

namespace {

using Failures = std::vector<std::string>;

struct Criterion {
  std::string name;
  double limit_seconds;
  std::function<void(Failures&)> run;
};

void expect(Failures& f, bool ok, const std::string& what) {
  if (!ok) f.push_back(what);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

PatternVector vec(std::initializer_list<int> bits) {
  PatternVector v;
  std::size_t i = 0;
  for (int b : bits) v.components[i++] = b != 0;
  return v;
}

// ---------------------------------------------------------------- scoring

void distance_formula(Failures& f) {
  const LayerWeights w;
  const double zero = weighted_distance(vec({0, 0, 0, 0, 0}), w);
  const double ones = weighted_distance(vec({1, 1, 1, 1, 1}), w);
  const double two = weighted_distance(vec({1, 1, 0, 0, 0}), w);
  expect(f, std::abs(zero) <= 1e-9, "d(x,x) = " + num(zero));
  expect(f, std::abs(ones - 1.0) <= 1e-9, "d(x, all-ones) = " + num(ones));
  expect(f, std::abs(two - std::sqrt(24.0 / 31.0)) <= 1e-9, "[1,1,0,0,0] -> " + num(two));
  // Every vector against the closed form.
  for (unsigned mask = 0; mask < 32; ++mask) {
    PatternVector v;
    double sum = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      v.components[i] = (mask >> i) & 1u;
      if (v.components[i]) sum += w.w[i];
    }
    const double d = weighted_distance(v, w);
    expect(f, std::abs(d - std::sqrt(sum / 31.0)) <= 1e-9, "mask " + std::to_string(mask) + " -> " + num(d));
  }
}

void weight_dominance(Failures& f) {
  const LayerWeights w;
  for (std::size_t i = 0; i < 5; ++i) {
    PatternVector single, deeper;
    single.components[i] = true;
    for (std::size_t j = i + 1; j < 5; ++j) deeper.components[j] = true;
    const double a = weighted_distance(single, w), b = weighted_distance(deeper, w);
    expect(f, a > b, "layer " + std::to_string(i + 1) + ": " + num(a) + " <= " + num(b));
  }
  LayerWeights flat;
  flat.w = {1, 1, 1, 1, 1};
  bool rejected = false;
  try {
    flat.validate();
  } catch (const ConfigError&) {
    rejected = true;
  }
  expect(f, rejected, "non-dominant weights accepted");
}

void gate_semantics(Failures& f) {
  const Scorer scorer(ScoringConfig{}, open_profiles());
  auto series = [](int n, const std::string& system) {
    EventSeries s{"u", "c", {}};
    for (int i = 0; i < n; ++i) {
      s.events.push_back(ev("2023-03-06T10:00:00Z", "u", "c", "A101", system));
      s.events.back().ts += std::chrono::hours{24 * (i % 30)};
    }
    std::sort(s.events.begin(), s.events.end(), [](auto& a, auto& b) { return a.ts < b.ts; });
    return s;
  };
  expect(f, !scorer.volume_gate(series(10, "CRM")), "10 events gated");
  expect(f, scorer.volume_gate(series(11, "CRM")), "11 events not gated");
  expect(f, !scorer.volume_gate(series(12, "FMS")), "12 FMS events gated");
  expect(f, std::abs(scorer.peak_window_weight(series(12, "FMS")) - 6.0) <= 1e-12, "FMS weight");
}

// ---------------------------------------------------------------- periodicity

void lcss_oracle(Failures& f) {
  std::mt19937_64 rng(20240);
  auto gaps = [&] {
    std::vector<int> v(rng() % 9);
    for (auto& g : v) g = 1 + static_cast<int>(rng() % 40);
    return v;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = gaps(), b = gaps();
    LcssParams p;
    p.absorb_noise = false;
    p.epsilon_days = static_cast<int>(rng() % 4);
    if (rng() % 3 == 0) p.delta = rng() % 4;
    const std::size_t brute = brute_lcss(a, b, p.epsilon_days, p.delta);
    const double expected =
        a.empty() || b.empty() ? 0.0 : static_cast<double>(brute) / static_cast<double>(std::min(a.size(), b.size()));
    const double got = lcss_similarity(a, b, p);
    if (got != expected || lcss_length(a, b, p) != brute) {
      f.push_back("case " + std::to_string(i) + ": dp " + num(got) + " vs brute " + num(expected));
      if (f.size() > 5) return;
    }
  }
}

void periodicity_thresholds(Failures& f) {
  const PatternLibrary lib;
  const LcssParams params;  // epsilon 2 days
  const auto dates = monthly(date("2023-01-14"), 6);
  const auto clean = similarity_profile(EventSeries{"u", "c", on_dates(dates, "u", "c")}, lib, params, 0.5);
  expect(f, clean.per_pattern.at(0).first == "30d" && clean.per_pattern.at(0).second == 1.0,
         "exact monthly vs 30d = " + num(clean.per_pattern.at(0).second));

  auto noisy_dates = dates;
  noisy_dates.push_back(dates[2] + std::chrono::days{9});
  std::sort(noisy_dates.begin(), noisy_dates.end());
  const auto noisy = similarity_profile(EventSeries{"u", "c", on_dates(noisy_dates, "u", "c")}, lib, params, 0.5);
  expect(f, noisy.per_pattern.at(0).second >= 5.0 / 6.0 - 1e-12,
         "one noise day: " + num(noisy.per_pattern.at(0).second) + " < 5/6");
  expect(f, noisy.periodic, "one noise day: not periodic at 0.5");

  // Aperiodic burst, then one day within the 10th-15th of five consecutive months.
  std::vector<Date> fictional = {date("2023-01-03"), date("2023-01-04"), date("2023-01-19")};
  for (auto d : {"2023-02-10", "2023-03-12", "2023-04-11", "2023-05-13", "2023-06-14"}) fictional.push_back(date(d));
  const auto fr = similarity_profile(EventSeries{"u", "c", on_dates(fictional, "u", "c")}, lib, params, 0.5);
  expect(f, fr.periodic, "fictional pattern max similarity " + num(fr.max_similarity) + " not periodic");
}

// ---------------------------------------------------------------- pipeline

void pipeline_end_to_end(Failures& f) {
  SyntheticSpec spec = SyntheticSpec{}.scaled(0.3);
  spec.seed = 7;
  auto scenario = [](InjectedScenario::Kind k, const std::string& label) {
    InjectedScenario s;
    s.kind = k;
    s.label = label;
    return s;
  };
  auto split = scenario(InjectedScenario::Kind::split_client, "split");
  split.months = 6;
  spec.injected_scenarios = {scenario(InjectedScenario::Kind::monthly_fraud, "fraud"),
                             scenario(InjectedScenario::Kind::monitoring, "watch-1"),
                             scenario(InjectedScenario::Kind::monitoring, "watch-2"),
                             scenario(InjectedScenario::Kind::unauthorized_action, "forbidden"), split};
  const auto corpus = generate_synthetic_corpus(spec);
  expect(f, corpus.events.size() >= 45000, "corpus has only " + std::to_string(corpus.events.size()) + " events");

  EventStore store;
  store.append(corpus.events);
  const Scorer scorer(ScoringConfig{}, Profiles::from_json(corpus.profiles));
  const auto t = score_corpus(store, scorer);

  auto truth = [&](const std::string& label) {
    for (const auto& s : corpus.manifest.at("scenarios")) {
      if (s.at("label") == label) return s;
    }
    throw std::runtime_error("no scenario " + label);
  };
  const std::string fraud_emp = truth("fraud").at("employee");
  const std::string fraud_client = truth("fraud").at("client");
  const std::string bad_emp = truth("forbidden").at("employee");

  // The fraud pair tops every employee scored through the tree; only
  // short-circuited employees (fixed at 1.0) may sit above it.
  const auto& fraud = t.employees.at(fraud_emp);
  expect(f, fraud.anchor_client == fraud_client, "fraud employee anchored elsewhere");
  for (const auto& [id, s] : t.employees) {
    if (id == fraud_emp || s.short_circuit) continue;
    if (s.value >= fraud.value) {
      f.push_back(id + " scores " + num(s.value) + " >= fraud " + num(fraud.value));
      break;
    }
  }
  for (auto label : {"watch-1", "watch-2"}) {
    const std::string emp = truth(label).at("employee");
    expect(f, t.employee_value(emp) < fraud.value, std::string(label) + " not below the fraud pair");
  }

  const auto& bad = t.employees.at(bad_emp);
  expect(f, bad.value == 1.0, "unauthorized employee scores " + num(bad.value));
  expect(f, bad.short_circuit == ShortCircuit::unauthorized_action, "unauthorized employee not short-circuited");

  const auto sp = truth("split");
  const std::string client = sp.at("client");
  const auto emps = sp.at("employees").get<std::vector<std::string>>();
  const auto& cs = t.clients.at(client);
  expect(f, cs.vector && (*cs.vector)[Layer::volume], "split client not gated at client level");
  for (const auto& e : emps) {
    const auto* p = t.pair(e, client);
    expect(f, p && p->vector && !(*p->vector)[Layer::volume], "pair " + e + " passes the gate alone");
    if (p) expect(f, cs.value > p->value, "client severity not above pair " + e);
  }
}

// ---------------------------------------------------------------- layout

void layout_invariants(Failures& f) {
  std::size_t frames = 0;
  for (std::uint64_t seed = 1; frames < 100; ++seed) {
    auto w = random_world(seed);
    for (const auto& emp : w.store->employees()) {
      if (frames >= 100) break;
      const auto scene = build_frame_scene(w.ctx(), emp);
      for (const auto& v : check_scene(scene, w.options)) f.push_back("seed " + std::to_string(seed) + " " + emp + ": " + v);
      const auto crossings = focus_edge_crossings(scene);
      expect(f, crossings == 0, "seed " + std::to_string(seed) + " " + emp + ": " + std::to_string(crossings) + " crossings");
      ++frames;
      if (f.size() > 10) return;
    }
  }
  expect(f, to_hex(severity_color(0.0)) == "#0000FF", "color(0) = " + to_hex(severity_color(0.0)));
  expect(f, to_hex(severity_color(1.0)) == "#FF0000", "color(1) = " + to_hex(severity_color(1.0)));
}

// ---------------------------------------------------------------- session

void session_machine(Failures& f) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 300; ++i) {
    SeverityTables t;
    for (int e = 0; e < 25; ++e) t.employees["e" + std::to_string(rng() % 30)].value = (rng() % 11) / 10.0;
    const double th = (rng() % 12) / 10.0;
    if (build_playlist(t, th) != oracle_playlist(t, th)) {
      f.push_back("playlist differs from sort oracle");
      break;
    }
  }

  // F works k1 (ten other employees) and k2 (one more); G follows F.
  EventStore store;
  auto link = [&](const std::string& e, const std::string& c) {
    store.append(on_dates({date("2023-03-06"), date("2023-03-21")}, e, c));
  };
  link("F", "k1");
  link("F", "k2");
  link("G", "k3");
  for (int i = 0; i < 10; ++i) link("o" + std::to_string(i), "k1");
  link("o10", "k2");
  const Scorer scorer(ScoringConfig{}, open_profiles());
  auto tables = score_corpus(store, scorer);
  for (auto& [id, s] : tables.employees) s.value = 0.1;
  tables.employees["F"].value = 0.9;
  tables.employees["G"].value = 0.8;
  for (auto& [id, s] : tables.clients) s.value = 0.9;
  const LayoutContext ctx{&store, &tables, &scorer, LayoutOptions{}};

  Session s(ctx, 0.5, 10);
  s.start();
  s.next();
  s.select("k1");
  expect(f, s.additions() == 10 && s.mode() == SceneMode::detail, "ten additions left detail mode");
  s.select("k2");
  expect(f, s.additions() == 11 && s.mode() == SceneMode::overview, "eleventh addition did not switch to overview");
  s.resume();
  expect(f, s.additions() == 0 && s.mode() == SceneMode::detail, "resume kept additions");
  s.next();
  expect(f, s.focus() == "G", "resume did not continue after F");

  const auto report = session_fuzz(99, 1000);
  expect(f, report.sequences == 1000, "fuzz ran " + std::to_string(report.sequences) + " sequences");
  for (const auto& v : report.violations) f.push_back(v);
}

// ---------------------------------------------------------------- plots

void plots(Failures& f) {
  std::mt19937_64 rng(5);
  std::vector<Event> events;
  for (int i = 0; i < 2000; ++i) {
    auto e = ev("2023-01-01T00:00:00Z", "u", "c", "A10" + std::to_string(rng() % 3));
    e.ts += std::chrono::minutes{static_cast<int>(rng() % (200 * 1440))};
    events.push_back(e);
  }
  std::size_t total = 0;
  for (const auto& p : timeline_data(events).points) total += p.count;
  expect(f, total == events.size(), "timeline holds " + std::to_string(total) + " of " + std::to_string(events.size()));

  const auto per = periodicity_plot_data(
      {ev("2023-03-15T08:00:00Z", "u", "c"), ev("2023-03-15T19:00:00Z", "u", "c"), ev("2023-04-15T09:00:00Z", "u", "c")});
  const auto& s = per.series.at("A101");
  expect(f, s.size() == 2 && s[0].k == 1 && s[0].day_of_month == 15 && s[1].k == 2,
         "same-day occurrences not collapsed");

  auto failures = [](int n) {
    std::vector<AuthEvent> v;
    for (int i = 0; i < n; ++i) {
      v.push_back({ts("2023-04-03T08:00:00Z") + std::chrono::minutes{10 * i}, "e", "10.0.0.1", "PC1",
                   AuthAction{AuthActionKind::login_failure, {}}});
    }
    return v;
  };
  auto burst = [](const std::vector<AuthFlag>& flags) {
    for (const auto& fl : flags) {
      if (fl.kind == AuthFlagKind::burst_failures) return true;
    }
    return false;
  };
  const AuthFlagConfig cfg{5, 1};
  expect(f, burst(auth_pattern_flags(failures(6), cfg)), "6 failures not flagged");
  expect(f, !burst(auth_pattern_flags(failures(5), cfg)), "5 failures flagged");
}

// ---------------------------------------------------------------- synthetic corpus

void synthetic_realism(Failures& f) {
  SyntheticSpec spec = SyntheticSpec{}.scaled(0.01);
  spec.seed = 42;
  const auto a = generate_synthetic_corpus(spec);
  const auto stats = compute_stats(a.events);
  const char* names[] = {"1", "2-5", "6-10", ">10"};
  for (std::size_t b = 0; b < kOccurrenceBuckets; ++b) {
    const double got = stats.client_occurrence_histogram[b], want = spec.occurrence_histogram[b];
    expect(f, std::abs(got - want) <= 0.02, std::string("bucket ") + names[b] + ": " + num(got) + " vs " + num(want));
  }
  const auto b = generate_synthetic_corpus(spec);
  expect(f, a.events == b.events && a.manifest == b.manifest, "same seed, different corpus");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"distance formula", 1.0, distance_formula},
      {"weight dominance", 1.0, weight_dominance},
      {"LCSS oracle equivalence", 30.0, lcss_oracle},
      {"periodicity thresholds", 5.0, periodicity_thresholds},
      {"gate semantics", 1.0, gate_semantics},
      {"pipeline end-to-end", 60.0, pipeline_end_to_end},
      {"layout invariants", 10.0, layout_invariants},
      {"session machine", 30.0, session_machine},
      {"plots", 5.0, plots},
      {"synthetic-corpus realism", 10.0, synthetic_realism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Failures f;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(f);
    } catch (const std::exception& e) {
      f.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.limit_seconds) {
      f.push_back("took " + num(secs) + " s, limit " + num(c.limit_seconds) + " s");
    }
    std::printf("%s  %-26s %8.3f s (limit %g s)\n", f.empty() ? "PASS" : "FAIL", c.name.c_str(), secs, c.limit_seconds);
    for (std::size_t i = 0; i < f.size() && i < 10; ++i) std::printf("      - %s\n", f[i].c_str());
    failed += !f.empty();
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
