#include "fraudlens/periodicity.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>

#include "fraudlens/errors.hpp"

namespace fraudlens {

IntervalSeries to_interval_series(std::span<const Timestamp> timestamps) {
  IntervalSeries out;
  out.origin_days.reserve(timestamps.size());
  for (auto ts : timestamps) out.origin_days.push_back(day_number(ts));
  std::sort(out.origin_days.begin(), out.origin_days.end());
  out.origin_days.erase(std::unique(out.origin_days.begin(), out.origin_days.end()),
                        out.origin_days.end());
  for (std::size_t i = 1; i < out.origin_days.size(); ++i) {
    out.values.push_back(static_cast<int>(out.origin_days[i] - out.origin_days[i - 1]));
  }
  return out;
}

IntervalSeries to_interval_series(const EventSeries& series) {
  std::vector<Timestamp> ts;
  ts.reserve(series.events.size());
  for (const auto& e : series.events) ts.push_back(e.ts);
  return to_interval_series(ts);
}

// ---------------------------------------------------------------------------

PatternSeries PatternSeries::ideal(int interval_days) {
  if (interval_days < 1) throw ConfigError("ideal pattern interval must be positive");
  PatternSeries p;
  p.name = std::to_string(interval_days) + "d";
  p.kind = Kind::ideal;
  p.interval_days = interval_days;
  return p;
}

PatternSeries PatternSeries::historical(std::string name, std::vector<int> gaps) {
  if (name.empty()) throw ConfigError("historical pattern needs a name");
  if (gaps.empty()) throw ConfigError("historical pattern '" + name + "' has no gaps");
  for (int g : gaps) {
    if (g < 1) throw ConfigError("historical pattern '" + name + "' has a gap < 1");
  }
  PatternSeries p;
  p.name = std::move(name);
  p.kind = Kind::historical;
  p.gaps = std::move(gaps);
  return p;
}

std::vector<int> PatternSeries::materialize(std::size_t observed_length) const {
  if (kind == Kind::historical) return gaps;
  return std::vector<int>(observed_length, interval_days);
}

PatternLibrary::PatternLibrary() {
  for (int days : {30, 15, 7, 1}) patterns_.push_back(PatternSeries::ideal(days));
}

void PatternLibrary::add_historical(PatternSeries pattern) {
  if (pattern.kind != PatternSeries::Kind::historical) {
    throw ConfigError("only historical patterns can be registered");
  }
  for (const auto& p : patterns_) {
    if (p.name == pattern.name) throw ConfigError("duplicate pattern name '" + pattern.name + "'");
  }
  patterns_.push_back(std::move(pattern));
}

void PatternLibrary::load_registry(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    const std::string where = "pattern registry line " + std::to_string(line_no);
    if (j.is_discarded() || !j.is_object()) throw ConfigError(where + ": invalid JSON");
    try {
      add_historical(PatternSeries::historical(j.at("name").get<std::string>(),
                                               j.at("gaps").get<std::vector<int>>()));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

bool within_window(std::size_t i, std::size_t j, const std::optional<std::size_t>& delta) {
  if (!delta) return true;
  return (i > j ? i - j : j - i) <= *delta;
}

double normalize(std::size_t length, std::size_t a, std::size_t b) {
  const std::size_t shorter = std::min(a, b);
  return shorter == 0 ? 0.0 : static_cast<double>(length) / static_cast<double>(shorter);
}

}  // namespace

std::size_t lcss_length(std::span<const int> a, std::span<const int> b, const LcssParams& params) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0 || m == 0) return 0;
  // Two rolling rows of the (n+1) x (m+1) table.
  std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      if (std::abs(a[i - 1] - b[j - 1]) <= params.epsilon_days && within_window(i, j, params.delta)) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double lcss_similarity(std::span<const int> a, std::span<const int> b, const LcssParams& params) {
  return normalize(lcss_length(a, b, params), a.size(), b.size());
}

double lcss_similarity(const IntervalSeries& a, const IntervalSeries& b, const LcssParams& params) {
  return lcss_similarity(std::span<const int>(a.values), std::span<const int>(b.values), params);
}

std::size_t merged_lcss_length(std::span<const int> observed, std::span<const int> pattern,
                               const LcssParams& params) {
  const std::size_t n = observed.size();
  const std::size_t m = pattern.size();
  if (n == 0 || m == 0) return 0;
  // Full table: a run ending at i reaches back to arbitrary rows.
  std::vector<std::vector<std::size_t>> table(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t best = std::max(table[i - 1][j], table[i][j - 1]);
      if (within_window(i, j, params.delta)) {
        const long target = pattern[j - 1];
        long sum = 0;
        // Gaps are positive, so the run sum only grows as the run extends.
        for (std::size_t s = i; s >= 1; --s) {
          sum += observed[s - 1];
          if (sum > target + params.epsilon_days) break;
          if (std::abs(sum - target) <= params.epsilon_days) {
            best = std::max(best, table[s - 1][j - 1] + 1);
          }
        }
      }
      table[i][j] = best;
    }
  }
  return table[n][m];
}

double merged_lcss_similarity(std::span<const int> observed, std::span<const int> pattern,
                              const LcssParams& params) {
  return normalize(merged_lcss_length(observed, pattern, params), observed.size(), pattern.size());
}

SimilarityReport similarity_profile(const IntervalSeries& observed, const PatternLibrary& library,
                                    const LcssParams& params, double theta) {
  if (library.size() == 0) throw ContractViolation("similarity_profile: empty pattern library");
  SimilarityReport report;
  report.per_pattern.reserve(library.size());
  for (const auto& pattern : library.patterns()) {
    double sim = 0.0;
    if (!observed.empty()) {
      const auto gaps = pattern.materialize(observed.size());
      sim = params.absorb_noise ? merged_lcss_similarity(observed.values, gaps, params)
                                : lcss_similarity(observed.values, gaps, params);
    }
    report.per_pattern.emplace_back(pattern.name, sim);
    report.max_similarity = std::max(report.max_similarity, sim);
  }
  report.periodic = !observed.empty() && report.max_similarity >= theta;
  return report;
}

SimilarityReport similarity_profile(const EventSeries& series, const PatternLibrary& library,
                                    const LcssParams& params, double theta) {
  return similarity_profile(to_interval_series(series), library, params, theta);
}

nlohmann::json to_json(const SimilarityReport& report) {
  nlohmann::json patterns = nlohmann::json::array();
  for (const auto& [name, sim] : report.per_pattern) {
    patterns.push_back({{"pattern", name}, {"similarity", sim}});
  }
  return {{"per_pattern", patterns},
          {"max_similarity", report.max_similarity},
          {"periodic", report.periodic}};
}

}  // namespace fraudlens
