#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fraudlens/event.hpp"

namespace fraudlens {

// Day gaps between the distinct (UTC) calendar days of an event series.
struct IntervalSeries {
  std::vector<int> values;                // every gap >= 1
  std::vector<std::int64_t> origin_days;  // distinct days, ascending

  bool empty() const { return values.empty(); }
  std::size_t size() const { return values.size(); }
};

IntervalSeries to_interval_series(const EventSeries& series);
IntervalSeries to_interval_series(std::span<const Timestamp> timestamps);

// A reference shape the observed gaps are compared with. Ideal patterns are a
// constant interval stretched to whatever length is being compared;
// historical patterns carry an explicit gap list recorded from past cases.
struct PatternSeries {
  enum class Kind { ideal, historical };

  std::string name;
  Kind kind = Kind::ideal;
  int interval_days = 0;  // ideal only
  std::vector<int> gaps;  // historical only

  static PatternSeries ideal(int interval_days);
  static PatternSeries historical(std::string name, std::vector<int> gaps);

  // The gap list used against an observed series of `observed_length` gaps.
  std::vector<int> materialize(std::size_t observed_length) const;
};

// Ordered pattern set: 30, 15, 7, 1 days, then historical patterns in
// registration order. The 30-day pattern is always at index 0.
class PatternLibrary {
 public:
  PatternLibrary();

  void add_historical(PatternSeries pattern);
  // Line-delimited {"name": ..., "gaps": [days...]} records. Bad records are
  // a ConfigError naming the line.
  void load_registry(std::istream& in);

  const std::vector<PatternSeries>& patterns() const { return patterns_; }
  std::size_t size() const { return patterns_.size(); }

 private:
  std::vector<PatternSeries> patterns_;
};

struct LcssParams {
  int epsilon_days = 2;               // value tolerance
  std::optional<std::size_t> delta;   // index window; nullopt = unbounded
  // similarity_profile only: let runs of consecutive observed gaps match one
  // pattern gap, so a stray event day inside a period does not break it.
  bool absorb_noise = true;
};

// Classic LCSS length: a_i and b_j match iff |a_i - b_j| <= epsilon and
// |i - j| <= delta.
std::size_t lcss_length(std::span<const int> a, std::span<const int> b, const LcssParams& params);

// lcss_length / min(|a|, |b|); 0 when either side is empty. Symmetric when
// delta is unbounded.
double lcss_similarity(std::span<const int> a, std::span<const int> b, const LcssParams& params);
double lcss_similarity(const IntervalSeries& a, const IntervalSeries& b, const LcssParams& params);

// LCSS variant where each match pairs one pattern gap with the sum of a run
// of consecutive observed gaps (dropping the event days inside the run).
// Gaps between matched runs may stay unmatched, as in LCSS. With runs of
// length one this is exactly lcss_length, so it never scores lower.
std::size_t merged_lcss_length(std::span<const int> observed, std::span<const int> pattern,
                               const LcssParams& params);
double merged_lcss_similarity(std::span<const int> observed, std::span<const int> pattern,
                              const LcssParams& params);

struct SimilarityReport {
  std::vector<std::pair<std::string, double>> per_pattern;  // library order
  double max_similarity = 0.0;
  bool periodic = false;
};

SimilarityReport similarity_profile(const IntervalSeries& observed, const PatternLibrary& library,
                                    const LcssParams& params, double theta);
SimilarityReport similarity_profile(const EventSeries& series, const PatternLibrary& library,
                                    const LcssParams& params, double theta);

nlohmann::json to_json(const SimilarityReport& report);

}  // namespace fraudlens
