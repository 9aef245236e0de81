#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "fraudlens/event.hpp"

namespace fraudlens {

// Column-to-field mapping for delimited sources. Event fields are ts,
// employee, client, action, system; "extras" takes a JSON object column and
// "extras.<key>" a single secondary field. Auth sources use ts, employee, ip,
// computer, action. Unmapped columns land in extras under their header name
// (or "col<N>" without a header).
struct CsvMapping {
  std::map<std::size_t, std::string> columns;
  std::string ts_format = "%Y-%m-%dT%H:%M:%S";
  int utc_offset_minutes = 0;  // source timezone; timestamps are stored in UTC
  char delimiter = ',';
  bool has_header = false;

  // The layout produced by export_records(..., csv).
  static CsvMapping export_layout();
  // Accepts {"columns": {"0": "ts", ...} | ["ts", ...], "ts_format": ...,
  // "utc_offset_minutes": ..., "delimiter": ",", "header": bool}.
  static CsvMapping from_json(const nlohmann::json& j);
};

struct IngestFormat {
  enum class Kind { canonical_jsonl, csv };
  Kind kind = Kind::canonical_jsonl;
  CsvMapping csv;

  static IngestFormat canonical() { return {}; }
  static IngestFormat csv_adapter(CsvMapping mapping) { return {Kind::csv, std::move(mapping)}; }
  // "jsonl" / "canonical-jsonl" / "csv"; anything else is a ConfigError.
  static IngestFormat parse(std::string_view name, std::optional<CsvMapping> mapping = {});
};

enum class ExportFormat { csv, canonical_jsonl };
ExportFormat parse_export_format(std::string_view name);

struct LineError {
  std::size_t line = 0;  // 1-based physical line number
  std::string message;
};

struct IngestResult {
  std::size_t count = 0;
  std::vector<LineError> errors;
};

// Line-level parsers, exposed for tools that validate without storing.
std::vector<Event> parse_event_lines(std::istream& in, const IngestFormat& format,
                                     std::vector<LineError>& errors);
std::vector<AuthEvent> parse_auth_lines(std::istream& in, const IngestFormat& format,
                                        std::vector<LineError>& errors);

// Append-only event store with employee/client/pair indexes. Optionally backed
// by a directory holding events.jsonl, auth.jsonl and a sidecar index
// (events.idx.json). Readers run concurrently; each ingest batch is applied
// under an exclusive lock so a query observes all of a batch or none of it.
class EventStore {
 public:
  EventStore() = default;
  // Opens (creating if needed) a persistent store and loads existing records.
  explicit EventStore(std::filesystem::path data_dir);

  EventStore(const EventStore&) = delete;
  EventStore& operator=(const EventStore&) = delete;

  IngestResult ingest_records(std::istream& source, const IngestFormat& format);
  IngestResult ingest_auth_records(std::istream& source, const IngestFormat& format);

  // Programmatic batches (generator, tests). Events must be valid.
  void append(std::vector<Event> batch);
  void append_auth(std::vector<AuthEvent> batch);

  // Ordered by ts, then insertion order.
  std::vector<Event> query_events(const QueryFilter& filter) const;
  std::vector<AuthEvent> query_auth(const QueryFilter& filter) const;

  EventSeries series_for_pair(const std::string& employee, const std::string& client) const;
  EventSeries series_for_client(const std::string& client) const;

  void export_records(const QueryFilter& filter, ExportFormat format, std::ostream& out) const;
  std::string export_records(const QueryFilter& filter, ExportFormat format) const;

  CorpusStats stats() const;

  std::vector<std::string> employees() const;
  std::vector<std::string> clients() const;
  std::vector<std::string> clients_of(const std::string& employee) const;
  std::vector<std::string> employees_of(const std::string& client) const;
  std::vector<std::pair<std::string, std::string>> pairs() const;
  std::size_t pair_event_count(const std::string& employee, const std::string& client) const;
  // Events per system over everything the employee did.
  std::map<std::string, std::size_t> system_usage(const std::string& employee) const;

  std::size_t size() const;
  std::size_t auth_size() const;
  // Incremented by every non-empty batch.
  std::uint64_t revision() const;

  const std::optional<std::filesystem::path>& data_dir() const { return data_dir_; }

 private:
  using Index = std::map<std::string, std::vector<std::size_t>, std::less<>>;
  using PairKey = std::pair<std::string, std::string>;

  void load();
  void append_locked(std::vector<Event>&& batch);
  void persist_events(const std::vector<Event>& batch) const;
  void persist_auth(const std::vector<AuthEvent>& batch) const;
  void write_sidecar() const;
  std::vector<Event> collect(const std::vector<std::size_t>& indices) const;

  mutable std::shared_mutex mutex_;
  std::optional<std::filesystem::path> data_dir_;
  std::vector<Event> events_;
  std::vector<AuthEvent> auth_events_;
  Index by_employee_;
  Index by_client_;
  std::map<PairKey, std::vector<std::size_t>> by_pair_;
  std::uint64_t revision_ = 0;
};

}  // namespace fraudlens
