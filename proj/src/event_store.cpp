#include "fraudlens/event_store.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <mutex>
#include <set>
#include <sstream>

#include "fraudlens/csv.hpp"
#include "fraudlens/errors.hpp"

namespace fraudlens {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Formats

CsvMapping CsvMapping::export_layout() {
  CsvMapping m;
  m.columns = {{0, "ts"}, {1, "employee"}, {2, "client"}, {3, "action"}, {4, "system"},
               {5, "extras"}};
  m.ts_format = "iso8601";
  m.has_header = true;
  return m;
}

CsvMapping CsvMapping::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("csv mapping must be an object");
  CsvMapping m;
  const auto& cols = j.at("columns");
  if (cols.is_array()) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (!cols[i].is_null()) m.columns[i] = cols[i].get<std::string>();
    }
  } else if (cols.is_object()) {
    for (const auto& [key, value] : cols.items()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw ConfigError("csv mapping: column key '" + key + "' is not an index");
      }
      m.columns[idx] = value.get<std::string>();
    }
  } else {
    throw ConfigError("csv mapping: 'columns' must be an array or object");
  }
  if (auto it = j.find("ts_format"); it != j.end()) m.ts_format = it->get<std::string>();
  if (auto it = j.find("utc_offset_minutes"); it != j.end()) m.utc_offset_minutes = it->get<int>();
  if (auto it = j.find("delimiter"); it != j.end()) {
    const auto d = it->get<std::string>();
    if (d.size() != 1) throw ConfigError("csv mapping: delimiter must be one character");
    m.delimiter = d[0];
  }
  if (auto it = j.find("header"); it != j.end()) m.has_header = it->get<bool>();
  return m;
}

IngestFormat IngestFormat::parse(std::string_view name, std::optional<CsvMapping> mapping) {
  if (name == "jsonl" || name == "canonical-jsonl") return canonical();
  if (name == "csv") {
    if (!mapping) throw ConfigError("csv ingest requires a column mapping");
    return csv_adapter(std::move(*mapping));
  }
  throw ConfigError("unknown ingest format '" + std::string(name) + "'");
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "csv") return ExportFormat::csv;
  if (name == "jsonl" || name == "canonical-jsonl") return ExportFormat::canonical_jsonl;
  throw ConfigError("unknown export format '" + std::string(name) + "'");
}

namespace {

const std::set<std::string, std::less<>> kEventFields = {"ts", "employee", "client", "action",
                                                          "system", "extras"};
const std::set<std::string, std::less<>> kAuthFields = {"ts", "employee", "ip", "computer",
                                                         "action"};

void check_mapping(const CsvMapping& m, const std::set<std::string, std::less<>>& allowed) {
  if (m.columns.empty()) throw ConfigError("csv mapping has no columns");
  std::set<std::string> seen;
  for (const auto& [idx, field] : m.columns) {
    const bool extra = field.rfind("extras.", 0) == 0 && field.size() > 7;
    if (!allowed.count(field) && !(extra && allowed.count("extras"))) {
      throw ConfigError("csv mapping: unknown field '" + field + "'");
    }
    if (!seen.insert(field).second) throw ConfigError("csv mapping: field '" + field + "' mapped twice");
  }
  if (!seen.count("ts")) throw ConfigError("csv mapping: no column mapped to ts");
}

// Reads data lines, skipping blank ones; calls fn(line_no, text).
template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  if (!in.good()) throw IngestError("input stream is not readable");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(line_no, line);
  }
  if (in.bad()) throw IngestError("read error after line " + std::to_string(line_no));
}

std::optional<Timestamp> parse_ts(const std::string& text, const CsvMapping& m) {
  if (m.ts_format == "iso8601") return parse_iso8601(text);
  return parse_with_format(text, m.ts_format, m.utc_offset_minutes);
}

// Maps one CSV row to a JSON record with canonical keys so the JSON
// validators are shared by both formats.
std::optional<std::string> csv_row_to_record(const std::vector<std::string>& fields,
                                             const std::vector<std::string>& header,
                                             const CsvMapping& m, nlohmann::json& record,
                                             Timestamp& ts) {
  record = nlohmann::json::object();
  nlohmann::json extras = nlohmann::json::object();
  for (const auto& [idx, field] : m.columns) {
    if (idx >= fields.size()) {
      return "missing column " + std::to_string(idx) + " (" + field + ")";
    }
    const std::string& value = fields[idx];
    if (field == "ts") {
      auto parsed = parse_ts(value, m);
      if (!parsed) return "invalid timestamp '" + value + "'";
      ts = *parsed;
    } else if (field == "extras") {
      if (value.empty()) continue;
      auto parsed = nlohmann::json::parse(value, nullptr, false);
      if (parsed.is_discarded() || !parsed.is_object()) return "extras column is not a JSON object";
      for (auto& [k, v] : parsed.items()) extras[k] = v;
    } else if (field.rfind("extras.", 0) == 0) {
      extras[field.substr(7)] = value;
    } else {
      record[field] = value;
    }
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (m.columns.count(i)) continue;
    const std::string key = i < header.size() && !header[i].empty() ? header[i]
                                                                    : "col" + std::to_string(i);
    extras[key] = fields[i];
  }
  record["ts"] = format_iso8601(ts);
  if (!extras.empty()) record["extras"] = std::move(extras);
  return std::nullopt;
}

template <typename Record, typename FromJson>
std::vector<Record> parse_lines(std::istream& in, const IngestFormat& format,
                                std::vector<LineError>& errors,
                                const std::set<std::string, std::less<>>& allowed,
                                FromJson&& from_json) {
  std::vector<Record> out;
  if (format.kind == IngestFormat::Kind::canonical_jsonl) {
    for_each_line(in, [&](std::size_t line_no, const std::string& line) {
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        errors.push_back({line_no, "invalid JSON"});
        return;
      }
      Record r;
      if (auto err = from_json(j, r)) {
        errors.push_back({line_no, *err});
        return;
      }
      out.push_back(std::move(r));
    });
    return out;
  }

  check_mapping(format.csv, allowed);
  std::vector<std::string> header;
  bool header_pending = format.csv.has_header;
  for_each_line(in, [&](std::size_t line_no, const std::string& line) {
    auto fields = csv::split_line(line, format.csv.delimiter);
    if (header_pending) {
      header_pending = false;
      if (fields) header = std::move(*fields);
      return;
    }
    if (!fields) {
      errors.push_back({line_no, "malformed quoting"});
      return;
    }
    nlohmann::json record;
    Timestamp ts{};
    if (auto err = csv_row_to_record(*fields, header, format.csv, record, ts)) {
      errors.push_back({line_no, *err});
      return;
    }
    Record r;
    if (auto err = from_json(record, r)) {
      errors.push_back({line_no, *err});
      return;
    }
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace

std::vector<Event> parse_event_lines(std::istream& in, const IngestFormat& format,
                                     std::vector<LineError>& errors) {
  return parse_lines<Event>(in, format, errors, kEventFields,
                            [](const nlohmann::json& j, Event& e) { return event_from_json(j, e); });
}

std::vector<AuthEvent> parse_auth_lines(std::istream& in, const IngestFormat& format,
                                        std::vector<LineError>& errors) {
  return parse_lines<AuthEvent>(
      in, format, errors, kAuthFields,
      [](const nlohmann::json& j, AuthEvent& e) { return auth_event_from_json(j, e); });
}

// ---------------------------------------------------------------------------
// Store

namespace {
constexpr const char* kEventsFile = "events.jsonl";
constexpr const char* kAuthFile = "auth.jsonl";
constexpr const char* kSidecarFile = "events.idx.json";
}  // namespace

EventStore::EventStore(fs::path data_dir) : data_dir_(std::move(data_dir)) {
  std::error_code ec;
  fs::create_directories(*data_dir_, ec);
  if (ec) throw IngestError("cannot create data dir " + data_dir_->string() + ": " + ec.message());
  load();
}

void EventStore::load() {
  const auto events_path = *data_dir_ / kEventsFile;
  if (fs::exists(events_path)) {
    std::ifstream in(events_path);
    std::vector<LineError> errors;
    auto events = parse_event_lines(in, IngestFormat::canonical(), errors);
    if (!errors.empty()) {
      throw IngestError(events_path.string() + ": corrupt record at line " +
                        std::to_string(errors.front().line) + ": " + errors.front().message);
    }
    append_locked(std::move(events));
  }
  const auto auth_path = *data_dir_ / kAuthFile;
  if (fs::exists(auth_path)) {
    std::ifstream in(auth_path);
    std::vector<LineError> errors;
    auto events = parse_auth_lines(in, IngestFormat::canonical(), errors);
    if (!errors.empty()) {
      throw IngestError(auth_path.string() + ": corrupt record at line " +
                        std::to_string(errors.front().line));
    }
    auth_events_ = std::move(events);
  }
  write_sidecar();
}

IngestResult EventStore::ingest_records(std::istream& source, const IngestFormat& format) {
  IngestResult result;
  auto batch = parse_event_lines(source, format, result.errors);
  result.count = batch.size();
  append(std::move(batch));
  return result;
}

IngestResult EventStore::ingest_auth_records(std::istream& source, const IngestFormat& format) {
  IngestResult result;
  auto batch = parse_auth_lines(source, format, result.errors);
  result.count = batch.size();
  append_auth(std::move(batch));
  return result;
}

void EventStore::append(std::vector<Event> batch) {
  if (batch.empty()) return;
  for (const auto& e : batch) {
    if (!e.valid()) throw ContractViolation("append: event with empty key field");
  }
  std::unique_lock lock(mutex_);
  persist_events(batch);
  append_locked(std::move(batch));
  write_sidecar();
}

void EventStore::append_auth(std::vector<AuthEvent> batch) {
  if (batch.empty()) return;
  for (const auto& e : batch) {
    if (!e.valid()) throw ContractViolation("append_auth: event with empty key field");
  }
  std::unique_lock lock(mutex_);
  persist_auth(batch);
  for (auto& e : batch) auth_events_.push_back(std::move(e));
  ++revision_;
}

void EventStore::append_locked(std::vector<Event>&& batch) {
  if (batch.empty()) return;
  events_.reserve(events_.size() + batch.size());
  for (auto& e : batch) {
    const std::size_t idx = events_.size();
    by_employee_[e.employee].push_back(idx);
    by_client_[e.client].push_back(idx);
    by_pair_[{e.employee, e.client}].push_back(idx);
    events_.push_back(std::move(e));
  }
  ++revision_;
}

void EventStore::persist_events(const std::vector<Event>& batch) const {
  if (!data_dir_) return;
  std::ofstream out(*data_dir_ / kEventsFile, std::ios::app);
  if (!out) throw IngestError("cannot open " + (*data_dir_ / kEventsFile).string());
  for (const auto& e : batch) out << to_json(e).dump() << '\n';
  out.flush();
  if (!out) throw IngestError("write failed on " + (*data_dir_ / kEventsFile).string());
}

void EventStore::persist_auth(const std::vector<AuthEvent>& batch) const {
  if (!data_dir_) return;
  std::ofstream out(*data_dir_ / kAuthFile, std::ios::app);
  if (!out) throw IngestError("cannot open " + (*data_dir_ / kAuthFile).string());
  for (const auto& e : batch) out << to_json(e).dump() << '\n';
  out.flush();
  if (!out) throw IngestError("write failed on " + (*data_dir_ / kAuthFile).string());
}

void EventStore::write_sidecar() const {
  if (!data_dir_) return;
  // Line numbers into events.jsonl, 0-based, keyed by employee and client.
  nlohmann::json doc{{"version", 1}, {"events", events_.size()}};
  auto& emp = doc["employees"] = nlohmann::json::object();
  for (const auto& [id, idx] : by_employee_) emp[id] = idx;
  auto& cli = doc["clients"] = nlohmann::json::object();
  for (const auto& [id, idx] : by_client_) cli[id] = idx;
  const auto tmp = *data_dir_ / (std::string(kSidecarFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << doc.dump() << '\n';
    if (!out) throw IngestError("cannot write sidecar index");
  }
  fs::rename(tmp, *data_dir_ / kSidecarFile);
}

std::vector<Event> EventStore::collect(const std::vector<std::size_t>& indices) const {
  std::vector<Event> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(events_[i]);
  std::stable_sort(out.begin(), out.end(),
                   [](const Event& a, const Event& b) { return a.ts < b.ts; });
  return out;
}

std::vector<Event> EventStore::query_events(const QueryFilter& filter) const {
  filter.validate();
  std::shared_lock lock(mutex_);
  std::vector<std::size_t> candidates;
  auto gather = [&](const Index& index, const std::set<std::string>& keys) {
    for (const auto& key : keys) {
      if (auto it = index.find(key); it != index.end()) {
        candidates.insert(candidates.end(), it->second.begin(), it->second.end());
      }
    }
    std::sort(candidates.begin(), candidates.end());
  };
  if (filter.employees) {
    gather(by_employee_, *filter.employees);
  } else if (filter.clients) {
    gather(by_client_, *filter.clients);
  } else {
    candidates.resize(events_.size());
    for (std::size_t i = 0; i < events_.size(); ++i) candidates[i] = i;
  }
  std::vector<std::size_t> matched;
  for (auto i : candidates) {
    if (filter.matches(events_[i])) matched.push_back(i);
  }
  auto out = collect(matched);
  if (filter.dedupe) {
    std::vector<Event> unique;
    for (auto& e : out) {
      // Duplicates share a timestamp, so they sit in the same ts run.
      bool dup = false;
      for (auto it = unique.rbegin(); it != unique.rend() && it->ts == e.ts; ++it) {
        if (*it == e) {
          dup = true;
          break;
        }
      }
      if (!dup) unique.push_back(std::move(e));
    }
    out = std::move(unique);
  }
  return out;
}

std::vector<AuthEvent> EventStore::query_auth(const QueryFilter& filter) const {
  filter.validate();
  std::shared_lock lock(mutex_);
  std::vector<AuthEvent> out;
  for (const auto& e : auth_events_) {
    if (filter.matches(e)) out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AuthEvent& a, const AuthEvent& b) { return a.ts < b.ts; });
  return out;
}

EventSeries EventStore::series_for_pair(const std::string& employee,
                                        const std::string& client) const {
  std::shared_lock lock(mutex_);
  EventSeries series{employee, client, {}};
  if (auto it = by_pair_.find({employee, client}); it != by_pair_.end()) {
    series.events = collect(it->second);
  }
  return series;
}

EventSeries EventStore::series_for_client(const std::string& client) const {
  std::shared_lock lock(mutex_);
  EventSeries series{std::nullopt, client, {}};
  if (auto it = by_client_.find(client); it != by_client_.end()) {
    series.events = collect(it->second);
  }
  return series;
}

void EventStore::export_records(const QueryFilter& filter, ExportFormat format,
                                std::ostream& out) const {
  const auto events = query_events(filter);
  if (format == ExportFormat::canonical_jsonl) {
    for (const auto& e : events) out << to_json(e).dump() << '\n';
    return;
  }
  out << "ts,employee,client,action,system,extras\n";
  for (const auto& e : events) {
    const std::string extras = e.extras.is_object() && !e.extras.empty() ? e.extras.dump() : "";
    out << format_iso8601(e.ts) << ',' << csv::escape(e.employee) << ',' << csv::escape(e.client)
        << ',' << csv::escape(e.action) << ',' << csv::escape(e.system) << ','
        << csv::escape(extras) << '\n';
  }
}

std::string EventStore::export_records(const QueryFilter& filter, ExportFormat format) const {
  std::ostringstream out;
  export_records(filter, format, out);
  return out.str();
}

CorpusStats EventStore::stats() const {
  std::shared_lock lock(mutex_);
  return compute_stats(events_);
}

namespace {
template <typename Map>
std::vector<std::string> keys_of(const Map& m) {
  std::vector<std::string> out;
  out.reserve(m.size());
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}
}  // namespace

std::vector<std::string> EventStore::employees() const {
  std::shared_lock lock(mutex_);
  return keys_of(by_employee_);
}

std::vector<std::string> EventStore::clients() const {
  std::shared_lock lock(mutex_);
  return keys_of(by_client_);
}

std::vector<std::string> EventStore::clients_of(const std::string& employee) const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (auto it = by_pair_.lower_bound({employee, std::string{}});
       it != by_pair_.end() && it->first.first == employee; ++it) {
    out.push_back(it->first.second);
  }
  return out;
}

std::vector<std::string> EventStore::employees_of(const std::string& client) const {
  std::shared_lock lock(mutex_);
  std::set<std::string> out;
  if (auto it = by_client_.find(client); it != by_client_.end()) {
    for (auto i : it->second) out.insert(events_[i].employee);
  }
  return {out.begin(), out.end()};
}

std::vector<std::pair<std::string, std::string>> EventStore::pairs() const {
  std::shared_lock lock(mutex_);
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(by_pair_.size());
  for (const auto& [k, v] : by_pair_) out.push_back(k);
  return out;
}

std::size_t EventStore::pair_event_count(const std::string& employee,
                                         const std::string& client) const {
  std::shared_lock lock(mutex_);
  auto it = by_pair_.find({employee, client});
  return it == by_pair_.end() ? 0 : it->second.size();
}

std::map<std::string, std::size_t> EventStore::system_usage(const std::string& employee) const {
  std::shared_lock lock(mutex_);
  std::map<std::string, std::size_t> usage;
  if (auto it = by_employee_.find(employee); it != by_employee_.end()) {
    for (auto i : it->second) ++usage[events_[i].system];
  }
  return usage;
}

std::size_t EventStore::size() const {
  std::shared_lock lock(mutex_);
  return events_.size();
}

std::size_t EventStore::auth_size() const {
  std::shared_lock lock(mutex_);
  return auth_events_.size();
}

std::uint64_t EventStore::revision() const {
  std::shared_lock lock(mutex_);
  return revision_;
}

}  // namespace fraudlens
