#include "fraudlens/service.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include <httplib.h>

#include "fraudlens/errors.hpp"
#include "fraudlens/svg.hpp"

namespace fraudlens {

namespace {

struct ApiException {
  ApiErrorCode code;
  std::string message;
  std::optional<std::string> reason;
};

[[noreturn]] void bad_request(const std::string& msg) { throw ApiException{ApiErrorCode::bad_request, msg, {}}; }

Response json_response(const nlohmann::json& j, int status = 200) {
  Response r;
  r.status = status;
  r.body = j.dump();
  return r;
}

Response error_response(ApiErrorCode code, const std::string& message,
                        const std::optional<std::string>& reason = {}) {
  nlohmann::json err = {{"code", to_string(code)}, {"message", message}};
  if (reason) err["reason"] = *reason;
  return json_response({{"error", err}}, http_status(code));
}

nlohmann::json parse_body(const Request& req) {
  if (req.body.find_first_not_of(" \t\r\n") == std::string::npos) return nlohmann::json::object();
  try {
    auto j = nlohmann::json::parse(req.body);
    if (!j.is_object()) bad_request("request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    bad_request(std::string("invalid JSON body: ") + e.what());
  }
}

std::optional<std::string> param(const Request& req, const std::string& key) {
  auto it = req.query.find(key);
  if (it == req.query.end()) return std::nullopt;
  return it->second;
}

std::string required(const Request& req, const std::string& key) {
  auto v = param(req, key);
  if (!v || v->empty()) bad_request("missing query parameter '" + key + "'");
  return *v;
}

long long int_param(const Request& req, const std::string& key, long long fallback) {
  auto v = param(req, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const long long n = std::stoll(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing");
    return n;
  } catch (const std::exception&) {
    bad_request("query parameter '" + key + "' must be an integer");
  }
}

std::set<std::string> split_list(const std::string& s) {
  std::set<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

QueryFilter filter_from(const Request& req) {
  QueryFilter f;
  auto list = [&](const char* key, std::optional<std::set<std::string>>& dst) {
    if (auto v = param(req, key)) dst = split_list(*v);
  };
  list("employee", f.employees);
  list("client", f.clients);
  list("system", f.systems);
  list("action", f.actions);
  auto ts = [&](const char* key, std::optional<Timestamp>& dst) {
    if (auto v = param(req, key)) {
      dst = parse_iso8601(*v);
      if (!dst) bad_request(std::string("'") + key + "' is not an ISO-8601 timestamp");
    }
  };
  ts("from", f.from_ts);
  ts("to", f.to_ts);
  if (auto v = param(req, "dedupe")) f.dedupe = *v == "true" || *v == "1";
  f.validate();
  return f;
}

AuthFlagConfig auth_cfg_from(const Request& req, AuthFlagConfig cfg) {
  const auto x = int_param(req, "fail_x", static_cast<long long>(cfg.fail_x));
  if (x < 0) bad_request("fail_x must be >= 0");
  cfg.fail_x = static_cast<std::size_t>(x);
  cfg.fail_y_days = static_cast<int>(int_param(req, "fail_y_days", cfg.fail_y_days));
  cfg.validate();
  return cfg;
}

Profiles load_profiles(const ServiceConfig& cfg) {
  if (cfg.profiles_path) return Profiles::load(cfg.profiles_path->string());
  if (cfg.data_dir && std::filesystem::exists(*cfg.data_dir / "profiles.json")) {
    return Profiles::load((*cfg.data_dir / "profiles.json").string());
  }
  return Profiles{};
}

PatternLibrary load_library(const ServiceConfig& cfg) {
  PatternLibrary lib;
  if (cfg.data_dir) {
    const auto path = *cfg.data_dir / "patterns.jsonl";
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      lib.load_registry(in);
    }
  }
  return lib;
}

nlohmann::json ingest_json(const IngestResult& r) {
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : r.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
  return {{"accepted", r.count}, {"rejected", r.errors.size()}, {"errors", errors}};
}

nlohmann::json entity_scores(const std::map<std::string, SeverityScore>& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [id, s] : m) {
    auto j = to_json(s);
    j["id"] = id;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace

std::string to_string(ApiErrorCode c) {
  switch (c) {
    case ApiErrorCode::bad_request: return "bad_request";
    case ApiErrorCode::not_found: return "not_found";
    case ApiErrorCode::conflict: return "conflict";
    case ApiErrorCode::internal: return "internal";
  }
  return "internal";
}

int http_status(ApiErrorCode c) {
  switch (c) {
    case ApiErrorCode::bad_request: return 400;
    case ApiErrorCode::not_found: return 404;
    case ApiErrorCode::conflict: return 409;
    case ApiErrorCode::internal: return 500;
  }
  return 500;
}

std::string content_etag(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ServiceConfig::merge_json(const nlohmann::json& j) {
  try {
    if (j.contains("scoring")) scoring = ScoringConfig::from_json(j.at("scoring"));
    if (j.contains("layout")) layout = LayoutOptions::from_json(j.at("layout"), layout);
    if (j.contains("auth")) {
      auth.fail_x = j.at("auth").value("fail_x", auth.fail_x);
      auth.fail_y_days = j.at("auth").value("fail_y_days", auth.fail_y_days);
      auth.validate();
    }
    addition_cap = j.value("addition_cap", addition_cap);
    if (addition_cap == 0) throw ConfigError("addition_cap must be >= 1");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("service config: ") + e.what());
  }
}

// ---------------------------------------------------------------- lifecycle

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.scoring.validate();
  cfg_.layout.validate();
  cfg_.auth.validate();
  store_ = cfg_.data_dir ? std::make_unique<EventStore>(*cfg_.data_dir) : std::make_unique<EventStore>();
  if (cfg_.data_dir) {
    const auto path = *cfg_.data_dir / "billing.jsonl";
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      billing_.load(in);
    }
  }
  scorer_ = std::make_shared<const Scorer>(cfg_.scoring, load_profiles(cfg_), load_library(cfg_));
  rescore();
}

Service::~Service() { shutdown(); }

void Service::rescore() {
  std::lock_guard pipeline(pipeline_mutex_);
  std::shared_ptr<const Scorer> scorer;
  {
    std::shared_lock lock(cache_mutex_);
    scorer = scorer_;
  }
  auto tables = std::make_shared<const SeverityTables>(score_corpus(*store_, *scorer));
  const auto etag = content_etag(to_json(*tables).dump());
  std::unique_lock lock(cache_mutex_);
  tables_ = std::move(tables);
  etag_ = etag;
}

std::shared_ptr<const SeverityTables> Service::tables() const {
  std::shared_lock lock(cache_mutex_);
  return tables_;
}

std::shared_ptr<const Scorer> Service::scorer() const {
  std::shared_lock lock(cache_mutex_);
  return scorer_;
}

LayoutContext Service::layout_context() const {
  std::shared_lock lock(cache_mutex_);
  return LayoutContext{store_.get(), tables_.get(), scorer_.get(), cfg_.layout};
}

int Service::bind() {
  if (!server_) {
    server_ = std::make_unique<httplib::Server>();
    auto handler = [this](const httplib::Request& hreq, httplib::Response& hres) {
      Request req;
      req.method = hreq.method;
      req.path = hreq.path;
      req.body = hreq.body;
      for (const auto& [k, v] : hreq.params) req.query[k] = v;
      const Response res = dispatch(req);
      hres.status = res.status;
      for (const auto& [k, v] : res.headers) hres.set_header(k, v);
      hres.set_content(res.body, res.content_type);
    };
    server_->Get(R"(/.*)", handler);
    server_->Post(R"(/.*)", handler);
  }
  int port = cfg_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(cfg_.host);
    if (port < 0) throw Error("cannot bind " + cfg_.host);
  } else if (!server_->bind_to_port(cfg_.host, port)) {
    throw Error("cannot bind " + cfg_.host + ":" + std::to_string(port));
  }
  return port;
}

void Service::run() {
  if (!server_) bind();
  server_->listen_after_bind();
}

void Service::shutdown() {
  if (server_) server_->stop();
}

// ---------------------------------------------------------------- dispatch

Response Service::dispatch(const Request& req) {
  try {
    return route(req);
  } catch (const ApiException& e) {
    return error_response(e.code, e.message, e.reason);
  } catch (const InvalidTransition& e) {
    return error_response(ApiErrorCode::conflict, e.what(), e.reason());
  } catch (const NotFoundError& e) {
    return error_response(ApiErrorCode::not_found, e.what());
  } catch (const ConfigError& e) {
    return error_response(ApiErrorCode::bad_request, e.what());
  } catch (const ContractViolation& e) {
    return error_response(ApiErrorCode::bad_request, e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_response(ApiErrorCode::bad_request, e.what());
  } catch (const std::exception& e) {
    return error_response(ApiErrorCode::internal, e.what());
  }
}

Response Service::route(const Request& req) {
  const auto& p = req.path;
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";

  if (get && p == "/health") {
    const auto t = tables();
    return json_response({{"status", "ok"},
                          {"events", store_->size()},
                          {"auth_events", store_->auth_size()},
                          {"employees", store_->employees().size()},
                          {"clients", store_->clients().size()},
                          {"scored_employees", t->employees.size()}});
  }
  if (post && p == "/ingest") return ingest(req, false);
  if (post && p == "/ingest/auth") return ingest(req, true);
  if (get && p == "/events") {
    const auto events = store_->query_events(filter_from(req));
    const auto limit = int_param(req, "limit", -1);
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (limit >= 0 && i >= static_cast<std::size_t>(limit)) break;
      arr.push_back(to_json(events[i]));
    }
    return json_response({{"count", events.size()}, {"events", arr}});
  }
  if (get && p == "/stats") {
    auto j = to_json(store_->stats());
    j["auth_events"] = store_->auth_size();
    return json_response(j);
  }
  if (post && p == "/rescore") {
    rescore();
    const auto t = tables();
    std::shared_lock lock(cache_mutex_);
    return json_response({{"etag", etag_},
                          {"employees", t->employees.size()},
                          {"clients", t->clients.size()},
                          {"pairs", t->pairs.size()},
                          {"warnings", t->warnings}});
  }
  if (get && (p == "/scores/employees" || p == "/scores/clients")) {
    const auto t = tables();
    std::string etag;
    {
      std::shared_lock lock(cache_mutex_);
      etag = etag_;
    }
    const bool employees = p == "/scores/employees";
    Response r;
    if (param(req, "format").value_or("json") == "csv") {
      SeverityTables part;
      (employees ? part.employees : part.clients) = employees ? t->employees : t->clients;
      r.content_type = "text/csv";
      r.body = to_csv(part);
    } else {
      r = json_response({{employees ? "employees" : "clients", entity_scores(employees ? t->employees : t->clients)}});
    }
    r.headers["ETag"] = "\"" + etag + "\"";
    return r;
  }
  if (get && (p == "/heatmap/employees" || p == "/heatmap/clients")) {
    const auto t = tables();
    const auto columns = int_param(req, "columns", static_cast<long long>(cfg_.layout.heatmap_columns));
    if (columns < 1) bad_request("columns must be >= 1");
    const auto& m = p == "/heatmap/employees" ? t->employees : t->clients;
    return json_response(to_json(build_heatmap(severity_values(m), static_cast<std::size_t>(columns))));
  }
  if (post && p == "/sessions") {
    const auto body = parse_body(req);
    if (!body.contains("threshold") || !body.at("threshold").is_number()) {
      bad_request("'threshold' (number) is required");
    }
    auto slot = std::make_shared<SessionSlot>();
    LayoutContext ctx;
    {
      std::shared_lock lock(cache_mutex_);
      slot->tables = tables_;
      slot->scorer = scorer_;
    }
    ctx.store = store_.get();
    ctx.tables = slot->tables.get();
    ctx.scorer = slot->scorer.get();
    ctx.options = LayoutOptions::from_json(body, cfg_.layout);
    const auto cap = body.value("addition_cap", cfg_.addition_cap);
    slot->session = std::make_unique<Session>(ctx, body.at("threshold").get<double>(), cap);
    const auto state = slot->session->state_json();
    const auto id = register_session(slot);
    return json_response({{"id", id}, {"playlist_length", state.at("playlist_length")}, {"state", state}}, 201);
  }
  if (post && p == "/sessions/restore") {
    const auto body = parse_body(req);
    auto slot = std::make_shared<SessionSlot>();
    {
      std::shared_lock lock(cache_mutex_);
      slot->tables = tables_;
      slot->scorer = scorer_;
    }
    LayoutContext ctx{store_.get(), slot->tables.get(), slot->scorer.get(), cfg_.layout};
    slot->session = std::make_unique<Session>(Session::restore(ctx, body));
    const auto state = slot->session->state_json();
    const auto id = register_session(slot);
    return json_response({{"id", id}, {"playlist_length", state.at("playlist_length")}, {"state", state}}, 201);
  }
  static const std::regex session_re(R"(^/sessions/([^/]+)(?:/([a-z_]+))?$)");
  std::smatch m;
  if (std::regex_match(p, m, session_re)) return session_route(req, m[1].str(), m[2].str());

  if (get && p == "/plots/timeline") {
    const auto employee = required(req, "employee");
    const auto client = required(req, "client");
    auto data = timeline_data(*store_, employee, client);
    if (!data.points.empty()) {
      data.billing_dates = billing_.dates_for(client, data.points.front().date, data.points.back().date);
    }
    return json_response(to_json(data));
  }
  if (get && p == "/plots/periodicity") {
    return json_response(to_json(periodicity_plot_data(*store_, required(req, "employee"), required(req, "client"))));
  }
  if (get && p == "/plots/parallel") {
    return json_response(to_json(parallel_coords_data(*store_, filter_from(req), auth_cfg_from(req, cfg_.auth))));
  }
  if (get && p == "/plots/auth-flags") {
    return json_response({{"flags", to_json(auth_pattern_flags(*store_, auth_cfg_from(req, cfg_.auth)))}});
  }
  if (get && p == "/export") {
    const auto format = parse_export_format(param(req, "format").value_or("jsonl"));
    Response r;
    r.content_type = format == ExportFormat::csv ? "text/csv" : "application/x-ndjson";
    r.body = store_->export_records(filter_from(req), format);
    return r;
  }
  if (get && p == "/render/svg") return svg(req);

  if (get || post) throw ApiException{ApiErrorCode::not_found, "no endpoint " + req.method + " " + p, {}};
  bad_request("unsupported method " + req.method);
}

Response Service::ingest(const Request& req, bool auth) {
  std::optional<CsvMapping> mapping;
  if (auto m = param(req, "mapping")) {
    try {
      mapping = CsvMapping::from_json(nlohmann::json::parse(*m));
    } catch (const nlohmann::json::parse_error& e) {
      bad_request(std::string("mapping is not JSON: ") + e.what());
    }
  }
  const auto format = IngestFormat::parse(param(req, "format").value_or("jsonl"), mapping);
  std::istringstream in(req.body);
  std::lock_guard pipeline(pipeline_mutex_);
  const auto result = auth ? store_->ingest_auth_records(in, format) : store_->ingest_records(in, format);
  return json_response(ingest_json(result));
}

std::string Service::register_session(std::shared_ptr<SessionSlot> slot) {
  std::lock_guard lock(sessions_mutex_);
  const std::string id = "s" + std::to_string(next_session_++);
  sessions_[id] = std::move(slot);
  return id;
}

std::shared_ptr<Service::SessionSlot> Service::find_session(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
  return it->second;
}

Response Service::session_route(const Request& req, const std::string& id, const std::string& verb) {
  auto slot = find_session(id);
  std::lock_guard lock(slot->mutex);
  Session& s = *slot->session;
  auto reply = [&](bool with_scene) {
    nlohmann::json j = {{"id", id}, {"state", s.state_json()}};
    if (with_scene) j["scene"] = s.scene() ? to_json(*s.scene()) : nlohmann::json(nullptr);
    return json_response(j);
  };

  if (req.method == "GET") {
    if (verb.empty()) return reply(false);
    if (verb == "scene") {
      if (!s.scene()) throw InvalidTransition("no_frame", "no frame is shown yet");
      return json_response(to_json(*s.scene()));
    }
    if (verb == "checkpoint") return json_response(s.checkpoint());
    throw NotFoundError("no endpoint GET " + req.path);
  }
  if (req.method != "POST") bad_request("unsupported method " + req.method);

  if (verb == "start") s.start();
  else if (verb == "pause") s.pause();
  else if (verb == "resume") s.resume();
  else if (verb == "stop") s.stop();
  else if (verb == "next") s.next();
  else if (verb == "select") {
    const auto body = parse_body(req);
    if (!body.contains("node") || !body.at("node").is_string()) bad_request("'node' (string) is required");
    s.select(body.at("node").get<std::string>());
  } else if (verb == "mode") {
    const auto body = parse_body(req);
    if (!body.contains("mode") || !body.at("mode").is_string()) bad_request("'mode' (string) is required");
    s.set_mode(parse_scene_mode(body.at("mode").get<std::string>()));
  } else if (verb == "threshold") {
    const auto body = parse_body(req);
    if (!body.contains("threshold") || !body.at("threshold").is_number()) {
      bad_request("'threshold' (number) is required");
    }
    s.set_threshold(body.at("threshold").get<double>());
  } else {
    throw NotFoundError("no endpoint POST " + req.path);
  }
  return reply(true);
}

Response Service::svg(const Request& req) {
  SvgOptions opts;
  if (auto v = param(req, "size")) {
    const auto size = int_param(req, "size", 800);
    if (size < 50) bad_request("size must be >= 50");
    opts.size = static_cast<double>(size);
  }
  Response r;
  r.content_type = "image/svg+xml";
  if (auto sid = param(req, "session")) {
    auto slot = find_session(*sid);
    std::lock_guard lock(slot->mutex);
    if (!slot->session->scene()) throw InvalidTransition("no_frame", "no frame is shown yet");
    r.body = render_svg(*slot->session->scene(), opts);
    return r;
  }
  const auto employee = required(req, "employee");
  const auto t = tables();
  const auto sc = scorer();
  LayoutContext ctx{store_.get(), t.get(), sc.get(), cfg_.layout};
  r.body = render_svg(build_frame_scene(ctx, employee), opts);
  return r;
}

}  // namespace fraudlens
