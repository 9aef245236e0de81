#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "fraudlens/event_store.hpp"
#include "fraudlens/layout.hpp"
#include "fraudlens/plots.hpp"
#include "fraudlens/scoring.hpp"
#include "fraudlens/session.hpp"

namespace httplib {
class Server;
}

namespace fraudlens {

struct ServiceConfig {
  std::optional<std::filesystem::path> data_dir;  // in-memory store when absent
  // Defaults to <data_dir>/profiles.json when that file exists.
  std::optional<std::filesystem::path> profiles_path;
  ScoringConfig scoring;
  LayoutOptions layout;
  AuthFlagConfig auth;
  std::size_t addition_cap = 10;
  std::string host = "127.0.0.1";
  int port = 8080;

  // {"scoring": {...}, "layout": {...}, "auth": {...}, "addition_cap": n}
  void merge_json(const nlohmann::json& j);
};

struct Request {
  std::string method;  // GET, POST
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

enum class ApiErrorCode { bad_request, not_found, conflict, internal };
std::string to_string(ApiErrorCode c);
int http_status(ApiErrorCode c);

// FNV-1a over the text, as 16 hex digits.
std::string content_etag(const std::string& text);

// Store, severity cache and session registry behind one request entry point.
// dispatch() is safe to call from many threads.
class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();

  Response dispatch(const Request& req);

  // Scores the current store and swaps the cache in.
  void rescore();

  // Binds (port 0 picks a free one) and returns the bound port; throws
  // Error when binding fails.
  int bind();
  // Blocks until shutdown().
  void run();
  void shutdown();

  EventStore& store() { return *store_; }
  std::shared_ptr<const SeverityTables> tables() const;
  std::shared_ptr<const Scorer> scorer() const;
  const ServiceConfig& config() const { return cfg_; }
  LayoutContext layout_context() const;
  const BillingRegistry& billing() const { return billing_; }

 private:
  struct SessionSlot {
    std::mutex mutex;
    std::shared_ptr<const SeverityTables> tables;  // pinned for the session's lifetime
    std::shared_ptr<const Scorer> scorer;
    std::unique_ptr<Session> session;
  };

  Response route(const Request& req);
  Response session_route(const Request& req, const std::string& id, const std::string& verb);
  std::shared_ptr<SessionSlot> find_session(const std::string& id) const;
  std::string register_session(std::shared_ptr<SessionSlot> slot);
  Response ingest(const Request& req, bool auth);
  Response svg(const Request& req);

  ServiceConfig cfg_;
  std::unique_ptr<EventStore> store_;
  BillingRegistry billing_;

  mutable std::shared_mutex cache_mutex_;
  std::shared_ptr<const Scorer> scorer_;
  std::shared_ptr<const SeverityTables> tables_;
  std::string etag_;

  // Ingest batches and rescoring exclude each other.
  std::mutex pipeline_mutex_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;
  std::uint64_t next_session_ = 1;

  std::unique_ptr<httplib::Server> server_;
};

}  // namespace fraudlens
