#include <gtest/gtest.h>

#include <filesystem>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "fraudlens/errors.hpp"
#include "fraudlens/service.hpp"
#include "test_support.hpp"

using namespace fraudlens;
using namespace fraudlens::testing;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fraudlens_service_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "profiles.json") << open_profiles().to_json().dump();
  return dir;
}

ServiceConfig config_for(const fs::path& dir) {
  ServiceConfig cfg;
  cfg.data_dir = dir;
  return cfg;
}

Response get(Service& s, const std::string& path, std::map<std::string, std::string> query = {}) {
  return s.dispatch({"GET", path, std::move(query), ""});
}

Response post(Service& s, const std::string& path, const nlohmann::json& body = nlohmann::json::object(),
              std::map<std::string, std::string> query = {}) {
  return s.dispatch({"POST", path, std::move(query), body.dump()});
}

Response post_raw(Service& s, const std::string& path, std::string body,
                  std::map<std::string, std::string> query = {}) {
  return s.dispatch({"POST", path, std::move(query), std::move(body)});
}

std::string jsonl(const std::vector<Event>& events) {
  std::string out;
  for (const auto& e : events) out += to_json(e).dump() + "\n";
  return out;
}

// u1 works c1 monthly, u2 and u3 share c2 sparsely.
std::vector<Event> small_corpus() {
  auto v = on_dates(monthly(date("2023-01-12"), 6), "u1", "c1");
  auto w = on_dates({date("2023-02-06"), date("2023-04-18")}, "u2", "c2");
  auto x = on_dates({date("2023-03-07")}, "u3", "c2");
  v.insert(v.end(), w.begin(), w.end());
  v.insert(v.end(), x.begin(), x.end());
  return v;
}

void expect_error(const Response& r, int status, const std::string& code) {
  EXPECT_EQ(r.status, status) << r.body;
  const auto j = r.json();
  ASSERT_EQ(j.size(), 1u) << r.body;
  EXPECT_EQ(j.at("error").at("code"), code);
  EXPECT_TRUE(j.at("error").at("message").is_string());
}

}  // namespace

TEST(Service, EtagIsFnv1a) {
  EXPECT_EQ(content_etag(""), "cbf29ce484222325");
  EXPECT_EQ(content_etag("a"), "af63dc4c8601ec8c");
}

TEST(Service, HealthOnEmptyStore) {
  Service s(config_for(fresh_dir("health")));
  const auto h = get(s, "/health");
  EXPECT_EQ(h.status, 200);
  EXPECT_EQ(h.json().at("status"), "ok");
  EXPECT_EQ(h.json().at("events"), 0);
  const auto st = get(s, "/stats").json();
  EXPECT_EQ(st.at("auth_events"), 0);
}

TEST(Service, IngestRescoreScoresMatchScorer) {
  Service s(config_for(fresh_dir("ingest")));
  auto body = jsonl(small_corpus());
  body += R"({"ts":"2023-01-01T00:00:00Z","employee":"u9","action":"A101","system":"CRM"})" "\n";
  const auto r = post_raw(s, "/ingest", body);
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.json().at("accepted"), 9);
  EXPECT_EQ(r.json().at("rejected"), 1);
  EXPECT_EQ(r.json().at("errors").at(0).at("line"), 10);

  // Scores are cached until rescore.
  EXPECT_TRUE(get(s, "/scores/employees").json().at("employees").empty());
  const auto rs = post(s, "/rescore");
  ASSERT_EQ(rs.status, 200);
  EXPECT_EQ(rs.json().at("employees"), 3);

  Scorer oracle_scorer(ScoringConfig{}, open_profiles());
  const auto oracle = score_corpus(s.store(), oracle_scorer);
  const auto scores = get(s, "/scores/employees").json().at("employees");
  ASSERT_EQ(scores.size(), oracle.employees.size());
  for (const auto& e : scores) {
    EXPECT_DOUBLE_EQ(e.at("severity").get<double>(), oracle.employees.at(e.at("id").get<std::string>()).value);
  }
  EXPECT_EQ(get(s, "/scores/clients").json().at("clients").size(), 2u);
}

TEST(Service, RescoreWithoutChangesKeepsEtag) {
  Service s(config_for(fresh_dir("etag")));
  post_raw(s, "/ingest", jsonl(small_corpus()));
  post(s, "/rescore");
  const auto a = get(s, "/scores/employees");
  post(s, "/rescore");
  const auto b = get(s, "/scores/employees");
  ASSERT_TRUE(a.headers.count("ETag"));
  EXPECT_EQ(a.headers.at("ETag"), b.headers.at("ETag"));
  EXPECT_EQ(a.body, b.body);
  post_raw(s, "/ingest", jsonl(on_dates({date("2023-05-05")}, "u4", "c4")));
  post(s, "/rescore");
  EXPECT_NE(get(s, "/scores/employees").headers.at("ETag"), a.headers.at("ETag"));
}

TEST(Service, ScoresAsCsv) {
  Service s(config_for(fresh_dir("csv")));
  post_raw(s, "/ingest", jsonl(small_corpus()));
  post(s, "/rescore");
  const auto r = get(s, "/scores/employees", {{"format", "csv"}});
  EXPECT_EQ(r.content_type, "text/csv");
  std::istringstream in(r.body);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) lines += !line.empty();
  EXPECT_EQ(lines, 4u);  // header + 3 employees
}

TEST(Service, CsvIngestWithMapping) {
  Service s(config_for(fresh_dir("csvingest")));
  const std::string mapping = R"({"columns":["employee","client","ts","action","system"],"ts_format":"%d/%m/%Y %H:%M"})";
  const auto r = post_raw(s, "/ingest", "u1,c1,06/03/2023 10:30,A101,CRM\nu1,c2,07/03/2023 11:00,A102,CRM\n",
                          {{"format", "csv"}, {"mapping", mapping}});
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.json().at("accepted"), 2);
  const auto ev = get(s, "/events", {{"client", "c2"}}).json();
  EXPECT_EQ(ev.at("count"), 1);
  EXPECT_EQ(ev.at("events").at(0).at("ts"), "2023-03-07T11:00:00Z");
  expect_error(post_raw(s, "/ingest", "x", {{"format", "csv"}}), 400, "bad_request");
  expect_error(post_raw(s, "/ingest", "x", {{"format", "xml"}}), 400, "bad_request");
}

TEST(Service, SessionLifecycle) {
  Service s(config_for(fresh_dir("session")));
  post_raw(s, "/ingest", jsonl(small_corpus()));
  post(s, "/rescore");
  const auto created = post(s, "/sessions", {{"threshold", 0.0}});
  ASSERT_EQ(created.status, 201) << created.body;
  const auto id = created.json().at("id").get<std::string>();
  const auto expected = build_playlist(*s.tables(), 0.0);
  EXPECT_EQ(created.json().at("playlist_length"), expected.size());

  expect_error(get(s, "/sessions/" + id + "/scene"), 409, "conflict");
  EXPECT_EQ(get(s, "/sessions/" + id + "/scene").json().at("error").at("reason"), "no_frame");

  ASSERT_EQ(post(s, "/sessions/" + id + "/start").status, 200);
  for (const auto& emp : expected) {
    const auto r = post(s, "/sessions/" + id + "/next");
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(r.json().at("state").at("focus"), emp);
    EXPECT_EQ(r.json().at("scene").at("focus"), emp);
  }
  const auto scene = get(s, "/sessions/" + id + "/scene");
  EXPECT_EQ(scene.status, 200);
  EXPECT_EQ(scene.json().at("focus"), expected.back());

  const auto done = post(s, "/sessions/" + id + "/next");
  expect_error(done, 409, "conflict");
  EXPECT_EQ(done.json().at("error").at("reason"), "playlist_exhausted");
  EXPECT_EQ(get(s, "/sessions/" + id).json().at("state").at("status"), "stopped");
}

TEST(Service, SessionSelectModeAndThreshold) {
  Service s(config_for(fresh_dir("select")));
  post_raw(s, "/ingest", jsonl(small_corpus()));
  post(s, "/rescore");
  const auto id = post(s, "/sessions", {{"threshold", 0.0}, {"t_low", 0.0}, {"t_med", 0.0}}).json().at("id").get<std::string>();
  post(s, "/sessions/" + id + "/start");
  // Walk to u2, whose client c2 is shared with u3.
  std::string focus;
  while (focus != "u2") focus = post(s, "/sessions/" + id + "/next").json().at("state").at("focus");
  const auto sel = post(s, "/sessions/" + id + "/select", {{"node", "c2"}});
  ASSERT_EQ(sel.status, 200) << sel.body;
  EXPECT_EQ(sel.json().at("state").at("additions"), 1);
  EXPECT_EQ(sel.json().at("state").at("status"), "paused");
  expect_error(post(s, "/sessions/" + id + "/select", {{"node", "ghost"}}), 404, "not_found");
  expect_error(post(s, "/sessions/" + id + "/select", nlohmann::json::object()), 400, "bad_request");

  const auto ov = post(s, "/sessions/" + id + "/mode", {{"mode", "overview"}});
  ASSERT_EQ(ov.status, 200);
  EXPECT_TRUE(ov.json().at("scene").at("bands").empty());
  expect_error(post(s, "/sessions/" + id + "/mode", {{"mode", "sideways"}}), 400, "bad_request");

  const auto th = post(s, "/sessions/" + id + "/threshold", {{"threshold", 2.0}});
  EXPECT_EQ(th.json().at("state").at("playlist_length"), 0);
  EXPECT_TRUE(th.json().at("scene").is_null());
}

TEST(Service, CheckpointSurvivesRestart) {
  const auto dir = fresh_dir("restart");
  nlohmann::json cp, state;
  {
    Service s(config_for(dir));
    post_raw(s, "/ingest", jsonl(small_corpus()));
    post(s, "/rescore");
    const auto id = post(s, "/sessions", {{"threshold", 0.0}}).json().at("id").get<std::string>();
    post(s, "/sessions/" + id + "/start");
    post(s, "/sessions/" + id + "/next");
    post(s, "/sessions/" + id + "/pause");
    cp = get(s, "/sessions/" + id + "/checkpoint").json();
    state = get(s, "/sessions/" + id).json().at("state");
  }
  Service again(config_for(dir));
  EXPECT_EQ(again.store().size(), small_corpus().size());
  const auto r = post(again, "/sessions/restore", cp);
  ASSERT_EQ(r.status, 201) << r.body;
  EXPECT_EQ(r.json().at("state"), state);
  const auto id = r.json().at("id").get<std::string>();
  post(again, "/sessions/" + id + "/resume");
  const auto next = post(again, "/sessions/" + id + "/next");
  EXPECT_EQ(next.json().at("state").at("cursor"), 1);
}

TEST(Service, ErrorsCarryOneApiError) {
  Service s(config_for(fresh_dir("errors")));
  expect_error(get(s, "/sessions/s99"), 404, "not_found");
  expect_error(post(s, "/sessions/s99/next"), 404, "not_found");
  expect_error(get(s, "/nowhere"), 404, "not_found");
  expect_error(post_raw(s, "/sessions", "{not json"), 400, "bad_request");
  expect_error(post(s, "/sessions", {{"threshold", "high"}}), 400, "bad_request");
  expect_error(get(s, "/plots/timeline", {{"employee", "u1"}}), 400, "bad_request");
  expect_error(get(s, "/events", {{"from", "2023-05-01T00:00:00Z"}, {"to", "2023-01-01T00:00:00Z"}}), 400,
               "bad_request");
  expect_error(get(s, "/heatmap/employees", {{"columns", "0"}}), 400, "bad_request");
  expect_error(s.dispatch({"DELETE", "/health", {}, ""}), 400, "bad_request");
  expect_error(get(s, "/render/svg", {{"employee", "nobody"}}), 404, "not_found");
}

TEST(Service, PlotEndpoints) {
  Service s(config_for(fresh_dir("plots")));
  post_raw(s, "/ingest", jsonl(small_corpus()));
  std::string auth;
  for (int i = 0; i < 6; ++i) {
    auth += nlohmann::json{{"ts", "2023-04-03T0" + std::to_string(i) + ":00:00Z"},
                           {"employee", "u1"}, {"ip", "10.0.0.1"}, {"computer", "PC1"}, {"action", "login_failure"}}
                .dump() + "\n";
  }
  auth += R"({"ts":"2023-04-04T09:00:00Z","employee":"u2","ip":"10.0.0.2","computer":"PC2","action":"login"})" "\n";
  ASSERT_EQ(post_raw(s, "/ingest/auth", auth).json().at("accepted"), 7);

  const auto tl = get(s, "/plots/timeline", {{"employee", "u1"}, {"client", "c1"}});
  ASSERT_EQ(tl.status, 200);
  EXPECT_EQ(tl.json().at("points").size(), 6u);
  const auto none = get(s, "/plots/timeline", {{"employee", "u1"}, {"client", "c2"}});
  EXPECT_EQ(none.status, 200);
  EXPECT_TRUE(none.json().at("points").empty());

  const auto per = get(s, "/plots/periodicity", {{"employee", "u1"}, {"client", "c1"}}).json();
  for (const auto& p : per.at("series").at("A101")) EXPECT_EQ(p.at("day_of_month"), 12);

  const auto flags = get(s, "/plots/auth-flags").json().at("flags");
  ASSERT_EQ(flags.size(), 1u);
  EXPECT_EQ(flags[0].at("kind"), "burst_failures");
  EXPECT_TRUE(get(s, "/plots/auth-flags", {{"fail_x", "6"}}).json().at("flags").empty());

  const auto pc = get(s, "/plots/parallel", {{"employee", "u1"}}).json();
  EXPECT_EQ(pc.at("axes").at(1).at("nodes").at(0).at("count"), 6);

  post(s, "/rescore");
  const auto svg = get(s, "/render/svg", {{"employee", "u1"}});
  EXPECT_EQ(svg.content_type, "image/svg+xml");
  EXPECT_EQ(svg.body.rfind("<svg", 0), 0u);
  const auto hm = get(s, "/heatmap/clients", {{"columns", "1"}}).json();
  EXPECT_EQ(hm.at("cells").size(), 2u);
}

TEST(Service, BillingFileFeedsTimeline) {
  const auto dir = fresh_dir("billing");
  std::ofstream(dir / "billing.jsonl") << R"({"client":"c1","billing_day_of_month":10})" << "\n";
  Service s(config_for(dir));
  post_raw(s, "/ingest", jsonl(small_corpus()));
  const auto tl = get(s, "/plots/timeline", {{"employee", "u1"}, {"client", "c1"}}).json();
  // 2023-01-12 .. 2023-06-12 covers the 10th of Feb..Jun.
  EXPECT_EQ(tl.at("billing_dates").size(), 5u);
  EXPECT_EQ(tl.at("billing_dates").at(0), "2023-02-10");
}

TEST(Service, ExportRoundTrip) {
  Service s(config_for(fresh_dir("export")));
  post_raw(s, "/ingest", jsonl(small_corpus()));
  const auto r = get(s, "/export", {{"client", "c1"}});
  EXPECT_EQ(r.content_type, "application/x-ndjson");
  Service t(ServiceConfig{});
  EXPECT_EQ(post_raw(t, "/ingest", r.body).json().at("accepted"), 6);
  const auto csv = get(s, "/export", {{"format", "csv"}});
  EXPECT_EQ(csv.content_type, "text/csv");
}

TEST(Service, ConcurrentSessionsAndIngest) {
  Service s(config_for(fresh_dir("concurrent")));
  post_raw(s, "/ingest", jsonl(small_corpus()));
  post(s, "/rescore");
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int k = 0; k < 20; ++k) {
        const auto id = post(s, "/sessions", {{"threshold", 0.0}}).json().at("id").get<std::string>();
        post(s, "/sessions/" + id + "/start");
        if (post(s, "/sessions/" + id + "/next").status != 200) ++failures;
        if (get(s, "/sessions/" + id + "/scene").status != 200) ++failures;
      }
    });
  }
  threads.emplace_back([&] {
    for (int k = 0; k < 10; ++k) {
      post_raw(s, "/ingest", jsonl(on_dates({date("2023-08-01") + std::chrono::days{k}}, "w", "cw")));
      post(s, "/rescore");
    }
  });
  for (auto& t : threads) t.join();
  EXPECT_EQ(failures, 0);
  EXPECT_EQ(s.store().size(), small_corpus().size() + 10);
}

TEST(Service, ConfigMerge) {
  ServiceConfig cfg;
  cfg.merge_json({{"layout", {{"t_low", 0.2}}}, {"auth", {{"fail_x", 3}}}, {"addition_cap", 4}});
  EXPECT_DOUBLE_EQ(cfg.layout.t_low, 0.2);
  EXPECT_DOUBLE_EQ(cfg.layout.t_med, 0.6);
  EXPECT_EQ(cfg.auth.fail_x, 3u);
  EXPECT_EQ(cfg.addition_cap, 4u);
  EXPECT_THROW(cfg.merge_json({{"addition_cap", 0}}), ConfigError);
  EXPECT_THROW(cfg.merge_json({{"auth", {{"fail_y_days", 0}}}}), ConfigError);
}

TEST(Service, ServesOverHttp) {
  ServiceConfig cfg;
  cfg.port = 0;
  Service s(cfg);
  const int port = s.bind();
  ASSERT_GT(port, 0);
  std::thread server([&] { s.run(); });
  httplib::Client client("127.0.0.1", port);
  auto ingest = client.Post("/ingest", jsonl(small_corpus()), "application/x-ndjson");
  ASSERT_TRUE(ingest);
  EXPECT_EQ(ingest->status, 200);
  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(nlohmann::json::parse(health->body).at("events"), 9);
  auto missing = client.Get("/sessions/zzz");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  auto tl = client.Get("/plots/timeline?employee=u1&client=c1");
  ASSERT_TRUE(tl);
  EXPECT_EQ(nlohmann::json::parse(tl->body).at("points").size(), 6u);
  s.shutdown();
  server.join();
}
