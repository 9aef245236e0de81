#include "fraudlens/session.hpp"

#include <algorithm>
#include <cmath>

#include "fraudlens/errors.hpp"
#include "fraudlens/event_store.hpp"

namespace fraudlens {

std::string to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::playing: return "playing";
    case SessionStatus::paused: return "paused";
    case SessionStatus::stopped: return "stopped";
  }
  return "unknown";
}

SessionStatus parse_session_status(const std::string& s) {
  if (s == "playing") return SessionStatus::playing;
  if (s == "paused") return SessionStatus::paused;
  if (s == "stopped") return SessionStatus::stopped;
  throw ConfigError("unknown session status '" + s + "'");
}

std::string to_string(SessionCommand::Kind k) {
  switch (k) {
    case SessionCommand::Kind::start: return "start";
    case SessionCommand::Kind::pause: return "pause";
    case SessionCommand::Kind::resume: return "resume";
    case SessionCommand::Kind::stop: return "stop";
    case SessionCommand::Kind::next: return "next";
    case SessionCommand::Kind::select: return "select";
    case SessionCommand::Kind::set_threshold: return "set_threshold";
    case SessionCommand::Kind::set_mode: return "set_mode";
  }
  return "unknown";
}

std::vector<std::string> build_playlist(const SeverityTables& tables, double threshold) {
  if (std::isnan(threshold)) throw ConfigError("threshold must be a number");
  std::vector<std::pair<std::string, double>> v;
  for (const auto& [id, s] : tables.employees) {
    if (s.value >= threshold) v.emplace_back(id, s.value);
  }
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> out;
  for (auto& [id, s] : v) out.push_back(id);
  return out;
}

Session::Session(LayoutContext ctx, double threshold, std::size_t addition_cap)
    : ctx_(std::move(ctx)), threshold_(threshold), addition_cap_(addition_cap) {
  if (!ctx_.store || !ctx_.tables || !ctx_.scorer) {
    throw ContractViolation("session needs a store, severity tables and a scorer");
  }
  if (addition_cap_ == 0) throw ConfigError("addition_cap must be >= 1");
  ctx_.options.addition_slots = addition_cap_;
  ctx_.options.validate();
  playlist_ = build_playlist(*ctx_.tables, threshold_);
}

std::optional<std::string> Session::focus() const {
  if (cursor_ < 0 || static_cast<std::size_t>(cursor_) >= playlist_.size()) return std::nullopt;
  return playlist_[static_cast<std::size_t>(cursor_)];
}

void Session::require(bool ok, const char* reason, const std::string& message) const {
  if (!ok) throw InvalidTransition(reason, message + " (status " + to_string(status_) + ")");
}

void Session::start() {
  require(status_ != SessionStatus::stopped, "stopped", "session is stopped");
  require(status_ == SessionStatus::paused && cursor_ == -1, "already_started", "session already started");
  status_ = SessionStatus::playing;
}

void Session::pause() {
  require(status_ == SessionStatus::playing, "not_playing", "pause needs a playing session");
  status_ = SessionStatus::paused;
}

void Session::resume() {
  require(status_ != SessionStatus::stopped, "stopped", "cannot resume a stopped session");
  require(status_ == SessionStatus::paused, "not_paused", "resume needs a paused session");
  composition_ = FrameComposition{};
  if (auto f = focus()) composition_.focus = *f;
  additions_ = 0;
  mode_ = SceneMode::detail;
  selected_.reset();
  enlarged_.reset();
  status_ = SessionStatus::playing;
  rebuild_scene();
}

void Session::stop() {
  require(status_ != SessionStatus::stopped, "stopped", "session already stopped");
  status_ = SessionStatus::stopped;
}

void Session::next() {
  require(status_ == SessionStatus::playing, status_ == SessionStatus::stopped ? "stopped" : "not_playing",
          "next needs a playing session");
  if (static_cast<std::size_t>(cursor_ + 1) >= playlist_.size()) {
    status_ = SessionStatus::stopped;
    throw InvalidTransition("playlist_exhausted", "no employees left in the playlist");
  }
  ++cursor_;
  composition_ = FrameComposition{};
  composition_.focus = playlist_[static_cast<std::size_t>(cursor_)];
  additions_ = 0;
  mode_ = SceneMode::detail;
  selected_.reset();
  enlarged_.reset();
  rebuild_scene();
}

std::set<std::string> Session::shown_employees() const {
  std::set<std::string> out(composition_.added_employees.begin(), composition_.added_employees.end());
  out.insert(composition_.focus);
  return out;
}

std::set<std::string> Session::drawn_clients() const {
  std::set<std::string> out;
  for (const auto& c : ctx_.store->clients_of(composition_.focus)) out.insert(c);
  for (const auto& [c, via] : composition_.added_clients) out.insert(c);
  return out;
}

void Session::add_employee(const std::string& id) {
  composition_.added_employees.push_back(id);
  ++additions_;
}

void Session::add_client(const std::string& id, const std::string& via) {
  composition_.added_clients.emplace_back(id, via);
  ++additions_;
}

void Session::select_detail(const std::string& id) {
  const auto& store = *ctx_.store;
  const auto& scene = *scene_;

  for (auto kind : {NodeKind::cluster_low, NodeKind::cluster_medium}) {
    if (const auto* n = scene.node(kind, id)) {
      composition_.marked_clients.insert(n->members.begin(), n->members.end());
      return;
    }
  }
  if (scene.node(NodeKind::employee, id)) {
    const auto drawn = drawn_clients();
    for (const auto& c : store.clients_of(id)) {
      if (drawn.count(c) || ctx_.tables->client_value(c) < ctx_.options.t_low) continue;
      add_client(c, id);
    }
    for (const auto& e : shown_employees()) {
      if (e == id) composition_.gray_employees.erase(e);
      else composition_.gray_employees.insert(e);
    }
    for (const auto& c : drawn_clients()) {
      if (store.pair_event_count(id, c) == 0) composition_.gray_clients.insert(c);
      else composition_.gray_clients.erase(c);
    }
    return;
  }
  if (scene.node(NodeKind::client, id)) {
    const auto shown = shown_employees();
    for (const auto& e : store.employees_of(id)) {
      if (shown.count(e)) continue;
      add_employee(e);
      composition_.gray_employees.insert(e);
    }
    return;
  }
  if (composition_.marked_clients.count(id)) {
    add_client(id, composition_.focus);
    return;
  }
  throw NotFoundError("node '" + id + "' is not in the current frame");
}

void Session::select(const std::string& id) {
  require(status_ != SessionStatus::stopped, "stopped", "session is stopped");
  if (!scene_ || !focus()) throw NotFoundError("no frame is shown yet");

  // Validate before pausing so a rejected selection leaves the state alone.
  if (mode_ == SceneMode::overview) {
    const auto in = overview_input();
    const bool known = std::count(in.employees.begin(), in.employees.end(), id) ||
                       std::count(in.clients.begin(), in.clients.end(), id);
    if (!known) throw NotFoundError("node '" + id + "' is not in the overview");
  } else {
    bool known = composition_.marked_clients.count(id) > 0;
    for (const auto& n : scene_->nodes) known = known || n.id == id;
    if (!known) throw NotFoundError("node '" + id + "' is not in the current frame");
  }
  if (status_ == SessionStatus::playing) status_ = SessionStatus::paused;

  if (mode_ == SceneMode::overview) {
    enlarged_ = id;
    selected_ = id;
    rebuild_scene();
    return;
  }
  select_detail(id);
  selected_ = id;
  if (additions_ > addition_cap_) {
    mode_ = SceneMode::overview;
    enlarged_.reset();
  }
  rebuild_scene();
}

void Session::set_threshold(double threshold) {
  playlist_ = build_playlist(*ctx_.tables, threshold);
  threshold_ = threshold;
  cursor_ = -1;
  status_ = SessionStatus::paused;
  composition_ = FrameComposition{};
  additions_ = 0;
  mode_ = SceneMode::detail;
  selected_.reset();
  enlarged_.reset();
  scene_.reset();
}

void Session::set_mode(SceneMode mode) {
  if (!focus()) throw InvalidTransition("no_frame", "no frame is shown yet");
  if (mode == SceneMode::detail) {
    composition_ = FrameComposition{};
    composition_.focus = *focus();
    additions_ = 0;
    selected_.reset();
  }
  enlarged_.reset();
  mode_ = mode;
  rebuild_scene();
}

void Session::apply(const SessionCommand& cmd) {
  switch (cmd.kind) {
    case SessionCommand::Kind::start: start(); break;
    case SessionCommand::Kind::pause: pause(); break;
    case SessionCommand::Kind::resume: resume(); break;
    case SessionCommand::Kind::stop: stop(); break;
    case SessionCommand::Kind::next: next(); break;
    case SessionCommand::Kind::select: select(cmd.node); break;
    case SessionCommand::Kind::set_threshold: set_threshold(cmd.threshold); break;
    case SessionCommand::Kind::set_mode: set_mode(cmd.mode); break;
  }
}

OverviewInput Session::overview_input() const {
  OverviewInput in;
  in.focus = composition_.focus;
  for (const auto& e : shown_employees()) in.employees.push_back(e);
  for (const auto& c : drawn_clients()) in.clients.push_back(c);
  in.enlarged = enlarged_;
  in.gray_employees = composition_.gray_employees;
  in.gray_clients = composition_.gray_clients;
  in.marked_clients = composition_.marked_clients;
  return in;
}

void Session::rebuild_scene() {
  if (!focus()) {
    scene_.reset();
    return;
  }
  if (mode_ == SceneMode::detail) {
    composition_.selected = selected_;
    scene_ = build_frame_scene(ctx_, composition_);
  } else {
    scene_ = build_overview_scene(ctx_, overview_input());
  }
}

nlohmann::json Session::state_json() const {
  const auto f = focus();
  return {{"threshold", threshold_},
          {"playlist", playlist_},
          {"playlist_length", playlist_.size()},
          {"cursor", cursor_},
          {"status", to_string(status_)},
          {"additions", additions_},
          {"addition_cap", addition_cap_},
          {"mode", to_string(mode_)},
          {"selected", selected_ ? nlohmann::json(*selected_) : nlohmann::json(nullptr)},
          {"focus", f ? nlohmann::json(*f) : nlohmann::json(nullptr)}};
}

nlohmann::json Session::checkpoint() const {
  nlohmann::json added_clients = nlohmann::json::array();
  for (const auto& [c, via] : composition_.added_clients) added_clients.push_back({c, via});
  return {{"threshold", threshold_},
          {"playlist", playlist_},
          {"cursor", cursor_},
          {"status", to_string(status_)},
          {"additions", additions_},
          {"mode", to_string(mode_)},
          {"selected", selected_ ? nlohmann::json(*selected_) : nlohmann::json(nullptr)},
          {"addition_cap", addition_cap_},
          {"enlarged", enlarged_ ? nlohmann::json(*enlarged_) : nlohmann::json(nullptr)},
          {"layout", ctx_.options.to_json()},
          {"composition",
           {{"focus", composition_.focus},
            {"added_employees", composition_.added_employees},
            {"added_clients", added_clients},
            {"gray_employees", composition_.gray_employees},
            {"gray_clients", composition_.gray_clients},
            {"marked_clients", composition_.marked_clients}}}};
}

Session Session::restore(LayoutContext ctx, const nlohmann::json& j) {
  try {
    if (j.contains("layout")) ctx.options = LayoutOptions::from_json(j.at("layout"), ctx.options);
    Session s(std::move(ctx), j.at("threshold").get<double>(), j.value("addition_cap", std::size_t{10}));
    s.playlist_ = j.at("playlist").get<std::vector<std::string>>();
    s.cursor_ = j.at("cursor").get<long>();
    if (s.cursor_ < -1 || s.cursor_ >= static_cast<long>(s.playlist_.size())) {
      throw ConfigError("checkpoint cursor out of range");
    }
    s.status_ = parse_session_status(j.at("status").get<std::string>());
    s.additions_ = j.at("additions").get<std::size_t>();
    s.mode_ = parse_scene_mode(j.at("mode").get<std::string>());
    if (j.contains("selected") && !j.at("selected").is_null()) s.selected_ = j.at("selected").get<std::string>();
    if (j.contains("enlarged") && !j.at("enlarged").is_null()) s.enlarged_ = j.at("enlarged").get<std::string>();
    if (j.contains("composition")) {
      const auto& c = j.at("composition");
      s.composition_.focus = c.value("focus", std::string{});
      s.composition_.added_employees = c.value("added_employees", std::vector<std::string>{});
      for (const auto& pair : c.value("added_clients", nlohmann::json::array())) {
        s.composition_.added_clients.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
      }
      s.composition_.gray_employees = c.value("gray_employees", std::set<std::string>{});
      s.composition_.gray_clients = c.value("gray_clients", std::set<std::string>{});
      s.composition_.marked_clients = c.value("marked_clients", std::set<std::string>{});
    } else if (auto f = s.focus()) {
      s.composition_.focus = *f;
    }
    s.rebuild_scene();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("session checkpoint: ") + e.what());
  }
}

}  // namespace fraudlens
