#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fraudlens/layout.hpp"

namespace fraudlens {

enum class SessionStatus { playing, paused, stopped };
std::string to_string(SessionStatus s);
SessionStatus parse_session_status(const std::string& s);

struct SessionCommand {
  enum class Kind { start, pause, resume, stop, next, select, set_threshold, set_mode };
  Kind kind = Kind::next;
  std::string node;          // select
  double threshold = 0.0;    // set_threshold
  SceneMode mode = SceneMode::detail;  // set_mode

  static SessionCommand start() { return {Kind::start, {}, 0.0, SceneMode::detail}; }
  static SessionCommand pause() { return {Kind::pause, {}, 0.0, SceneMode::detail}; }
  static SessionCommand resume() { return {Kind::resume, {}, 0.0, SceneMode::detail}; }
  static SessionCommand stop() { return {Kind::stop, {}, 0.0, SceneMode::detail}; }
  static SessionCommand next() { return {Kind::next, {}, 0.0, SceneMode::detail}; }
  static SessionCommand select(std::string id) { return {Kind::select, std::move(id), 0.0, SceneMode::detail}; }
  static SessionCommand set_threshold(double v) { return {Kind::set_threshold, {}, v, SceneMode::detail}; }
  static SessionCommand set_mode(SceneMode m) { return {Kind::set_mode, {}, 0.0, m}; }
};
std::string to_string(SessionCommand::Kind k);

// Employees with severity >= threshold, severity desc then id asc.
std::vector<std::string> build_playlist(const SeverityTables& tables, double threshold);

// One investigation. Commands are not synchronized; the owner serializes
// them. Invalid commands throw InvalidTransition (with a machine-readable
// reason) and leave the state unchanged, except `next` at the end of the
// playlist, which stops the session before throwing "playlist_exhausted".
class Session {
 public:
  // ctx must outlive the session. addition_cap also sizes the layout's
  // reserved slots.
  Session(LayoutContext ctx, double threshold, std::size_t addition_cap = 10);

  void start();
  void pause();
  void resume();
  void stop();
  void next();
  // Unknown node -> NotFoundError. While playing, selection pauses first.
  void select(const std::string& node_id);
  // Rebuilds the playlist and rewinds to a fresh, paused session.
  void set_threshold(double threshold);
  void set_mode(SceneMode mode);
  void apply(const SessionCommand& cmd);

  double threshold() const { return threshold_; }
  const std::vector<std::string>& playlist() const { return playlist_; }
  // -1 before the first frame.
  long cursor() const { return cursor_; }
  SessionStatus status() const { return status_; }
  std::size_t additions() const { return additions_; }
  std::size_t addition_cap() const { return addition_cap_; }
  SceneMode mode() const { return mode_; }
  const std::optional<std::string>& selected() const { return selected_; }
  const std::optional<FrameScene>& scene() const { return scene_; }
  const FrameComposition& composition() const { return composition_; }
  std::optional<std::string> focus() const;

  nlohmann::json checkpoint() const;
  static Session restore(LayoutContext ctx, const nlohmann::json& checkpoint);

  // Compact state summary (no scene).
  nlohmann::json state_json() const;

 private:
  void require(bool ok, const char* reason, const std::string& message) const;
  void rebuild_scene();
  OverviewInput overview_input() const;
  void select_detail(const std::string& id);
  void add_employee(const std::string& id);
  void add_client(const std::string& id, const std::string& via);
  std::set<std::string> drawn_clients() const;
  std::set<std::string> shown_employees() const;

  LayoutContext ctx_;
  double threshold_;
  std::size_t addition_cap_;
  std::vector<std::string> playlist_;
  long cursor_ = -1;
  SessionStatus status_ = SessionStatus::paused;
  std::size_t additions_ = 0;
  SceneMode mode_ = SceneMode::detail;
  std::optional<std::string> selected_;
  std::optional<std::string> enlarged_;  // overview selection
  FrameComposition composition_;
  std::optional<FrameScene> scene_;
};

}  // namespace fraudlens
