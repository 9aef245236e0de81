#pragma once

#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fraudlens/color.hpp"
#include "fraudlens/scoring.hpp"

namespace fraudlens {

class EventStore;

// ---------------------------------------------------------------- heat maps

struct HeatCell {
  std::string id;
  double severity = 0.0;
  Rgb color;
  bool marked_x = false;
  std::size_t row = 0;
  std::size_t col = 0;
};

struct HeatMapGrid {
  std::vector<HeatCell> cells;  // severity desc, id asc
  std::size_t columns = 1;

  const HeatCell* find(const std::string& id) const;
  HeatCell* find(const std::string& id);
};

// Throws ContractViolation for columns == 0 or a severity outside [0, 1].
HeatMapGrid build_heatmap(const std::map<std::string, double>& scores, std::size_t columns);

std::map<std::string, double> severity_values(const std::map<std::string, SeverityScore>& scores);

// ---------------------------------------------------------------- geometry

// Angles in radians, counter-clockwise from the positive x axis; radii on the
// unit circle. Employees sit left (pi/2, 3pi/2), clients right (-pi/2, pi/2),
// cluster nodes in caps around the top (low) and bottom (medium).
struct Span {
  double start = 0.0;
  double end = 0.0;
  double width() const { return end - start; }
  double mid() const { return 0.5 * (start + end); }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class NodeKind { employee, client, cluster_low, cluster_medium };
std::string to_string(NodeKind k);

enum class BandLayer { L2_systems, L3_actions, L4_hours, L5_periodicity };
std::string to_string(BandLayer l);

enum class EdgeStyle { arc, straight };
std::string to_string(EdgeStyle s);
EdgeStyle parse_edge_style(const std::string& s);

enum class SceneMode { detail, overview };
std::string to_string(SceneMode m);
SceneMode parse_scene_mode(const std::string& s);

inline constexpr Span kNodeRadial{0.50, 0.60};
inline constexpr Span kEnlargedRadial{0.44, 0.60};
Span band_radial(BandLayer l);
// Inner part of a band holds the heat cells (region A), the rest the
// proportional segments (region B).
inline constexpr double kRegionAShare = 0.4;

struct SceneNode {
  std::string id;
  NodeKind kind = NodeKind::employee;
  Span angular;
  Span radial = kNodeRadial;
  Rgb color;
  double severity = 0.0;
  std::size_t event_count = 0;
  bool gray = false;
  bool enlarged = false;
  bool added = false;                // placed after the base frame was built
  std::vector<std::string> members;  // cluster nodes only
};

struct SceneEdge {
  std::string from;  // employee id
  std::string to;    // client id or cluster id
  NodeKind to_kind = NodeKind::client;
  std::size_t count = 0;
  double thickness = 0.0;
  Rgb color;
  bool gray = false;
  EdgeStyle style = EdgeStyle::arc;
  Point p0, control, p1;  // quadratic curve; control is the chord midpoint for straight edges
};

struct BandCell {
  std::string label;
  double severity = 0.0;
  Rgb color;
  bool marked_x = false;
  Span angular;
};

struct BandSegment {
  std::string label;
  Rgb color;
  double fraction = 0.0;
  bool marked_x = false;
  Span angular;
};

struct LayerBand {
  std::string owner;
  NodeKind owner_kind = NodeKind::employee;
  BandLayer layer = BandLayer::L2_systems;
  Span radial;
  std::vector<BandCell> region_a;
  std::vector<BandSegment> region_b;
};

struct FrameScene {
  SceneMode mode = SceneMode::detail;
  std::string focus;
  std::optional<std::string> selected;
  std::vector<SceneNode> nodes;
  std::vector<SceneEdge> edges;
  std::vector<LayerBand> bands;
  HeatMapGrid employee_heatmap;
  HeatMapGrid client_heatmap;

  const SceneNode* node(NodeKind kind, const std::string& id) const;
  // Employee or client node with this id (employees first).
  const SceneNode* entity(const std::string& id) const;
  std::vector<const LayerBand*> bands_of(NodeKind kind, const std::string& id) const;
};

// ---------------------------------------------------------------- inputs

struct LayoutOptions {
  double t_low = 0.3;
  double t_med = 0.6;
  EdgeStyle edge_style = EdgeStyle::arc;
  double other_share = 0.001;  // actions below this share fold into "Other"
  double edge_base = 0.02;     // thickness of the busiest edge
  std::size_t heatmap_columns = 20;
  double cap_half_angle = std::numbers::pi / 12;
  double reserve_share = 0.15;  // of each half-plane, per end, for additions
  std::size_t addition_slots = 10;

  void validate() const;
  // Keys absent from j keep the values of base.
  static LayoutOptions from_json(const nlohmann::json& j, LayoutOptions base);
  static LayoutOptions from_json(const nlohmann::json& j) { return from_json(j, LayoutOptions{}); }
  nlohmann::json to_json() const;
};

// Read-only inputs shared by every frame.
struct LayoutContext {
  const EventStore* store = nullptr;
  const SeverityTables* tables = nullptr;
  const Scorer* scorer = nullptr;
  LayoutOptions options;
};

// What a detail frame shows on top of the focus employee and its clients.
struct FrameComposition {
  std::string focus;
  std::vector<std::string> added_employees;  // in addition order
  // (client, employee it was reached through), in addition order
  std::vector<std::pair<std::string, std::string>> added_clients;
  std::set<std::string> gray_employees;
  std::set<std::string> gray_clients;
  std::set<std::string> marked_clients;  // X on client heat-map cells
  std::optional<std::string> selected;
};

// Angular allocations used by detail frames.
struct HalfPlaneLayout {
  Span left_base;   // focus employee
  Span right_base;  // individually drawn base clients
  Span low_cap;
  Span medium_cap;
  double slot_width_left = 0.0;
  double slot_width_right = 0.0;
};
HalfPlaneLayout half_plane_layout(const LayoutOptions& o);

// Throws NotFoundError for an unknown focus, ContractViolation when the
// additions exceed the reserved slots.
FrameScene build_frame_scene(const LayoutContext& ctx, const FrameComposition& composition);
FrameScene build_frame_scene(const LayoutContext& ctx, const std::string& focus);

// Clients of the focus split by the cluster thresholds.
struct ClientPartition {
  std::vector<std::string> individual;  // severity desc, id asc
  std::vector<std::string> low;
  std::vector<std::string> medium;
};
ClientPartition partition_clients(const std::map<std::string, double>& severities,
                                  double t_low, double t_med);

struct OverviewInput {
  std::string focus;
  std::vector<std::string> employees;
  std::vector<std::string> clients;
  std::optional<std::string> enlarged;  // entity id
  std::set<std::string> gray_employees;
  std::set<std::string> gray_clients;
  std::set<std::string> marked_clients;
};

// L1 sectors and edges only; an enlarged node gets its bands. Edge counts
// come from the store.
FrameScene build_overview_scene(const LayoutContext& ctx, const OverviewInput& input);

// Pure variant with explicit pair counts and severities, no bands.
FrameScene build_overview_scene(
    const std::map<std::string, double>& employees, const std::map<std::string, double>& clients,
    const std::map<std::pair<std::string, std::string>, std::size_t>& pair_counts,
    const LayoutOptions& options = {});

// Thickness for an edge given the frame's largest count.
double edge_thickness(std::size_t count, std::size_t max_count, double base);
// Point at angle/radius on the unit circle.
Point polar(double angle, double radius);
// Sample of a quadratic curve at t in [0, 1].
Point curve_point(const SceneEdge& e, double t);

nlohmann::json to_json(const HeatMapGrid& g);
nlohmann::json to_json(const FrameScene& s);

}  // namespace fraudlens
