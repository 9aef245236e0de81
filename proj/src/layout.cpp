#include "fraudlens/layout.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fraudlens/errors.hpp"
#include "fraudlens/event_store.hpp"

namespace fraudlens {

namespace {

constexpr double kPi = std::numbers::pi;

// Categorical colors for system/action segments.
constexpr std::array<Rgb, 8> kPalette{{
    {31, 119, 180},
    {255, 127, 14},
    {44, 160, 44},
    {148, 103, 189},
    {140, 86, 75},
    {227, 119, 194},
    {188, 189, 34},
    {23, 190, 207},
}};

bool by_severity(const std::pair<std::string, double>& a, const std::pair<std::string, double>& b) {
  if (a.second != b.second) return a.second > b.second;
  return a.first < b.first;
}

std::vector<std::string> order_by_severity(const std::map<std::string, double>& sev) {
  std::vector<std::pair<std::string, double>> v(sev.begin(), sev.end());
  std::sort(v.begin(), v.end(), by_severity);
  std::vector<std::string> out;
  out.reserve(v.size());
  for (auto& [id, s] : v) out.push_back(id);
  return out;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

struct Flags {
  std::set<std::string> systems;
  std::set<std::string> actions;

  void absorb(const Evidence& ev) {
    systems.insert(ev.unauthorized_systems.begin(), ev.unauthorized_systems.end());
    systems.insert(ev.infrequent_systems.begin(), ev.infrequent_systems.end());
    actions.insert(ev.unauthorized_actions.begin(), ev.unauthorized_actions.end());
    actions.insert(ev.uncommon_actions.begin(), ev.uncommon_actions.end());
  }
};

// Splits `angular` into consecutive pieces proportional to `weights`.
std::vector<Span> tile(Span angular, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<Span> out;
  double at = angular.start;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double next = i + 1 == weights.size() ? angular.end
                                                 : at + angular.width() * weights[i] / total;
    out.push_back({at, next});
    at = next;
  }
  return out;
}

LayerBand share_band(const std::string& owner, NodeKind kind, BandLayer layer, Span angular,
                     const std::map<std::string, std::size_t>& counts,
                     const std::set<std::string>& marked, double other_share) {
  LayerBand band{owner, kind, layer, band_radial(layer), {}, {}};
  std::size_t total = 0;
  for (auto& [k, n] : counts) total += n;
  if (total == 0) {
    band.region_b.push_back({"none", kGray, 1.0, false, angular});
    band.region_a.push_back({"none", 0.0, severity_color(0.0), false, angular});
    return band;
  }
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::size_t other = 0;
  bool other_marked = false;
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& it : items) {
    const double share = static_cast<double>(it.second) / static_cast<double>(total);
    if (other_share > 0.0 && share < other_share) {
      other += it.second;
      other_marked = other_marked || marked.count(it.first);
    } else {
      kept.push_back(it);
    }
  }
  std::vector<double> weights;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const bool x = marked.count(kept[i].first) != 0;
    band.region_b.push_back({kept[i].first, kPalette[i % kPalette.size()],
                             static_cast<double>(kept[i].second) / static_cast<double>(total), x, {}});
    weights.push_back(static_cast<double>(kept[i].second));
  }
  if (other > 0) {
    band.region_b.push_back({"Other", kGray, static_cast<double>(other) / static_cast<double>(total),
                             other_marked, {}});
    weights.push_back(static_cast<double>(other));
  }
  const auto spans = tile(angular, weights);
  const auto cells = tile(angular, std::vector<double>(band.region_b.size(), 1.0));
  for (std::size_t i = 0; i < band.region_b.size(); ++i) {
    auto& seg = band.region_b[i];
    seg.angular = spans[i];
    const double s = seg.marked_x ? 1.0 : 0.0;
    band.region_a.push_back({seg.label, s, severity_color(s), seg.marked_x, cells[i]});
  }
  return band;
}

LayerBand hours_band(const std::string& owner, NodeKind kind, Span angular,
                     const std::vector<Event>& events, const WorkingCalendar& calendar) {
  LayerBand band{owner, kind, BandLayer::L4_hours, band_radial(BandLayer::L4_hours), {}, {}};
  std::size_t outside = 0;
  for (const auto& e : events) {
    if (!calendar.is_working_time(e.ts)) ++outside;
  }
  if (events.empty()) {
    band.region_b.push_back({"none", kGray, 1.0, false, angular});
    band.region_a.push_back({"off_hours", 0.0, severity_color(0.0), false, angular});
    return band;
  }
  const double out_share = static_cast<double>(outside) / static_cast<double>(events.size());
  const auto spans = tile(angular, {1.0 - out_share, out_share});
  band.region_b.push_back({"within", severity_color(0.0), 1.0 - out_share, false, spans[0]});
  band.region_b.push_back({"outside", severity_color(1.0), out_share, false, spans[1]});
  band.region_a.push_back({"off_hours", out_share, severity_color(out_share), false, angular});
  return band;
}

LayerBand periodicity_band(const std::string& owner, Span angular, const SimilarityReport& sim,
                           const PatternLibrary& library) {
  LayerBand band{owner, NodeKind::client, BandLayer::L5_periodicity,
                 band_radial(BandLayer::L5_periodicity), {}, {}};
  const auto& patterns = library.patterns();
  const auto cells = tile(angular, std::vector<double>(patterns.size(), 1.0));
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const double s = i < sim.per_pattern.size() ? clamp01(sim.per_pattern[i].second) : 0.0;
    band.region_a.push_back({patterns[i].name, s, severity_color(s), false, cells[i]});
  }
  band.region_b.push_back({sim.periodic ? "periodic" : "aperiodic",
                           severity_color(sim.periodic ? 1.0 : 0.0), 1.0, false, angular});
  return band;
}

void add_bands(FrameScene& scene, const SceneNode& node, const std::vector<Event>& events,
               const Flags& flags, const SimilarityReport* similarity, const LayoutContext& ctx) {
  std::map<std::string, std::size_t> systems, actions;
  for (const auto& e : events) {
    ++systems[e.system];
    ++actions[e.action];
  }
  scene.bands.push_back(share_band(node.id, node.kind, BandLayer::L2_systems, node.angular, systems,
                                   flags.systems, 0.0));
  scene.bands.push_back(share_band(node.id, node.kind, BandLayer::L3_actions, node.angular, actions,
                                   flags.actions, ctx.options.other_share));
  scene.bands.push_back(hours_band(node.id, node.kind, node.angular, events,
                                   ctx.scorer->profiles().working_calendar));
  if (node.kind == NodeKind::client && similarity) {
    scene.bands.push_back(periodicity_band(node.id, node.angular, *similarity, ctx.scorer->library()));
  }
}

class PairScores {
 public:
  explicit PairScores(const LayoutContext& ctx) : ctx_(ctx) {}

  const SeverityScore& get(const std::string& employee, const std::string& client) {
    if (const auto* s = ctx_.tables->pair(employee, client)) return *s;
    auto key = std::make_pair(employee, client);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(key, ctx_.scorer->pair_severity(ctx_.store->series_for_pair(employee, client)))
               .first;
    }
    return it->second;
  }

 private:
  const LayoutContext& ctx_;
  std::map<std::pair<std::string, std::string>, SeverityScore> cache_;
};

void check_context(const LayoutContext& ctx) {
  if (!ctx.store || !ctx.tables || !ctx.scorer) {
    throw ContractViolation("layout context needs a store, severity tables and a scorer");
  }
  ctx.options.validate();
}

std::vector<Event> events_between(const EventStore& store, const std::set<std::string>& employees,
                                  const std::set<std::string>& clients) {
  if (employees.empty() || clients.empty()) return {};
  QueryFilter f;
  f.employees = employees;
  f.clients = clients;
  return store.query_events(f);
}

void finish_edges(FrameScene& scene, const LayoutOptions& o) {
  std::size_t max_count = 0;
  for (const auto& e : scene.edges) max_count = std::max(max_count, e.count);
  for (auto& e : scene.edges) {
    e.thickness = edge_thickness(e.count, max_count, o.edge_base);
    e.style = o.edge_style;
    const Point mid{0.5 * (e.p0.x + e.p1.x), 0.5 * (e.p0.y + e.p1.y)};
    // Arcs bend toward the centre of the ring.
    const double pull = o.edge_style == EdgeStyle::arc ? 0.4 : 1.0;
    e.control = {mid.x * pull, mid.y * pull};
  }
}

SceneEdge make_edge(const SceneNode& from, double from_angle, const SceneNode& to, std::size_t count,
                    bool gray) {
  SceneEdge e;
  e.from = from.id;
  e.to = to.id;
  e.to_kind = to.kind;
  e.count = count;
  e.gray = gray;
  e.color = gray ? kGray : to.color;
  e.p0 = polar(from_angle, from.radial.start);
  e.p1 = polar(to.angular.mid(), to.radial.start);
  return e;
}

// Angle used to order edge targets from the top of the right side downwards.
double target_angle(const SceneNode& n) {
  double a = n.angular.mid();
  if (a > kPi) a -= 2 * kPi;  // bottom cap
  return a;
}

}  // namespace

// ---------------------------------------------------------------- enums

std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::employee: return "employee";
    case NodeKind::client: return "client";
    case NodeKind::cluster_low: return "cluster_low";
    case NodeKind::cluster_medium: return "cluster_medium";
  }
  return "unknown";
}

std::string to_string(BandLayer l) {
  switch (l) {
    case BandLayer::L2_systems: return "L2_systems";
    case BandLayer::L3_actions: return "L3_actions";
    case BandLayer::L4_hours: return "L4_hours";
    case BandLayer::L5_periodicity: return "L5_periodicity";
  }
  return "unknown";
}

std::string to_string(EdgeStyle s) { return s == EdgeStyle::arc ? "arc" : "straight"; }

EdgeStyle parse_edge_style(const std::string& s) {
  if (s == "arc") return EdgeStyle::arc;
  if (s == "straight") return EdgeStyle::straight;
  throw ConfigError("unknown edge style '" + s + "'");
}

std::string to_string(SceneMode m) { return m == SceneMode::detail ? "detail" : "overview"; }

SceneMode parse_scene_mode(const std::string& s) {
  if (s == "detail") return SceneMode::detail;
  if (s == "overview") return SceneMode::overview;
  throw ConfigError("unknown mode '" + s + "'");
}

Span band_radial(BandLayer l) {
  switch (l) {
    case BandLayer::L2_systems: return {0.62, 0.70};
    case BandLayer::L3_actions: return {0.72, 0.80};
    case BandLayer::L4_hours: return {0.82, 0.90};
    case BandLayer::L5_periodicity: return {0.92, 1.00};
  }
  return {};
}

// ---------------------------------------------------------------- heat maps

const HeatCell* HeatMapGrid::find(const std::string& id) const {
  for (const auto& c : cells) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

HeatCell* HeatMapGrid::find(const std::string& id) {
  return const_cast<HeatCell*>(std::as_const(*this).find(id));
}

HeatMapGrid build_heatmap(const std::map<std::string, double>& scores, std::size_t columns) {
  if (columns == 0) throw ContractViolation("heat map needs at least one column");
  HeatMapGrid g;
  g.columns = columns;
  const auto order = order_by_severity(scores);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double s = scores.at(order[i]);
    g.cells.push_back({order[i], s, severity_color(s), false, i / columns, i % columns});
  }
  return g;
}

std::map<std::string, double> severity_values(const std::map<std::string, SeverityScore>& scores) {
  std::map<std::string, double> out;
  for (const auto& [id, s] : scores) out[id] = s.value;
  return out;
}

// ---------------------------------------------------------------- options

void LayoutOptions::validate() const {
  if (!(t_low >= 0.0 && t_low <= t_med && t_med <= 1.0)) {
    throw ConfigError("cluster thresholds must satisfy 0 <= t_low <= t_med <= 1");
  }
  if (!(other_share >= 0.0 && other_share < 1.0)) throw ConfigError("other_share must be in [0, 1)");
  if (!(edge_base > 0.0)) throw ConfigError("edge_base must be positive");
  if (heatmap_columns == 0) throw ConfigError("heatmap_columns must be >= 1");
  if (!(cap_half_angle > 0.0 && cap_half_angle < kPi / 4)) {
    throw ConfigError("cap_half_angle must be in (0, pi/4)");
  }
  if (!(reserve_share >= 0.0 && reserve_share < 0.5)) throw ConfigError("reserve_share must be in [0, 0.5)");
  if (addition_slots == 0) throw ConfigError("addition_slots must be >= 1");
}

LayoutOptions LayoutOptions::from_json(const nlohmann::json& j, LayoutOptions o) {
  try {
    o.t_low = j.value("t_low", o.t_low);
    o.t_med = j.value("t_med", o.t_med);
    if (j.contains("edge_style")) o.edge_style = parse_edge_style(j.at("edge_style").get<std::string>());
    o.other_share = j.value("other_share", o.other_share);
    o.edge_base = j.value("edge_base", o.edge_base);
    o.heatmap_columns = j.value("heatmap_columns", o.heatmap_columns);
    o.cap_half_angle = j.value("cap_half_angle", o.cap_half_angle);
    o.reserve_share = j.value("reserve_share", o.reserve_share);
    o.addition_slots = j.value("addition_slots", o.addition_slots);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("layout options: ") + e.what());
  }
  o.validate();
  return o;
}

nlohmann::json LayoutOptions::to_json() const {
  return {{"t_low", t_low},
          {"t_med", t_med},
          {"edge_style", to_string(edge_style)},
          {"other_share", other_share},
          {"edge_base", edge_base},
          {"heatmap_columns", heatmap_columns},
          {"cap_half_angle", cap_half_angle},
          {"reserve_share", reserve_share},
          {"addition_slots", addition_slots}};
}

// ---------------------------------------------------------------- geometry

Point polar(double angle, double radius) { return {radius * std::cos(angle), radius * std::sin(angle)}; }

Point curve_point(const SceneEdge& e, double t) {
  const double a = (1 - t) * (1 - t), b = 2 * t * (1 - t), c = t * t;
  return {a * e.p0.x + b * e.control.x + c * e.p1.x, a * e.p0.y + b * e.control.y + c * e.p1.y};
}

double edge_thickness(std::size_t count, std::size_t max_count, double base) {
  if (max_count == 0) return 0.0;
  return base * static_cast<double>(count) / static_cast<double>(max_count);
}

HalfPlaneLayout half_plane_layout(const LayoutOptions& o) {
  const double c = o.cap_half_angle;
  const double half = kPi - 2 * c;
  const double reserve = o.reserve_share * half;
  const auto per_end = static_cast<double>((o.addition_slots + 1) / 2);
  HalfPlaneLayout h;
  h.left_base = {kPi / 2 + c + reserve, 3 * kPi / 2 - c - reserve};
  h.right_base = {-kPi / 2 + c + reserve, kPi / 2 - c - reserve};
  h.low_cap = {kPi / 2 - c, kPi / 2 + c};
  h.medium_cap = {3 * kPi / 2 - c, 3 * kPi / 2 + c};
  h.slot_width_left = reserve / per_end;
  h.slot_width_right = reserve / per_end;
  return h;
}

ClientPartition partition_clients(const std::map<std::string, double>& severities, double t_low,
                                  double t_med) {
  ClientPartition p;
  for (const auto& id : order_by_severity(severities)) {
    const double s = severities.at(id);
    if (s < t_low) p.low.push_back(id);
    else if (s < t_med) p.medium.push_back(id);
    else p.individual.push_back(id);
  }
  return p;
}

// ---------------------------------------------------------------- scene lookup

const SceneNode* FrameScene::node(NodeKind kind, const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.kind == kind && n.id == id) return &n;
  }
  return nullptr;
}

const SceneNode* FrameScene::entity(const std::string& id) const {
  if (const auto* n = node(NodeKind::employee, id)) return n;
  return node(NodeKind::client, id);
}

std::vector<const LayerBand*> FrameScene::bands_of(NodeKind kind, const std::string& id) const {
  std::vector<const LayerBand*> out;
  for (const auto& b : bands) {
    if (b.owner_kind == kind && b.owner == id) out.push_back(&b);
  }
  return out;
}

// ---------------------------------------------------------------- detail frame

FrameScene build_frame_scene(const LayoutContext& ctx, const std::string& focus) {
  FrameComposition c;
  c.focus = focus;
  return build_frame_scene(ctx, c);
}

FrameScene build_frame_scene(const LayoutContext& ctx, const FrameComposition& comp) {
  check_context(ctx);
  const auto& store = *ctx.store;
  const auto& tables = *ctx.tables;
  const auto& o = ctx.options;
  if (!tables.employees.count(comp.focus)) throw NotFoundError("unknown employee '" + comp.focus + "'");

  const HalfPlaneLayout hp = half_plane_layout(o);
  const std::size_t per_end = (o.addition_slots + 1) / 2;
  PairScores pair_scores(ctx);

  FrameScene scene;
  scene.mode = SceneMode::detail;
  scene.focus = comp.focus;
  scene.selected = comp.selected;

  // Focus employee and its clients.
  std::map<std::string, double> client_sev;
  std::map<std::string, std::size_t> focus_counts;
  for (const auto& c : store.clients_of(comp.focus)) {
    client_sev[c] = tables.client_value(c);
    focus_counts[c] = store.pair_event_count(comp.focus, c);
  }
  const auto part = partition_clients(client_sev, o.t_low, o.t_med);

  const double focus_sev = tables.employee_value(comp.focus);
  SceneNode focus_node;
  focus_node.id = comp.focus;
  focus_node.kind = NodeKind::employee;
  focus_node.angular = hp.left_base;
  focus_node.color = severity_color(focus_sev);
  focus_node.severity = focus_sev;
  focus_node.gray = comp.gray_employees.count(comp.focus) != 0;
  for (auto& [c, n] : focus_counts) focus_node.event_count += n;

  std::vector<SceneNode> employees{focus_node};
  std::vector<SceneNode> clients;  // individually drawn
  std::vector<SceneNode> clusters;
  std::map<std::string, std::string> reference;  // client -> employee for its bands

  {
    std::vector<double> weights;
    for (const auto& c : part.individual) weights.push_back(static_cast<double>(focus_counts[c]));
    // Tiled from the top downwards.
    auto spans = tile(hp.right_base, weights);
    for (std::size_t i = 0; i < part.individual.size(); ++i) {
      const auto& id = part.individual[i];
      const Span s = spans[i];
      SceneNode n;
      n.id = id;
      n.kind = NodeKind::client;
      n.angular = {hp.right_base.start + hp.right_base.end - s.end,
                   hp.right_base.start + hp.right_base.end - s.start};
      n.severity = client_sev[id];
      n.color = severity_color(n.severity);
      n.event_count = focus_counts[id];
      n.gray = comp.gray_clients.count(id) != 0;
      clients.push_back(n);
      reference[id] = comp.focus;
    }
  }
  auto make_cluster = [&](const std::vector<std::string>& members, NodeKind kind, Span cap,
                          const char* id) {
    if (members.empty()) return;
    SceneNode n;
    n.id = id;
    n.kind = kind;
    n.angular = cap;
    n.members = members;
    for (const auto& m : members) {
      n.severity = std::max(n.severity, client_sev[m]);
      n.event_count += focus_counts[m];
    }
    n.color = severity_color(n.severity);
    clusters.push_back(n);
  };
  // Cluster members added on their own leave the cluster.
  std::set<std::string> added_ids;
  for (const auto& [id, via] : comp.added_clients) added_ids.insert(id);
  auto without_added = [&](const std::vector<std::string>& members) {
    std::vector<std::string> out;
    for (const auto& m : members) {
      if (!added_ids.count(m)) out.push_back(m);
    }
    return out;
  };
  make_cluster(without_added(part.low), NodeKind::cluster_low, hp.low_cap, "cluster-low");
  make_cluster(without_added(part.medium), NodeKind::cluster_medium, hp.medium_cap, "cluster-medium");

  std::set<std::string> shown_employees{comp.focus};
  std::set<std::string> shown_clients(part.individual.begin(), part.individual.end());
  std::set<std::string> drawn_clients;  // including cluster members
  for (auto& [c, n] : focus_counts) drawn_clients.insert(c);

  // Additions go to reserved slots, alternating top and bottom.
  std::size_t k = 0;
  for (const auto& id : comp.added_employees) {
    if (!shown_employees.insert(id).second) continue;
    if (!tables.employees.count(id)) throw NotFoundError("unknown employee '" + id + "'");
    const std::size_t slot = k / 2;
    if (slot >= per_end) throw ContractViolation("more employee additions than reserved slots");
    const double w = hp.slot_width_left;
    SceneNode n;
    n.id = id;
    n.kind = NodeKind::employee;
    n.angular = k % 2 == 0 ? Span{hp.left_base.start - (slot + 1) * w, hp.left_base.start - slot * w}
                           : Span{hp.left_base.end + slot * w, hp.left_base.end + (slot + 1) * w};
    n.severity = tables.employee_value(id);
    n.color = severity_color(n.severity);
    n.gray = comp.gray_employees.count(id) != 0;
    n.added = true;
    employees.push_back(n);
    ++k;
  }
  k = 0;
  for (const auto& [id, via] : comp.added_clients) {
    if (!shown_clients.insert(id).second) continue;
    if (!tables.clients.count(id)) throw NotFoundError("unknown client '" + id + "'");
    const std::size_t slot = k / 2;
    if (slot >= per_end) throw ContractViolation("more client additions than reserved slots");
    const double w = hp.slot_width_right;
    SceneNode n;
    n.id = id;
    n.kind = NodeKind::client;
    n.angular = k % 2 == 0 ? Span{hp.right_base.end + slot * w, hp.right_base.end + (slot + 1) * w}
                           : Span{hp.right_base.start - (slot + 1) * w, hp.right_base.start - slot * w};
    n.severity = tables.client_value(id);
    n.color = severity_color(n.severity);
    n.event_count = store.pair_event_count(via, id);
    n.gray = comp.gray_clients.count(id) != 0;
    n.added = true;
    clients.push_back(n);
    drawn_clients.insert(id);
    reference[id] = via;
    ++k;
  }

  // Edges. The focus fans out along its inner arc in the same top-to-bottom
  // order as its targets, which keeps its edges from crossing.
  {
    std::vector<const SceneNode*> targets;
    for (const auto& c : clients) {
      if (focus_counts.count(c.id)) targets.push_back(&c);
    }
    for (const auto& c : clusters) targets.push_back(&c);
    std::stable_sort(targets.begin(), targets.end(), [](const SceneNode* a, const SceneNode* b) {
      return target_angle(*a) > target_angle(*b);
    });
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const double a = focus_node.angular.start +
                       focus_node.angular.width() * (static_cast<double>(i) + 0.5) /
                           static_cast<double>(targets.size());
      const std::size_t n = targets[i]->kind == NodeKind::client ? focus_counts[targets[i]->id]
                                                                 : targets[i]->event_count;
      scene.edges.push_back(make_edge(focus_node, a, *targets[i], n, focus_node.gray || targets[i]->gray));
    }
  }
  for (std::size_t i = 1; i < employees.size(); ++i) {
    auto& emp = employees[i];
    for (const auto& c : clients) {
      const std::size_t n = store.pair_event_count(emp.id, c.id);
      if (n == 0) continue;
      emp.event_count += n;
      scene.edges.push_back(make_edge(emp, emp.angular.mid(), c, n, emp.gray || c.gray));
    }
    for (const auto& cl : clusters) {
      std::size_t n = 0;
      for (const auto& m : cl.members) n += store.pair_event_count(emp.id, m);
      if (n == 0) continue;
      emp.event_count += n;
      scene.edges.push_back(make_edge(emp, emp.angular.mid(), cl, n, emp.gray));
    }
  }
  finish_edges(scene, o);

  // Bands for every non-cluster node.
  for (const auto& emp : employees) {
    std::set<std::string> related;
    Flags flags;
    for (const auto& c : drawn_clients) {
      if (store.pair_event_count(emp.id, c) == 0) continue;
      related.insert(c);
      flags.absorb(pair_scores.get(emp.id, c).evidence);
    }
    add_bands(scene, emp, events_between(store, {emp.id}, related), flags, nullptr, ctx);
  }
  for (const auto& c : clients) {
    const auto& ref = reference[c.id];
    const auto& score = pair_scores.get(ref, c.id);
    Flags flags;
    flags.absorb(score.evidence);
    add_bands(scene, c, events_between(store, {ref}, {c.id}), flags, &score.evidence.similarity, ctx);
  }

  scene.nodes = std::move(employees);
  scene.nodes.insert(scene.nodes.end(), clients.begin(), clients.end());
  scene.nodes.insert(scene.nodes.end(), clusters.begin(), clusters.end());

  scene.employee_heatmap = build_heatmap(severity_values(tables.employees), o.heatmap_columns);
  std::map<std::string, double> heat_clients;
  for (const auto& c : drawn_clients) heat_clients[c] = tables.client_value(c);
  scene.client_heatmap = build_heatmap(heat_clients, o.heatmap_columns);
  for (const auto& id : comp.marked_clients) {
    if (auto* cell = scene.client_heatmap.find(id)) cell->marked_x = true;
  }
  return scene;
}

// ---------------------------------------------------------------- overview

namespace {

FrameScene overview_geometry(const std::map<std::string, double>& employees,
                             const std::map<std::string, double>& clients,
                             const std::map<std::pair<std::string, std::string>, std::size_t>& counts,
                             const LayoutOptions& o) {
  FrameScene scene;
  scene.mode = SceneMode::overview;
  const auto emp_order = order_by_severity(employees);
  const auto cli_order = order_by_severity(clients);
  const auto left = tile({kPi / 2, 3 * kPi / 2}, std::vector<double>(emp_order.size(), 1.0));
  const auto right = tile({-kPi / 2, kPi / 2}, std::vector<double>(cli_order.size(), 1.0));
  for (std::size_t i = 0; i < emp_order.size(); ++i) {
    SceneNode n;
    n.id = emp_order[i];
    n.kind = NodeKind::employee;
    n.angular = left[i];
    n.severity = employees.at(n.id);
    n.color = severity_color(n.severity);
    scene.nodes.push_back(n);
  }
  for (std::size_t i = 0; i < cli_order.size(); ++i) {
    SceneNode n;
    n.id = cli_order[i];
    n.kind = NodeKind::client;
    // Top of the right side first.
    n.angular = right[cli_order.size() - 1 - i];
    n.severity = clients.at(n.id);
    n.color = severity_color(n.severity);
    scene.nodes.push_back(n);
  }
  std::map<std::string, std::size_t> emp_index, cli_index;
  for (std::size_t i = 0; i < scene.nodes.size(); ++i) {
    (scene.nodes[i].kind == NodeKind::employee ? emp_index : cli_index)[scene.nodes[i].id] = i;
  }
  for (const auto& [pair, n] : counts) {
    if (n == 0) continue;
    auto ei = emp_index.find(pair.first);
    auto ci = cli_index.find(pair.second);
    if (ei == emp_index.end() || ci == cli_index.end()) continue;
    auto& emp = scene.nodes[ei->second];
    auto& cli = scene.nodes[ci->second];
    emp.event_count += n;
    cli.event_count += n;
    scene.edges.push_back(make_edge(emp, emp.angular.mid(), cli, n, false));
  }
  finish_edges(scene, o);
  scene.employee_heatmap = build_heatmap(employees, o.heatmap_columns);
  scene.client_heatmap = build_heatmap(clients, o.heatmap_columns);
  return scene;
}

}  // namespace

FrameScene build_overview_scene(
    const std::map<std::string, double>& employees, const std::map<std::string, double>& clients,
    const std::map<std::pair<std::string, std::string>, std::size_t>& pair_counts,
    const LayoutOptions& options) {
  options.validate();
  return overview_geometry(employees, clients, pair_counts, options);
}

FrameScene build_overview_scene(const LayoutContext& ctx, const OverviewInput& in) {
  check_context(ctx);
  const auto& store = *ctx.store;
  const auto& tables = *ctx.tables;
  std::map<std::string, double> emp, cli;
  for (const auto& e : in.employees) emp[e] = tables.employee_value(e);
  for (const auto& c : in.clients) cli[c] = tables.client_value(c);
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  for (const auto& e : in.employees) {
    for (const auto& c : store.clients_of(e)) {
      if (cli.count(c)) counts[{e, c}] = store.pair_event_count(e, c);
    }
  }
  FrameScene scene = overview_geometry(emp, cli, counts, ctx.options);
  scene.focus = in.focus;
  scene.selected = in.enlarged;
  for (auto& n : scene.nodes) {
    n.gray = (n.kind == NodeKind::employee ? in.gray_employees : in.gray_clients).count(n.id) != 0;
  }
  for (auto& e : scene.edges) {
    const bool gray = in.gray_employees.count(e.from) || in.gray_clients.count(e.to);
    if (gray) {
      e.gray = true;
      e.color = kGray;
    }
  }
  for (const auto& id : in.marked_clients) {
    if (auto* cell = scene.client_heatmap.find(id)) cell->marked_x = true;
  }
  if (!in.enlarged) return scene;

  SceneNode* target = nullptr;
  for (auto& n : scene.nodes) {
    if (n.id == *in.enlarged && (!target || n.kind == NodeKind::employee)) target = &n;
  }
  if (!target) throw NotFoundError("node '" + *in.enlarged + "' is not in the overview");
  target->enlarged = true;
  target->radial = kEnlargedRadial;
  Flags flags;
  PairScores pair_scores(ctx);
  if (target->kind == NodeKind::employee) {
    std::set<std::string> related;
    for (const auto& c : in.clients) {
      if (store.pair_event_count(target->id, c) == 0) continue;
      related.insert(c);
      flags.absorb(pair_scores.get(target->id, c).evidence);
    }
    add_bands(scene, *target, events_between(store, {target->id}, related), flags, nullptr, ctx);
  } else {
    std::set<std::string> related;
    for (const auto& e : in.employees) {
      if (store.pair_event_count(e, target->id) > 0) related.insert(e);
    }
    auto it = tables.clients.find(target->id);
    SeverityScore fallback;
    const SeverityScore& score = it != tables.clients.end() ? it->second : fallback;
    flags.absorb(score.evidence);
    add_bands(scene, *target, events_between(store, related, {target->id}), flags,
              &score.evidence.similarity, ctx);
  }
  return scene;
}

// ---------------------------------------------------------------- json

namespace {

nlohmann::json span_json(Span s) { return nlohmann::json::array({s.start, s.end}); }

}  // namespace

nlohmann::json to_json(const HeatMapGrid& g) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : g.cells) {
    cells.push_back({{"id", c.id},
                     {"severity", c.severity},
                     {"color", to_hex(c.color)},
                     {"marked_x", c.marked_x},
                     {"row", c.row},
                     {"col", c.col}});
  }
  const std::size_t rows = g.cells.empty() ? 0 : (g.cells.size() + g.columns - 1) / g.columns;
  return {{"columns", g.columns}, {"rows", rows}, {"cells", cells}};
}

nlohmann::json to_json(const FrameScene& s) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : s.nodes) {
    nlohmann::json j = {{"id", n.id},
                        {"kind", to_string(n.kind)},
                        {"angular_span", span_json(n.angular)},
                        {"radial_span", span_json(n.radial)},
                        {"color", to_hex(n.color)},
                        {"severity", n.severity},
                        {"event_count", n.event_count},
                        {"gray", n.gray},
                        {"enlarged", n.enlarged},
                        {"added", n.added}};
    if (!n.members.empty()) j["members"] = n.members;
    nodes.push_back(std::move(j));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : s.edges) {
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"to_kind", to_string(e.to_kind)},
                     {"count", e.count},
                     {"thickness", e.thickness},
                     {"color", to_hex(e.color)},
                     {"gray", e.gray},
                     {"style", to_string(e.style)},
                     {"x1", e.p0.x},
                     {"y1", e.p0.y},
                     {"cx", e.control.x},
                     {"cy", e.control.y},
                     {"x2", e.p1.x},
                     {"y2", e.p1.y}});
  }
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& b : s.bands) {
    nlohmann::json a = nlohmann::json::array(), r = nlohmann::json::array();
    for (const auto& c : b.region_a) {
      a.push_back({{"label", c.label},
                   {"severity", c.severity},
                   {"color", to_hex(c.color)},
                   {"marked_x", c.marked_x},
                   {"angular_span", span_json(c.angular)}});
    }
    for (const auto& g : b.region_b) {
      r.push_back({{"label", g.label},
                   {"color", to_hex(g.color)},
                   {"fraction", g.fraction},
                   {"marked_x", g.marked_x},
                   {"angular_span", span_json(g.angular)}});
    }
    bands.push_back({{"owner", b.owner},
                     {"owner_kind", to_string(b.owner_kind)},
                     {"layer", to_string(b.layer)},
                     {"radial_span", span_json(b.radial)},
                     {"region_a", a},
                     {"region_b", r}});
  }
  return {{"mode", to_string(s.mode)},
          {"focus", s.focus},
          {"selected", s.selected ? nlohmann::json(*s.selected) : nlohmann::json(nullptr)},
          {"nodes", nodes},
          {"edges", edges},
          {"bands", bands},
          {"heatmaps", {{"employees", to_json(s.employee_heatmap)}, {"clients", to_json(s.client_heatmap)}}}};
}

}  // namespace fraudlens
