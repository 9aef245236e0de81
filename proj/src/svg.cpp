#include "fraudlens/svg.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace fraudlens {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

class Canvas {
 public:
  explicit Canvas(double size) : half_(size / 2.0) {}

  // Unit-circle point to pixels (y axis flipped).
  std::string xy(Point p) const { return num(half_ + p.x * half_) + "," + num(half_ - p.y * half_); }

  // Closed annular sector.
  std::string sector(Span angular, Span radial) const {
    const bool large = angular.width() > std::numbers::pi;
    const std::string flag = large ? "1" : "0";
    std::ostringstream d;
    d << "M" << xy(polar(angular.start, radial.end)) << " A" << num(radial.end * half_) << ","
      << num(radial.end * half_) << " 0 " << flag << " 0 " << xy(polar(angular.end, radial.end))
      << " L" << xy(polar(angular.end, radial.start)) << " A" << num(radial.start * half_) << ","
      << num(radial.start * half_) << " 0 " << flag << " 1 " << xy(polar(angular.start, radial.start))
      << " Z";
    return d.str();
  }

  double scale() const { return half_; }

 private:
  double half_;
};

void x_mark(std::ostringstream& out, const Canvas& c, Span angular, Span radial) {
  const Point p = polar(angular.mid(), 0.5 * (radial.start + radial.end));
  const double r = 0.25 * (radial.end - radial.start);
  out << "<path class=\"x-mark\" d=\"M" << c.xy({p.x - r, p.y - r}) << " L" << c.xy({p.x + r, p.y + r})
      << " M" << c.xy({p.x - r, p.y + r}) << " L" << c.xy({p.x + r, p.y - r})
      << "\" stroke=\"#000000\"/>";
}

void heatmap(std::ostringstream& out, const HeatMapGrid& g, const std::string& name, double x0,
             double y0, double cell) {
  out << "<g class=\"heatmap\" id=\"heatmap-" << name << "\">";
  for (const auto& c : g.cells) {
    const double x = x0 + static_cast<double>(c.col) * cell;
    const double y = y0 + static_cast<double>(c.row) * cell;
    out << "<rect class=\"heat-cell\" id=\"heat-" << name << "-" << xml_escape(c.id) << "\" x=\""
        << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cell) << "\" height=\"" << num(cell)
        << "\" fill=\"" << to_hex(c.color) << "\"><title>" << xml_escape(c.id) << " "
        << num(c.severity) << "</title></rect>";
    if (c.marked_x) {
      out << "<path class=\"x-mark\" d=\"M" << num(x) << "," << num(y) << " L" << num(x + cell) << ","
          << num(y + cell) << " M" << num(x) << "," << num(y + cell) << " L" << num(x + cell) << ","
          << num(y) << "\" stroke=\"#000000\"/>";
    }
  }
  out << "</g>\n";
}

}  // namespace

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string render_svg(const FrameScene& scene, const SvgOptions& options) {
  const Canvas c(options.size);
  const double cell = options.cell;
  auto rows = [&](const HeatMapGrid& g) {
    return g.cells.empty() ? 0.0 : std::ceil(static_cast<double>(g.cells.size()) / g.columns);
  };
  const double panel_h =
      options.heatmaps ? (rows(scene.employee_heatmap) + rows(scene.client_heatmap)) * cell + 3 * cell : 0.0;
  const double width = options.size;
  const double height = options.size + panel_h;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\" data-mode=\""
      << to_string(scene.mode) << "\" data-focus=\"" << xml_escape(scene.focus) << "\">\n";
  out << "<g id=\"frame\"><rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"#FFFFFF\"/><circle cx=\"" << num(c.scale()) << "\" cy=\"" << num(c.scale())
      << "\" r=\"" << num(c.scale()) << "\" fill=\"none\" stroke=\"#DDDDDD\"/></g>\n";

  out << "<g id=\"edges\">";
  for (const auto& e : scene.edges) {
    out << "<path class=\"edge" << (e.gray ? " gray" : "") << "\" id=\"edge-" << xml_escape(e.from) << "-"
        << to_string(e.to_kind) << "-" << xml_escape(e.to) << "\" d=\"M" << c.xy(e.p0);
    if (e.style == EdgeStyle::arc) out << " Q" << c.xy(e.control) << " " << c.xy(e.p1);
    else out << " L" << c.xy(e.p1);
    out << "\" fill=\"none\" stroke=\"" << to_hex(e.color) << "\" stroke-width=\""
        << num(std::max(0.5, e.thickness * c.scale())) << "\"/>";
  }
  out << "</g>\n<g id=\"nodes\">";
  for (const auto& n : scene.nodes) {
    out << "<path class=\"node " << to_string(n.kind) << (n.gray ? " gray" : "")
        << (n.enlarged ? " enlarged" : "") << "\" id=\"node-" << to_string(n.kind) << "-"
        << xml_escape(n.id) << "\" d=\"" << c.sector(n.angular, n.radial) << "\" fill=\""
        << to_hex(n.gray ? kGray : n.color) << "\" stroke=\"#FFFFFF\"><title>" << xml_escape(n.id)
        << "</title></path>";
  }
  out << "</g>\n<g id=\"bands\">";
  for (const auto& b : scene.bands) {
    out << "<g class=\"band " << to_string(b.layer) << "\" id=\"band-" << to_string(b.owner_kind) << "-"
        << xml_escape(b.owner) << "-" << to_string(b.layer) << "\">";
    const double split = b.radial.start + kRegionAShare * (b.radial.end - b.radial.start);
    const Span ra{b.radial.start, split};
    const Span rb{split, b.radial.end};
    for (const auto& cell_a : b.region_a) {
      out << "<path class=\"region-a\" d=\"" << c.sector(cell_a.angular, ra) << "\" fill=\""
          << to_hex(cell_a.color) << "\"><title>" << xml_escape(cell_a.label) << "</title></path>";
      if (cell_a.marked_x) x_mark(out, c, cell_a.angular, ra);
    }
    for (const auto& seg : b.region_b) {
      if (seg.angular.width() <= 0.0) continue;
      out << "<path class=\"region-b\" d=\"" << c.sector(seg.angular, rb) << "\" fill=\""
          << to_hex(seg.color) << "\"><title>" << xml_escape(seg.label) << " " << num(seg.fraction)
          << "</title></path>";
      if (seg.marked_x) x_mark(out, c, seg.angular, rb);
    }
    out << "</g>";
  }
  out << "</g>\n";
  if (options.heatmaps) {
    heatmap(out, scene.employee_heatmap, "employees", cell, options.size + cell, cell);
    heatmap(out, scene.client_heatmap, "clients", cell,
            options.size + 2 * cell + rows(scene.employee_heatmap) * cell, cell);
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace fraudlens
