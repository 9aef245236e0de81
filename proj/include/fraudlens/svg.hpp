#pragma once

#include <string>

#include "fraudlens/layout.hpp"

namespace fraudlens {

struct SvgOptions {
  double size = 800.0;      // side of the radial drawing in pixels
  bool heatmaps = true;     // heat-map panels under the drawing
  double cell = 14.0;       // heat-map cell side in pixels
};

// Static rendering of one frame. Every node, edge and band is a single
// element whose id attribute names the entity: node-<kind>-<id>,
// edge-<from>-<to kind>-<to>, band-<owner kind>-<owner>-<layer>. Output is a
// pure function of the scene.
std::string render_svg(const FrameScene& scene, const SvgOptions& options = {});

// XML attribute/text escaping.
std::string xml_escape(const std::string& s);

}  // namespace fraudlens
