#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msmux/geometry.h"

namespace msmux {

// Contents of a footprint/layout definition file. The format is
// line-oriented:
//
//   # comment
//   patch                         stanza header, followed by "x y" cells
//   footprint <stage> [count]     stage is injection|cultivation
//   site <x> <y> <R0|R90|R180|R270>
//   stage <injection|cultivation> growth stage in effect
//
// A footprint's declared count defaults to 24 (injection) or 53
// (cultivation).
struct LayoutDefinition {
  std::optional<CellSet> patch;
  std::vector<FootprintSpec> footprints;
  struct Placement {
    Cell anchor;
    Rotation rotation = Rotation::R0;
  };
  std::vector<Placement> sites;
  std::optional<Stage> stage;

  // Throws std::invalid_argument when the patch or footprints are missing or
  // inconsistent.
  SiteFootprint site_footprint() const;
  PatchLayout to_layout() const;
};

// Throws ParseError with the 1-based line number.
LayoutDefinition parse_layout_definition(std::istream& in,
                                         const std::string& source = {});
LayoutDefinition read_layout_definition(const std::string& path);

std::string format_layout_definition(const PatchLayout& layout);

// One character per cell of the combined bounding box, top row first: site
// cells as the 1-based site number (mod 10), '#' where sites overlap, '.' for
// idle patch cells and ' ' outside the patch.
std::string ascii_map(const PatchLayout& layout);

nlohmann::json layout_report_json(const PatchLayout& layout,
                                  const ValidationReport& report);

}  // namespace msmux
