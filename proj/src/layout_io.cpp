#include "msmux/layout_io.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "msmux/errors.h"

namespace msmux {

namespace {

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> words;
  for (std::string w; is >> w;) words.push_back(w);
  return words;
}

std::optional<int> parse_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size() || v < INT32_MIN || v > INT32_MAX) return std::nullopt;
    return static_cast<int>(v);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

SiteFootprint LayoutDefinition::site_footprint() const {
  std::vector<FootprintSpec> stages = footprints;
  std::sort(stages.begin(), stages.end(),
            [](const FootprintSpec& a, const FootprintSpec& b) {
              return a.stage < b.stage;
            });
  return SiteFootprint(std::move(stages));
}

PatchLayout LayoutDefinition::to_layout() const {
  if (!patch) throw std::invalid_argument("layout definition has no patch");
  const SiteFootprint fp = site_footprint();
  PatchLayout layout;
  layout.patch = *patch;
  layout.stage = stage.value_or(fp.reference().stage);
  if (!fp.has(layout.stage)) {
    throw std::invalid_argument("layout stage " + to_string(layout.stage) +
                                " has no footprint");
  }
  for (const Placement& p : sites) {
    layout.sites.push_back({p.anchor, p.rotation, fp});
  }
  return layout;
}

LayoutDefinition parse_layout_definition(std::istream& in,
                                         const std::string& source) {
  LayoutDefinition def;
  enum class Target { None, Patch, Footprint };
  Target target = Target::None;
  std::vector<Cell> cells;
  std::size_t stanza_line = 0;
  std::optional<Stage> fp_stage;
  std::size_t fp_count = 0;

  auto flush = [&]() {
    if (target == Target::None) return;
    CellSet set;
    try {
      set = CellSet(std::move(cells));
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, stanza_line, e.what());
    }
    cells.clear();
    if (target == Target::Patch) {
      if (def.patch) throw ParseError(source, stanza_line, "second patch stanza");
      def.patch = std::move(set);
    } else {
      FootprintSpec spec{*fp_stage, std::move(set), fp_count};
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw ParseError(source, stanza_line, e.what());
      }
      def.footprints.push_back(std::move(spec));
    }
    target = Target::None;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto words = split_words(line);
    if (words.empty()) continue;
    const std::string& head = words[0];

    if (head == "patch") {
      if (words.size() != 1) throw ParseError(source, line_no, "patch takes no arguments");
      flush();
      target = Target::Patch;
      stanza_line = line_no;
    } else if (head == "footprint") {
      if (words.size() < 2 || words.size() > 3) {
        throw ParseError(source, line_no, "expected: footprint <stage> [count]");
      }
      flush();
      fp_stage = parse_stage(words[1]);
      if (!fp_stage) throw ParseError(source, line_no, "unknown stage '" + words[1] + "'");
      for (const FootprintSpec& f : def.footprints) {
        if (f.stage == *fp_stage) {
          throw ParseError(source, line_no, "duplicate " + words[1] + " footprint");
        }
      }
      fp_count = default_footprint_count(*fp_stage);
      if (words.size() == 3) {
        auto n = parse_int(words[2]);
        if (!n || *n <= 0) throw ParseError(source, line_no, "bad cell count '" + words[2] + "'");
        fp_count = static_cast<std::size_t>(*n);
      }
      target = Target::Footprint;
      stanza_line = line_no;
    } else if (head == "site") {
      flush();
      if (words.size() != 4) {
        throw ParseError(source, line_no, "expected: site <x> <y> <rotation>");
      }
      auto x = parse_int(words[1]);
      auto y = parse_int(words[2]);
      auto r = parse_rotation(words[3]);
      if (!x || !y) throw ParseError(source, line_no, "bad site anchor");
      if (!r) throw ParseError(source, line_no, "unknown rotation '" + words[3] + "'");
      def.sites.push_back({{*x, *y}, *r});
    } else if (head == "stage") {
      flush();
      if (words.size() != 2) throw ParseError(source, line_no, "expected: stage <name>");
      def.stage = parse_stage(words[1]);
      if (!def.stage) throw ParseError(source, line_no, "unknown stage '" + words[1] + "'");
    } else {
      if (target == Target::None) {
        throw ParseError(source, line_no, "cell outside a patch or footprint stanza");
      }
      if (words.size() != 2) throw ParseError(source, line_no, "expected a cell \"x y\"");
      auto x = parse_int(words[0]);
      auto y = parse_int(words[1]);
      if (!x || !y) throw ParseError(source, line_no, "bad cell \"" + line + "\"");
      cells.push_back({*x, *y});
    }
  }
  flush();
  return def;
}

LayoutDefinition read_layout_definition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_layout_definition(in, path);
}

std::string format_layout_definition(const PatchLayout& layout) {
  std::ostringstream os;
  os << "patch\n";
  for (const Cell& c : layout.patch) os << c.x << ' ' << c.y << '\n';
  if (!layout.sites.empty()) {
    for (const FootprintSpec& f : layout.sites.front().footprint.stages()) {
      os << "footprint " << to_string(f.stage) << ' ' << f.declared_count << '\n';
      for (const Cell& c : f.shape) os << c.x << ' ' << c.y << '\n';
    }
  }
  for (const Site& s : layout.sites) {
    os << "site " << s.anchor.x << ' ' << s.anchor.y << ' '
       << to_string(s.rotation) << '\n';
  }
  os << "stage " << to_string(layout.stage) << '\n';
  return os.str();
}

std::string ascii_map(const PatchLayout& layout) {
  std::map<Cell, char> marks;
  for (const Cell& c : layout.patch) marks[c] = '.';
  for (std::size_t i = 0; i < layout.sites.size(); ++i) {
    const char digit = static_cast<char>('0' + (i + 1) % 10);
    for (const Cell& c : layout.site_cells(i)) {
      auto [it, inserted] = marks.try_emplace(c, digit);
      if (!inserted) it->second = it->second == '.' ? digit : '#';
    }
  }
  if (marks.empty()) return {};
  int min_x = marks.begin()->first.x, max_x = min_x;
  int min_y = marks.begin()->first.y, max_y = min_y;
  for (const auto& [c, _] : marks) {
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  std::string out;
  for (int y = max_y; y >= min_y; --y) {
    std::string row;
    for (int x = min_x; x <= max_x; ++x) {
      auto it = marks.find({x, y});
      row += it == marks.end() ? ' ' : it->second;
    }
    while (!row.empty() && row.back() == ' ') row.pop_back();
    out += row;
    out += '\n';
  }
  return out;
}

nlohmann::json layout_report_json(const PatchLayout& layout,
                                  const ValidationReport& report) {
  using nlohmann::json;
  auto cells_json = [](auto begin, auto end) {
    json arr = json::array();
    for (auto it = begin; it != end; ++it) arr.push_back({it->x, it->y});
    return arr;
  };
  json sites = json::array();
  for (std::size_t i = 0; i < layout.sites.size(); ++i) {
    const Site& s = layout.sites[i];
    sites.push_back({{"site", i + 1},
                     {"anchor", {s.anchor.x, s.anchor.y}},
                     {"rotation", to_string(s.rotation)},
                     {"cell_count", layout.site_cells(i).size()}});
  }
  json violations = json::array();
  for (const Violation& v : report.violations) {
    json entry;
    entry["kind"] = v.kind == ViolationKind::Overlap ? "overlap" : "outside_patch";
    json ids = json::array({v.site_a + 1});
    if (v.site_b) ids.push_back(*v.site_b + 1);
    entry["sites"] = ids;
    entry["cells"] = cells_json(v.cells.begin(), v.cells.end());
    violations.push_back(entry);
  }
  const auto nesting = check_stage_nesting(layout);
  return {
      {"stage", to_string(layout.stage)},
      {"patch_cells", layout.patch.size()},
      {"sites", sites},
      {"containment_ok", report.containment_ok},
      {"nonoverlap_ok", report.nonoverlap_ok},
      {"stage_nesting_ok", nesting.empty()},
      {"idle_count", report.idle_count},
      {"violations", violations},
  };
}

}  // namespace msmux
