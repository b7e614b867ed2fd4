#include "msmux/geometry.h"

#include <algorithm>
#include <array>
#include <iterator>
#include <stdexcept>

#include "msmux/errors.h"

namespace msmux {

CellSet::CellSet(std::vector<Cell> cells) : cells_(std::move(cells)) {
  std::sort(cells_.begin(), cells_.end());
  auto dup = std::adjacent_find(cells_.begin(), cells_.end());
  if (dup != cells_.end()) {
    throw std::invalid_argument("duplicate cell (" + std::to_string(dup->x) +
                                ", " + std::to_string(dup->y) + ")");
  }
}

CellSet CellSet::rectangle(int x0, int y0, int w, int h) {
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(std::max(w, 0) * std::max(h, 0)));
  for (int x = x0; x < x0 + w; ++x) {
    for (int y = y0; y < y0 + h; ++y) cells.push_back({x, y});
  }
  return CellSet(Sorted{}, std::move(cells));
}

bool CellSet::contains(Cell c) const {
  return std::binary_search(cells_.begin(), cells_.end(), c);
}

std::optional<BoundingBox> CellSet::bounding_box() const {
  if (cells_.empty()) return std::nullopt;
  BoundingBox box{cells_.front(), cells_.front()};
  for (const Cell& c : cells_) {
    box.min.x = std::min(box.min.x, c.x);
    box.min.y = std::min(box.min.y, c.y);
    box.max.x = std::max(box.max.x, c.x);
    box.max.y = std::max(box.max.y, c.y);
  }
  return box;
}

CellSet CellSet::translated(int dx, int dy) const {
  std::vector<Cell> out;
  out.reserve(cells_.size());
  for (const Cell& c : cells_) out.push_back({c.x + dx, c.y + dy});
  return CellSet(Sorted{}, std::move(out));
}

bool CellSet::is_subset_of(const CellSet& other) const {
  return std::includes(other.cells_.begin(), other.cells_.end(),
                       cells_.begin(), cells_.end());
}

CellSet CellSet::intersection(const CellSet& other) const {
  std::vector<Cell> out;
  std::set_intersection(cells_.begin(), cells_.end(), other.cells_.begin(),
                        other.cells_.end(), std::back_inserter(out));
  return CellSet(Sorted{}, std::move(out));
}

CellSet CellSet::difference(const CellSet& other) const {
  std::vector<Cell> out;
  std::set_difference(cells_.begin(), cells_.end(), other.cells_.begin(),
                      other.cells_.end(), std::back_inserter(out));
  return CellSet(Sorted{}, std::move(out));
}

CellSet CellSet::union_with(const CellSet& other) const {
  std::vector<Cell> out;
  std::set_union(cells_.begin(), cells_.end(), other.cells_.begin(),
                 other.cells_.end(), std::back_inserter(out));
  return CellSet(Sorted{}, std::move(out));
}

CellSet CellSet::without(std::initializer_list<Cell> cells) const {
  return difference(CellSet(std::vector<Cell>(cells)));
}

int quarter_turns(Rotation r) { return static_cast<int>(r); }

Rotation rotation_from_quarter_turns(int turns) {
  return static_cast<Rotation>(((turns % 4) + 4) % 4);
}

Rotation compose(Rotation first, Rotation then) {
  return rotation_from_quarter_turns(quarter_turns(first) + quarter_turns(then));
}

std::string to_string(Rotation r) {
  switch (r) {
    case Rotation::R0: return "R0";
    case Rotation::R90: return "R90";
    case Rotation::R180: return "R180";
    case Rotation::R270: return "R270";
  }
  return "R?";
}

std::optional<Rotation> parse_rotation(std::string_view text) {
  if (text == "R0" || text == "0") return Rotation::R0;
  if (text == "R90" || text == "90") return Rotation::R90;
  if (text == "R180" || text == "180") return Rotation::R180;
  if (text == "R270" || text == "270") return Rotation::R270;
  return std::nullopt;
}

namespace {

struct Point64 {
  std::int64_t x;
  std::int64_t y;
};

// Counter-clockwise rotation of (x, y) about (px, py), all values scaled by a
// common factor.
Point64 rotate_scaled(Point64 p, Point64 pivot, Rotation r) {
  const std::int64_t dx = p.x - pivot.x;
  const std::int64_t dy = p.y - pivot.y;
  switch (r) {
    case Rotation::R0: return p;
    case Rotation::R90: return {pivot.x - dy, pivot.y + dx};
    case Rotation::R180: return {pivot.x - dx, pivot.y - dy};
    case Rotation::R270: return {pivot.x + dy, pivot.y - dx};
  }
  return p;
}

CellSet normalized(const CellSet& shape) {
  auto box = shape.bounding_box();
  if (!box) return shape;
  return shape.translated(-box->min.x, -box->min.y);
}

// Rotates on the doubled grid about `pivot2` (a doubled-coordinate point),
// then maps back with `origin2` (doubled coordinates of the new (0, 0)).
CellSet rotate_doubled(const CellSet& shape, Rotation r, Point64 pivot2,
                       Point64 origin2) {
  std::vector<Cell> out;
  out.reserve(shape.size());
  for (const Cell& c : shape) {
    Point64 q = rotate_scaled({2 * std::int64_t{c.x}, 2 * std::int64_t{c.y}},
                              pivot2, r);
    out.push_back({static_cast<int>((q.x - origin2.x) / 2),
                   static_cast<int>((q.y - origin2.y) / 2)});
  }
  return CellSet(std::move(out));
}

Point64 doubled_center(const CellSet& shape) {
  auto box = shape.bounding_box();
  if (!box) return {0, 0};
  return {std::int64_t{box->min.x} + box->max.x,
          std::int64_t{box->min.y} + box->max.y};
}

Point64 rotated_min_doubled(const CellSet& shape, Rotation r, Point64 pivot2) {
  Point64 lo{INT64_MAX, INT64_MAX};
  for (const Cell& c : shape) {
    Point64 q = rotate_scaled({2 * std::int64_t{c.x}, 2 * std::int64_t{c.y}},
                              pivot2, r);
    lo.x = std::min(lo.x, q.x);
    lo.y = std::min(lo.y, q.y);
  }
  return lo;
}

}  // namespace

RationalPoint bounding_box_center(const CellSet& shape) {
  Point64 c = doubled_center(shape);
  return {c.x, c.y, 2};
}

CellSet rotate_about(const CellSet& shape, Rotation rotation,
                     const RationalPoint& pivot) {
  if (pivot.den <= 0) throw InvalidPivot("pivot denominator must be positive");
  const Point64 p{pivot.x_num, pivot.y_num};
  std::vector<Cell> out;
  out.reserve(shape.size());
  for (const Cell& c : shape) {
    Point64 q = rotate_scaled({pivot.den * c.x, pivot.den * c.y}, p, rotation);
    if (q.x % pivot.den != 0 || q.y % pivot.den != 0) {
      throw InvalidPivot("rotation about (" + std::to_string(pivot.x_num) +
                         "/" + std::to_string(pivot.den) + ", " +
                         std::to_string(pivot.y_num) + "/" +
                         std::to_string(pivot.den) +
                         ") leaves cells off the integer lattice");
    }
    out.push_back({static_cast<int>(q.x / pivot.den),
                   static_cast<int>(q.y / pivot.den)});
  }
  return CellSet(std::move(out));
}

CellSet rotate_footprint(const CellSet& shape, Rotation rotation,
                         const RationalPoint& pivot) {
  return normalized(rotate_about(shape, rotation, pivot));
}

CellSet rotate_footprint(const CellSet& shape, Rotation rotation) {
  if (shape.empty()) return shape;
  const Point64 pivot2 = doubled_center(shape);
  return rotate_doubled(shape, rotation, pivot2,
                        rotated_min_doubled(shape, rotation, pivot2));
}

std::string to_string(Stage s) {
  return s == Stage::Injection ? "injection" : "cultivation";
}

std::optional<Stage> parse_stage(std::string_view text) {
  if (text == "injection" || text == "3") return Stage::Injection;
  if (text == "cultivation" || text == "5") return Stage::Cultivation;
  return std::nullopt;
}

std::size_t default_footprint_count(Stage s) {
  return s == Stage::Injection ? 24 : 53;
}

void FootprintSpec::validate() const {
  if (shape.size() != declared_count) {
    throw std::invalid_argument(
        to_string(stage) + " footprint has " + std::to_string(shape.size()) +
        " cells but declares " + std::to_string(declared_count));
  }
}

SiteFootprint::SiteFootprint(std::vector<FootprintSpec> stages)
    : stages_(std::move(stages)) {
  if (stages_.empty()) {
    throw std::invalid_argument("site footprint needs at least one stage");
  }
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    stages_[i].validate();
    if (stages_[i].shape.empty()) {
      throw std::invalid_argument(to_string(stages_[i].stage) +
                                  " footprint is empty");
    }
    if (i == 0) continue;
    if (stages_[i - 1].stage >= stages_[i].stage) {
      throw std::invalid_argument("footprint stages must be strictly ordered");
    }
    if (!stages_[i - 1].shape.is_subset_of(stages_[i].shape)) {
      throw std::invalid_argument(to_string(stages_[i - 1].stage) +
                                  " footprint is not contained in the " +
                                  to_string(stages_[i].stage) + " footprint");
    }
  }
}

const FootprintSpec* SiteFootprint::find(Stage stage) const {
  for (const auto& s : stages_) {
    if (s.stage == stage) return &s;
  }
  return nullptr;
}

CellSet SiteFootprint::placed(Stage stage, Cell anchor,
                              Rotation rotation) const {
  const FootprintSpec* spec = find(stage);
  if (spec == nullptr) {
    throw std::invalid_argument("footprint has no " + to_string(stage) +
                                " stage");
  }
  const CellSet& ref = reference().shape;
  const Point64 pivot2 = doubled_center(ref);
  const Point64 origin2 = rotated_min_doubled(ref, rotation, pivot2);
  return rotate_doubled(spec->shape, rotation, pivot2, origin2)
      .translated(anchor.x, anchor.y);
}

CellSet PatchLayout::site_cells(std::size_t index) const {
  return site_cells(index, stage);
}

CellSet PatchLayout::site_cells(std::size_t index, Stage s) const {
  const Site& site = sites.at(index);
  return site.footprint.placed(s, site.anchor, site.rotation);
}

CellSet PatchLayout::idle_set() const {
  CellSet idle = patch;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    idle = idle.difference(site_cells(i));
  }
  return idle;
}

ValidationReport validate_layout(const PatchLayout& layout) {
  ValidationReport report;
  std::vector<CellSet> placed;
  placed.reserve(layout.sites.size());
  for (std::size_t i = 0; i < layout.sites.size(); ++i) {
    placed.push_back(layout.site_cells(i));
  }
  for (std::size_t i = 0; i < placed.size(); ++i) {
    CellSet outside = placed[i].difference(layout.patch);
    if (!outside.empty()) {
      report.containment_ok = false;
      report.violations.push_back(
          {ViolationKind::OutsidePatch, i, std::nullopt,
           {outside.begin(), outside.end()}});
    }
  }
  for (std::size_t i = 0; i < placed.size(); ++i) {
    for (std::size_t j = i + 1; j < placed.size(); ++j) {
      CellSet shared = placed[i].intersection(placed[j]);
      if (!shared.empty()) {
        report.nonoverlap_ok = false;
        report.violations.push_back(
            {ViolationKind::Overlap, i, j, {shared.begin(), shared.end()}});
      }
    }
  }
  CellSet idle = layout.patch;
  for (const CellSet& s : placed) idle = idle.difference(s);
  report.idle_count = idle.size();
  return report;
}

std::vector<std::size_t> check_stage_nesting(const PatchLayout& layout) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < layout.sites.size(); ++i) {
    const Site& site = layout.sites[i];
    const auto& stages = site.footprint.stages();
    bool ok = true;
    for (std::size_t s = 1; s < stages.size() && ok; ++s) {
      ok = site.footprint.placed(stages[s - 1].stage, site.anchor, site.rotation)
               .is_subset_of(site.footprint.placed(stages[s].stage,
                                                   site.anchor, site.rotation));
    }
    if (ok && !stages.empty()) {
      ok = site.footprint.placed(stages.back().stage, site.anchor, site.rotation)
               .is_subset_of(layout.patch);
    }
    if (!ok) bad.push_back(i);
  }
  return bad;
}

namespace {

constexpr std::array<Rotation, 4> kRotationOrder = {
    Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270};

// Occupancy grid over the patch bounding box.
class Occupancy {
 public:
  Occupancy(const CellSet& patch, BoundingBox box)
      : box_(box),
        state_(static_cast<std::size_t>(box.width()) * box.height(), kOutside) {
    for (const Cell& c : patch) state_[index(c)] = kFree;
  }

  bool fits(const CellSet& cells) const {
    for (const Cell& c : cells) {
      if (!box_.contains(c) || state_[index(c)] != kFree) return false;
    }
    return true;
  }

  void occupy(const CellSet& cells) {
    for (const Cell& c : cells) state_[index(c)] = kTaken;
  }

 private:
  static constexpr unsigned char kOutside = 0;
  static constexpr unsigned char kFree = 1;
  static constexpr unsigned char kTaken = 2;

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y - box_.min.y) * box_.width() +
           static_cast<std::size_t>(c.x - box_.min.x);
  }

  BoundingBox box_;
  std::vector<unsigned char> state_;
};

}  // namespace

PackResult pack_sites(const CellSet& patch, const SiteFootprint& footprint,
                      std::size_t k_max, Stage stage) {
  if (!footprint.has(stage)) {
    throw std::invalid_argument("footprint has no " + to_string(stage) +
                                " stage");
  }
  PackResult result;
  result.layout.patch = patch;
  result.layout.stage = stage;
  auto box = patch.bounding_box();
  if (!box || k_max == 0) return result;

  const Stage ref_stage = footprint.reference().stage;
  std::array<CellSet, 4> shapes;
  for (Rotation r : kRotationOrder) {
    shapes[quarter_turns(r)] = footprint.placed(ref_stage, {0, 0}, r);
  }

  Occupancy occupancy(patch, *box);
  auto try_place = [&](Cell anchor, Rotation r) {
    CellSet cells = shapes[quarter_turns(r)].translated(anchor.x, anchor.y);
    if (!occupancy.fits(cells)) return false;
    occupancy.occupy(cells);
    result.layout.sites.push_back({anchor, r, footprint});
    return true;
  };

  // Corners: lower-left, lower-right, upper-right, upper-left.
  for (int corner = 0; corner < 4 && result.layout.sites.size() < k_max;
       ++corner) {
    for (Rotation r : kRotationOrder) {
      auto fb = *shapes[quarter_turns(r)].bounding_box();
      const bool right = corner == 1 || corner == 2;
      const bool top = corner == 2 || corner == 3;
      Cell anchor{right ? box->max.x - fb.max.x : box->min.x,
                  top ? box->max.y - fb.max.y : box->min.y};
      if (try_place(anchor, r)) break;
    }
  }

  for (int y = box->min.y; y <= box->max.y; ++y) {
    for (int x = box->min.x; x <= box->max.x; ++x) {
      for (Rotation r : kRotationOrder) {
        if (result.layout.sites.size() >= k_max) return result;
        if (try_place({x, y}, r)) break;
      }
    }
  }
  return result;
}

PackResult pack_sites(const CellSet& patch, const FootprintSpec& footprint,
                      std::size_t k_max) {
  return pack_sites(patch, SiteFootprint({footprint}), k_max, footprint.stage);
}

CellSet canonical_patch() {
  return CellSet::rectangle(0, 0, 21, 22).difference(
      CellSet::rectangle(9, 19, 3, 3));
}

FootprintSpec canonical_footprint(Stage stage) {
  if (stage == Stage::Injection) {
    return {stage, CellSet::rectangle(0, 0, 5, 5).without({{4, 4}}), 24};
  }
  return {stage,
          CellSet::rectangle(0, 0, 8, 7).without({{7, 6}, {6, 6}, {7, 5}}),
          53};
}

SiteFootprint canonical_site_footprint() {
  return SiteFootprint({canonical_footprint(Stage::Injection),
                        canonical_footprint(Stage::Cultivation)});
}

PatchLayout canonical_layout(Stage stage) {
  const SiteFootprint fp = canonical_site_footprint();
  PatchLayout layout;
  layout.patch = canonical_patch();
  layout.stage = stage;
  layout.sites = {
      {{0, 0}, Rotation::R0, fp},
      {{14, 0}, Rotation::R90, fp},
      {{13, 15}, Rotation::R180, fp},
      {{0, 14}, Rotation::R270, fp},
  };
  return layout;
}

}  // namespace msmux
