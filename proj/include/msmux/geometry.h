#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string_view>
#include <string>
#include <vector>

namespace msmux {

struct Cell {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct BoundingBox {
  Cell min;
  Cell max;

  int width() const { return max.x - min.x + 1; }
  int height() const { return max.y - min.y + 1; }
  bool contains(Cell c) const {
    return c.x >= min.x && c.x <= max.x && c.y >= min.y && c.y <= max.y;
  }
};

// Finite set of lattice cells. Stored sorted (by x, then y) and duplicate
// free, so equality is set equality.
class CellSet {
 public:
  CellSet() = default;
  // Throws std::invalid_argument on duplicate coordinates.
  explicit CellSet(std::vector<Cell> cells);
  CellSet(std::initializer_list<Cell> cells)
      : CellSet(std::vector<Cell>(cells)) {}

  // All cells of the axis-aligned rectangle [x0, x0+w) x [y0, y0+h).
  static CellSet rectangle(int x0, int y0, int w, int h);

  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  bool contains(Cell c) const;
  std::optional<BoundingBox> bounding_box() const;

  auto begin() const { return cells_.begin(); }
  auto end() const { return cells_.end(); }
  std::span<const Cell> cells() const { return cells_; }

  CellSet translated(int dx, int dy) const;
  bool is_subset_of(const CellSet& other) const;
  CellSet intersection(const CellSet& other) const;
  CellSet difference(const CellSet& other) const;
  CellSet union_with(const CellSet& other) const;
  // Drops the given cells; cells not present are ignored.
  CellSet without(std::initializer_list<Cell> cells) const;

  friend bool operator==(const CellSet&, const CellSet&) = default;

 private:
  struct Sorted {};
  CellSet(Sorted, std::vector<Cell> cells) : cells_(std::move(cells)) {}

  std::vector<Cell> cells_;
};

enum class Rotation { R0, R90, R180, R270 };

// Counter-clockwise quarter turns.
int quarter_turns(Rotation r);
Rotation rotation_from_quarter_turns(int turns);
Rotation compose(Rotation first, Rotation then);
std::string to_string(Rotation r);
std::optional<Rotation> parse_rotation(std::string_view text);

// Exact rational point (x_num/den, y_num/den), den > 0.
struct RationalPoint {
  std::int64_t x_num = 0;
  std::int64_t y_num = 0;
  std::int64_t den = 1;
};

// Center of the shape's bounding box, a half-integer point in general.
RationalPoint bounding_box_center(const CellSet& shape);

// Rotates `shape` about `pivot` without renormalizing. Throws InvalidPivot when
// a rotated cell does not land on integer coordinates.
CellSet rotate_about(const CellSet& shape, Rotation rotation,
                     const RationalPoint& pivot);

// Rotates about `pivot` and translates the result so its bounding box starts
// at (0, 0). Throws InvalidPivot as rotate_about does.
CellSet rotate_footprint(const CellSet& shape, Rotation rotation,
                         const RationalPoint& pivot);

// Rotation about the bounding-box center, evaluated on the doubled grid so
// every quarter turn lands on integer cells after renormalization. Never
// throws.
CellSet rotate_footprint(const CellSet& shape, Rotation rotation);

enum class Stage { Injection, Cultivation };

std::string to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view text);
// Cell count a footprint has unless a shape file says otherwise.
std::size_t default_footprint_count(Stage s);

inline constexpr std::size_t kDefaultPatchCellCount = 453;

struct FootprintSpec {
  Stage stage = Stage::Cultivation;
  CellSet shape;
  std::size_t declared_count = 0;

  // Throws std::invalid_argument when |shape| != declared_count.
  void validate() const;
};

// Growth stages of one local site, ordered from smallest to largest. Every
// stage shape must be a subset of the next one in the canonical frame; the
// last stage defines the frame used for rotation and placement.
class SiteFootprint {
 public:
  SiteFootprint() = default;
  explicit SiteFootprint(std::vector<FootprintSpec> stages);

  const std::vector<FootprintSpec>& stages() const { return stages_; }
  const FootprintSpec& reference() const { return stages_.back(); }
  const FootprintSpec* find(Stage stage) const;
  bool has(Stage stage) const { return find(stage) != nullptr; }

  // Cells of `stage` after rotating in the reference frame and placing the
  // reference bounding box's lower-left corner at `anchor`.
  CellSet placed(Stage stage, Cell anchor, Rotation rotation) const;

 private:
  std::vector<FootprintSpec> stages_;
};

struct Site {
  Cell anchor;
  Rotation rotation = Rotation::R0;
  SiteFootprint footprint;
};

struct PatchLayout {
  CellSet patch;
  std::vector<Site> sites;
  Stage stage = Stage::Cultivation;

  // Cells of site `index` (0-based) at the layout's stage.
  CellSet site_cells(std::size_t index) const;
  CellSet site_cells(std::size_t index, Stage stage) const;
  // Patch cells not covered by any site at the layout's stage.
  CellSet idle_set() const;
};

enum class ViolationKind { OutsidePatch, Overlap };

struct Violation {
  ViolationKind kind;
  std::size_t site_a = 0;                // 0-based
  std::optional<std::size_t> site_b;     // set for overlaps
  std::vector<Cell> cells;
};

struct ValidationReport {
  bool containment_ok = true;
  bool nonoverlap_ok = true;
  std::size_t idle_count = 0;
  std::vector<Violation> violations;

  bool valid() const { return containment_ok && nonoverlap_ok; }
};

// Reports every site cell outside the patch and every overlapping site pair.
// Never throws on a bad layout.
ValidationReport validate_layout(const PatchLayout& layout);

// Checks that each site's earlier-stage cells are contained in its later-stage
// cells after placement. Returns the 0-based indices of offending sites.
std::vector<std::size_t> check_stage_nesting(const PatchLayout& layout);

struct PackResult {
  PatchLayout layout;
  bool empty() const { return layout.sites.empty(); }
};

// Greedy placement of up to `k_max` copies of `footprint`. Corners of the
// patch bounding box are tried first (lower-left, lower-right, upper-right,
// upper-left), then anchors in row-major order; at each anchor rotations are
// tried R0, R90, R180, R270. Collisions are tested with the reference
// (largest) stage so later growth always fits.
PackResult pack_sites(const CellSet& patch, const SiteFootprint& footprint,
                      std::size_t k_max, Stage stage);
PackResult pack_sites(const CellSet& patch, const FootprintSpec& footprint,
                      std::size_t k_max);

// Built-in shapes: 21x22-cell patch with a 3x3 notch in the top edge
// (453 cells), an 8x7
// cultivation footprint with one clipped corner (53 cells) and a 5x5
// injection footprint missing one corner (24 cells).
CellSet canonical_patch();
FootprintSpec canonical_footprint(Stage stage);
SiteFootprint canonical_site_footprint();
// Four sites, one per patch corner, rotated so the clipped corner of each
// footprint faces the patch interior.
PatchLayout canonical_layout(Stage stage = Stage::Cultivation);

}  // namespace msmux
