#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "xthb/geometry2d.hpp"

namespace xthb {

enum class CellState : std::uint8_t { Inactive = 0, Active = 1, Refined = 2 };

/// Cell address: lattice index (i, j) on the level's dyadic grid,
/// 0 <= i < nx * 2^level, 0 <= j < ny * 2^level.
struct CellKey {
  int level = 0;
  int i = 0;
  int j = 0;

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

/// Ordering used everywhere cells are enumerated: (level, j, i).
struct CellKeyLess {
  bool operator()(const CellKey& a, const CellKey& b) const {
    if (a.level != b.level) return a.level < b.level;
    if (a.j != b.j) return a.j < b.j;
    return a.i < b.i;
  }
};

/// Quadtree forest over a rectangular base grid, carrying one activation state
/// per cell per activation index (AI). Level-l cells have edge h0 / 2^l.
/// All level-0 cells exist and start Active for every AI. Refinement per AI
/// turns an Active cell Refined and its children Active (children are created
/// on first use and are Inactive for every other AI). A buffer closure keeps
/// the per-AI grading required by hierarchical B-spline bases of degree
/// p <= b_buffer.
class PolyTreeForest {
 public:
  static constexpr int kMaxLevels = 16;

  PolyTreeForest(const Box2& domain, int nx, int ny, int num_ais);

  const Box2& domain() const { return domain_; }
  int base_cells(int dir) const { return dir == 0 ? nx_ : ny_; }
  int num_ais() const { return num_ais_; }
  /// Deepest level with existing cells.
  int max_level() const;

  double cell_size(int level, int dir) const {
    return domain_.extent(dir) / double((dir == 0 ? nx_ : ny_) << level);
  }
  Box2 cell_box(const CellKey& c) const;
  bool in_domain(const CellKey& c) const {
    return c.i >= 0 && c.j >= 0 && c.i < (nx_ << c.level) && c.j < (ny_ << c.level);
  }

  bool exists(const CellKey& c) const;
  /// State for an AI; the cell must exist.
  CellState state(int ai, const CellKey& c) const;

  /// Flag Active cells of one AI for refinement and apply the buffer closure
  /// (range b_buffer * h^l around each flagged level-l cell, measured in
  /// would-be child center distances, inclusive comparison). The final states
  /// are the least fixed point of the closure and do not depend on the order
  /// of `flags`. Throws std::invalid_argument for flags that are not Active
  /// for `ai` and std::runtime_error if the forest already violates buffer
  /// regularity or the level cap is hit.
  void refine(int ai, std::span<const CellKey> flags, int b_buffer);

  /// Active cells of an AI, sorted by (level, j, i).
  std::vector<CellKey> active_cells(int ai) const;
  /// All existing cells, sorted by (level, j, i).
  std::vector<CellKey> all_cells() const;

  /// The unique Active cell of `ai` covering a point (clamped into the domain).
  CellKey active_cell_containing(int ai, const Vec2& p) const;
  /// The Active cell of `ai` covering the center of lattice position `pos`,
  /// walking down from level 0. Returns level <= pos.level cells only; if the
  /// covering partition is finer than pos.level, returns pos with its actual
  /// state via `covered_deeper`.
  CellKey covering_active(int ai, const CellKey& pos, bool& covered_deeper) const;

  /// Unique id: level-0 ids are row-major (j * nx + i); descendants append the
  /// 2-bit child path, with per-level offsets keeping ids distinct across
  /// levels.
  std::uint64_t cell_id(const CellKey& c) const;

  /// Verify per-AI buffer regularity for range b: every Active level-l cell
  /// has all lattice positions within componentwise center distance
  /// b * h^l covered at level >= l-1. Returns an empty string if satisfied,
  /// else a description of the first violation.
  std::string check_buffer_regularity(int ai, int b) const;

  /// Plain-text dump of every cell (sorted by level, j, i) with one state
  /// character per AI (A=Active, R=Refined, I=Inactive). Line format:
  ///   cell level=<l> i=<i> j=<j> id=<id> states=<chars>
  /// preceded by one header line.
  std::string dump() const;

 private:
  struct Level {
    std::unordered_map<std::uint64_t, std::uint32_t> index;  // key -> slot
    std::vector<std::uint8_t> states;                        // num_ais per slot
    std::vector<std::pair<int, int>> coords;                 // slot -> (i, j)
  };

  static std::uint64_t pack(int i, int j) {
    return (std::uint64_t(std::uint32_t(i)) << 32) | std::uint32_t(j);
  }
  const std::uint8_t* slot(const CellKey& c) const;
  std::uint8_t* slot(const CellKey& c);
  void create_cell(const CellKey& c);
  void set_state(int ai, const CellKey& c, CellState s);

  Box2 domain_;
  int nx_, ny_, num_ais_;
  std::vector<Level> levels_;
};

}  // namespace xthb
