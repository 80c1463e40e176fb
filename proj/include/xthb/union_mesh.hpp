#pragma once

#include <unordered_map>
#include <vector>

#include "xthb/polytree.hpp"

namespace xthb {

/// One cell of the union mesh. `key` addresses the cell on the dyadic lattice
/// of the forest domain; `pt_cell` is the forest cell it subdivides (equal to
/// `key` unless geometric refinement is active). Geometric cells exist only
/// here, never in the forest.
struct UnionCell {
  CellKey key;
  CellKey pt_cell;
};

/// Oriented facet of the union mesh. axis is the facet normal direction
/// (0 = vertical facet, 1 = horizontal); `coord` the position along that axis
/// and [lo, hi] the span in the other one. `cell_in` is the keying cell (finer
/// of the two, or the right/top one between equals); `cell_out` is -1 on the
/// domain boundary where `side` carries the boundary tag
/// (0 = left, 1 = right, 2 = bottom, 3 = top), else side = -1.
struct UnionFacet {
  int axis = 0;
  double coord = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int cell_in = -1;
  int cell_out = -1;
  int side = -1;
};

/// Common integration mesh of all AIs: the coarsest partition that is a
/// refinement of every AI's active partition (a cell qualifies when no AI has
/// refined it and at least one has it active), optionally subdivided further
/// for geometry resolution. `geom_refine` adds that many uniform levels below
/// every cell; `geom_level` subdivides cells until they reach the given
/// absolute level; both may be combined (the finer request wins per cell).
class UnionMesh {
 public:
  const PolyTreeForest& forest() const { return *forest_; }
  const std::vector<UnionCell>& cells() const { return cells_; }
  const std::vector<UnionFacet>& facets() const { return facets_; }

  Box2 cell_box(int c) const { return forest_->cell_box(cells_[c].key); }
  /// Index of the cell with the given lattice key, or -1.
  int cell_at(const CellKey& key) const;
  /// Cell containing a point (clamped into the domain).
  int locate(const Vec2& p) const;
  /// The Active forest cell of an AI that contains union cell `c`.
  CellKey field_cell(int ai, int c) const;

  friend UnionMesh build_union_mesh(const PolyTreeForest&, int, int);

 private:
  const PolyTreeForest* forest_ = nullptr;
  int geom_refine_ = 0;
  int geom_level_ = 0;
  std::vector<UnionCell> cells_;
  std::unordered_map<std::uint64_t, int> cell_index_;
  std::vector<UnionFacet> facets_;
};

/// Build the union mesh of all AIs of the forest. geom_refine >= 0 relative
/// subdivisions, geom_level absolute target level (0 for none).
UnionMesh build_union_mesh(const PolyTreeForest& forest, int geom_refine = 0,
                           int geom_level = 0);

}  // namespace xthb
