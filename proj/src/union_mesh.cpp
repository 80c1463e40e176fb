#include "xthb/union_mesh.hpp"

#include <algorithm>
#include <stdexcept>

namespace xthb {

namespace {

std::uint64_t pack_cell(const CellKey& c) {
  return (std::uint64_t(c.level) << 52) | (std::uint64_t(std::uint32_t(c.i)) << 26) |
         std::uint64_t(std::uint32_t(c.j));
}

}  // namespace

int UnionMesh::cell_at(const CellKey& key) const {
  auto it = cell_index_.find(pack_cell(key));
  return it == cell_index_.end() ? -1 : it->second;
}

int UnionMesh::locate(const Vec2& p) const {
  CellKey deepest{-1, 0, 0};
  for (int ai = 0; ai < forest_->num_ais(); ++ai) {
    const CellKey c = forest_->active_cell_containing(ai, p);
    if (c.level > deepest.level) deepest = c;
  }
  const int extra =
      std::max({geom_refine_, geom_level_ - deepest.level, 0});
  if (extra == 0) return cell_at(deepest);

  const int level = deepest.level + extra;
  const Box2 box = forest_->cell_box(deepest);
  const double hx = forest_->cell_size(level, 0), hy = forest_->cell_size(level, 1);
  int i = int((std::clamp(p.x, box.lo.x, box.hi.x) - forest_->domain().lo.x) / hx);
  int j = int((std::clamp(p.y, box.lo.y, box.hi.y) - forest_->domain().lo.y) / hy);
  i = std::clamp(i, deepest.i << extra, ((deepest.i + 1) << extra) - 1);
  j = std::clamp(j, deepest.j << extra, ((deepest.j + 1) << extra) - 1);
  return cell_at(CellKey{level, i, j});
}

CellKey UnionMesh::field_cell(int ai, int c) const {
  CellKey k = cells_[c].pt_cell;
  while (forest_->state(ai, k) != CellState::Active) {
    if (k.level == 0) throw std::logic_error("union mesh: no active ancestor");
    k = CellKey{k.level - 1, k.i >> 1, k.j >> 1};
  }
  return k;
}

UnionMesh build_union_mesh(const PolyTreeForest& forest, int geom_refine, int geom_level) {
  if (geom_refine < 0 || geom_level < 0)
    throw std::invalid_argument("union mesh: negative refinement");
  UnionMesh mesh;
  mesh.forest_ = &forest;
  mesh.geom_refine_ = geom_refine;
  mesh.geom_level_ = geom_level;

  for (const CellKey& c : forest.all_cells()) {
    bool any_active = false, any_refined = false;
    for (int ai = 0; ai < forest.num_ais(); ++ai) {
      const CellState s = forest.state(ai, c);
      any_active |= s == CellState::Active;
      any_refined |= s == CellState::Refined;
    }
    if (!any_active || any_refined) continue;
    const int extra = std::max({geom_refine, geom_level - c.level, 0});
    for (int dj = 0; dj < (1 << extra); ++dj)
      for (int di = 0; di < (1 << extra); ++di)
        mesh.cells_.push_back(UnionCell{
            CellKey{c.level + extra, (c.i << extra) + di, (c.j << extra) + dj}, c});
  }
  std::sort(mesh.cells_.begin(), mesh.cells_.end(),
            [](const UnionCell& a, const UnionCell& b) { return CellKeyLess{}(a.key, b.key); });
  for (int k = 0; k < int(mesh.cells_.size()); ++k)
    mesh.cell_index_.emplace(pack_cell(mesh.cells_[k].key), k);

  // Same-or-coarser neighbor of cell `key` across one side, or -1. Walks up
  // through ancestors; finer neighbors are keyed from their own side.
  auto neighbor = [&mesh](CellKey key, int di, int dj) {
    CellKey q{key.level, key.i + di, key.j + dj};
    while (q.level >= 0) {
      const int found = mesh.cell_at(q);
      if (found >= 0) return found;
      q = CellKey{q.level - 1, q.i >> 1, q.j >> 1};
    }
    return -1;
  };

  for (int c = 0; c < int(mesh.cells_.size()); ++c) {
    const CellKey key = mesh.cells_[c].key;
    const Box2 box = forest.cell_box(key);
    const int ni = forest.base_cells(0) << key.level;
    const int nj = forest.base_cells(1) << key.level;

    // left
    if (key.i == 0)
      mesh.facets_.push_back(UnionFacet{0, box.lo.x, box.lo.y, box.hi.y, c, -1, 0});
    else {
      const int n = neighbor(key, -1, 0);
      if (n >= 0) mesh.facets_.push_back(UnionFacet{0, box.lo.x, box.lo.y, box.hi.y, c, n, -1});
    }
    // right: emit only against coarser neighbors (equals key from their left)
    if (key.i == ni - 1)
      mesh.facets_.push_back(UnionFacet{0, box.hi.x, box.lo.y, box.hi.y, c, -1, 1});
    else {
      const int n = neighbor(key, 1, 0);
      if (n >= 0 && mesh.cells_[n].key.level < key.level)
        mesh.facets_.push_back(UnionFacet{0, box.hi.x, box.lo.y, box.hi.y, c, n, -1});
    }
    // bottom
    if (key.j == 0)
      mesh.facets_.push_back(UnionFacet{1, box.lo.y, box.lo.x, box.hi.x, c, -1, 2});
    else {
      const int n = neighbor(key, 0, -1);
      if (n >= 0) mesh.facets_.push_back(UnionFacet{1, box.lo.y, box.lo.x, box.hi.x, c, n, -1});
    }
    // top
    if (key.j == nj - 1)
      mesh.facets_.push_back(UnionFacet{1, box.hi.y, box.lo.x, box.hi.x, c, -1, 3});
    else {
      const int n = neighbor(key, 0, 1);
      if (n >= 0 && mesh.cells_[n].key.level < key.level)
        mesh.facets_.push_back(UnionFacet{1, box.hi.y, box.lo.x, box.hi.x, c, n, -1});
    }
  }
  return mesh;
}

}  // namespace xthb
