#pragma once

#include <stdexcept>
#include <vector>

#include "xthb/levelset.hpp"
#include "xthb/union_mesh.hpp"

namespace xthb {

/// Raised when the level-set sampling shows structure below the union-cell
/// resolution (a sign change inside an edge whose endpoints agree).
class GeometryResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One material triangle of the cut integration mesh (counterclockwise).
struct IntegrationTri {
  std::array<Vec2, 3> v;
  int ucell = -1;
  int phase = 0;
  int comp = 0;  // within-(cell, phase) connected component
};

/// Interface segment between two phases, with the unit normal pointing from
/// phase_m into phase_n (phase_m < phase_n). Both sides record the union cell
/// and local component they belong to; the cells differ when the interface
/// lies exactly on a union facet.
struct InterfaceSegment {
  Vec2 a, b;
  Vec2 normal;
  int phase_m = 0, phase_n = 0;
  int ucell_m = -1, comp_m = 0;
  int ucell_n = -1, comp_n = 0;
};

/// Piece of the domain boundary covered by one phase of one cell.
struct BoundaryPiece {
  Vec2 a, b;
  int side = 0;  // 0 left, 1 right, 2 bottom, 3 top
  int ucell = -1;
  int phase = 0;
  int comp = 0;
};

/// Portion of an interior union facet where the same phase touches from both
/// sides; the combinatorial glue for enrichment regions and ghost pairing.
struct FacetTrace {
  int facet = -1;
  double lo = 0.0, hi = 0.0;
  int phase = 0;
  int comp_in = 0, comp_out = 0;
};

/// Interior facet selected for ghost stabilization of one phase: both cells
/// carry the phase and at least one of them is cut.
struct GhostFacet {
  int facet = -1;
  int phase = 0;
  int comp_in = 0, comp_out = 0;
};

/// Cut integration mesh: per-cell triangulations of every phase, interface
/// segments, domain-boundary pieces, facet traces and the ghost facet list.
/// Built once per union mesh and level set; immutable afterwards. Cell
/// cutting runs in parallel when XTHB_THREADS is set (> 1); results do not
/// depend on the thread count.
class IntegrationMesh {
 public:
  const UnionMesh& mesh() const { return *mesh_; }
  const LevelSetGeometry& levelset() const { return *levelset_; }
  int num_phases() const { return levelset_->num_phases(); }

  const std::vector<IntegrationTri>& tris() const { return tris_; }
  /// Triangles of one cell: indices [cell_begin(c), cell_begin(c + 1)).
  int cell_begin(int c) const { return tri_begin_[c]; }
  int cell_end(int c) const { return tri_begin_[c + 1]; }

  const std::vector<InterfaceSegment>& interfaces() const { return interfaces_; }
  const std::vector<BoundaryPiece>& boundary_pieces() const { return boundary_; }
  const std::vector<FacetTrace>& facet_traces() const { return traces_; }
  const std::vector<GhostFacet>& ghost_facets() const { return ghosts_; }

  double phase_area(int ucell, int m) const {
    return areas_[std::size_t(ucell) * num_phases() + m];
  }
  int num_components(int ucell, int m) const {
    return n_comps_[std::size_t(ucell) * num_phases() + m];
  }
  /// More than one phase with positive area in the cell.
  bool is_cut(int ucell) const { return cut_[ucell]; }
  /// Total interface length inside one cell (cross-facet pieces count for the
  /// keying cell).
  double interface_length(int ucell) const { return iface_len_[ucell]; }

  double total_phase_area(int m) const;
  double total_interface_length(int phase_m, int phase_n) const;

  friend IntegrationMesh build_integration_mesh(const UnionMesh&, const LevelSetGeometry&);

 private:
  const UnionMesh* mesh_ = nullptr;
  const LevelSetGeometry* levelset_ = nullptr;
  std::vector<IntegrationTri> tris_;
  std::vector<int> tri_begin_;
  std::vector<InterfaceSegment> interfaces_;
  std::vector<BoundaryPiece> boundary_;
  std::vector<FacetTrace> traces_;
  std::vector<GhostFacet> ghosts_;
  std::vector<double> areas_;
  std::vector<int> n_comps_;
  std::vector<char> cut_;
  std::vector<double> iface_len_;
};

IntegrationMesh build_integration_mesh(const UnionMesh& mesh, const LevelSetGeometry& levelset);

}  // namespace xthb
