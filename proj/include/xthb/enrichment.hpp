#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

#include "xthb/extraction.hpp"
#include "xthb/integration_mesh.hpp"

namespace xthb {

/// One enriched scalar unknown of a field: basis function, the enrichment
/// level ell within that function and the phase of the level's region.
struct EnrichedDof {
  int fn = -1;
  int level = 0;
  int phase = 0;
};

/// Generalized Heaviside enrichment of one extracted field basis. Every basis
/// function receives one unknown per facet-connected region of same-phase
/// material inside its (truncated) support; regions of different phases count
/// separately and void phases carry no unknowns. Connectivity runs through
/// the in-cell components of the integration mesh glued by the conforming
/// facet traces, so regions that merely touch at a corner stay distinct.
class Enrichment {
 public:
  Enrichment(const Extractor& extractor, const IntegrationMesh& im);

  const Extractor& extractor() const { return *ex_; }
  const IntegrationMesh& integration() const { return *im_; }

  int num_dofs() const { return int(dofs_.size()); }
  const std::vector<EnrichedDof>& dofs() const { return dofs_; }

  /// Number of enrichment levels L_j of one function (0 when the support
  /// holds no non-void material).
  int num_levels(int fn) const { return fn_begin_[fn + 1] - fn_begin_[fn]; }
  int dof(int fn, int level) const { return fn_begin_[fn] + level; }
  int level_phase(int fn, int level) const { return dofs_[dof(fn, level)].phase; }

  /// Scalar unknown of every visible function on one in-cell material region,
  /// aligned with the rows of extractor().table(ucell).fn.
  std::span<const int> cell_dofs(int ucell, int phase, int comp) const;

  /// Enriched field values at points of the given region, one row per point,
  /// one column per requested derivative pair. Throws std::invalid_argument
  /// for void phases.
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& coeffs, int ucell, int phase, int comp,
                           std::span<const Vec2> pts,
                           std::span<const std::array<int, 2>> derivs) const;

 private:
  const Extractor* ex_;
  const IntegrationMesh* im_;
  std::vector<EnrichedDof> dofs_;
  std::vector<int> fn_begin_;
  std::vector<std::vector<int>> cell_dofs_;  // per (cell * P + phase): comp-major, row-minor
};

}  // namespace xthb
