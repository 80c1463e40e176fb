#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <vector>

#include "xthb/enrichment.hpp"
#include "xthb/materials.hpp"

namespace xthb {

/// Dirichlet data enforced weakly. A condition lives either on one side of
/// the mesh bounding box (side 0..3 = left/right/bottom/top) or on the
/// immersed boundary, i.e. every interface against a void phase. The mask
/// selects the constrained components of a vector field.
struct DirichletBC {
  int side = -1;
  bool immersed = false;
  int phase = -1;  // restrict to this material phase, -1 = any
  std::array<bool, 2> mask{true, true};
  std::function<double(const Vec2&, int comp)> value;
};

/// Prescribed flux (scalar field) or traction component-wise (vector field)
/// on a mesh side or on the immersed boundary.
struct NeumannBC {
  int side = -1;
  bool immersed = false;
  int phase = -1;
  std::function<double(const Vec2&, int comp)> value;
};

struct LinearSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
};

struct ThermalProblem {
  const Enrichment* enr = nullptr;
  std::vector<MaterialPhase> materials;  // one per level-set phase
  WeakFormConfig wf;
  std::vector<DirichletBC> dirichlet;
  std::vector<NeumannBC> neumann;
  std::function<double(const Vec2&)> source;  // volumetric heat source
};

struct ElasticProblem {
  const Enrichment* enr = nullptr;
  std::vector<MaterialPhase> materials;
  WeakFormConfig wf;
  std::vector<DirichletBC> dirichlet;
  std::vector<NeumannBC> neumann;
  std::function<Vec2(const Vec2&)> body;  // volumetric body force

  // Optional thermal coupling: a solved temperature field on the same
  // integration mesh drives the thermal strain.
  const Enrichment* temperature_enr = nullptr;
  const Eigen::VectorXd* temperature = nullptr;
};

/// Assembles the stabilized thermal system: bulk diffusion, Nitsche
/// Dirichlet and interface terms, Neumann fluxes, and ghost penalties.
LinearSystem assemble_thermal(const ThermalProblem& prob);

/// Assembles the stabilized elastic system; dofs interleave as
/// 2 * scalar_dof + direction. Thermal strain enters the right-hand side of
/// the bulk, consistency, and interface terms when coupling is present.
LinearSystem assemble_elastic(const ElasticProblem& prob);

/// Temperature and gradient of a solved thermal field at a point of an
/// integration-mesh region.
double temperature_at(const Enrichment& enr, const Eigen::VectorXd& T, int ucell, int phase,
                      int comp, const Vec2& p);

/// Cauchy stress (Voigt xx, yy, xy) of a solved displacement field,
/// including the thermal contribution when the problem couples temperature.
Eigen::Vector3d stress_at(const ElasticProblem& prob, const Eigen::VectorXd& u, int ucell,
                          int phase, int comp, const Vec2& p);

/// Exact value and gradient of a reference solution, phase-wise.
struct RefValue {
  double v = 0.0;
  Vec2 g{0.0, 0.0};
};

/// Evaluation site handed to a reference solution: the physical point, the
/// field component, and the integration-mesh region the point belongs to.
/// Analytic references use `p`, `phase` and `comp`; references backed by a
/// solved field on a structurally identical integration mesh additionally
/// use `ucell` and `region` to address the matching enriched region.
struct RefSite {
  int phase = 0;
  int comp = 0;
  Vec2 p{0.0, 0.0};
  int ucell = -1;
  int region = 0;
};
using Reference = std::function<RefValue(const RefSite&)>;

struct FieldError {
  double l2 = 0.0;      // absolute L2 error
  double h1 = 0.0;      // absolute H1 seminorm error
  double ref_l2 = 0.0;  // L2 norm of the reference
  double ref_h1 = 0.0;  // H1 seminorm of the reference
};

/// Phase-wise L2 / H1 error of an enriched field against a reference,
/// integrated over all non-void material triangles.
FieldError error_norms(const Enrichment& enr, const Eigen::VectorXd& coeffs, int components,
                       const Reference& ref, int quad_degree);

/// Averaging weights and penalty of one interface inside a background cell,
/// from the per-side phase measures and stiffness parameters (kappa or E)
/// and the interface measure of the cell. The default convention weights by
/// measure over stiffness; the inverse one by stiffness over measure.
struct InterfaceWeighting {
  double wm = 0.5;
  double wn = 0.5;
  double gamma = 0.0;
};
InterfaceWeighting interface_weighting(double meas_m, double k_m, double meas_n, double k_n,
                                       double meas_gamma, double c_I, bool inverse = false);

/// Block offsets of several fields in one global dof order.
struct DofLayout {
  std::vector<int> offset;
  int total = 0;
};
DofLayout layout_dofs(std::span<const int> field_sizes);

}  // namespace xthb
