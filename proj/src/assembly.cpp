#include "xthb/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "xthb/quadrature.hpp"

namespace xthb {

namespace {

constexpr std::array<std::array<int, 2>, 1> kVal{{{0, 0}}};
constexpr std::array<std::array<int, 2>, 3> kValGrad{{{0, 0}, {1, 0}, {0, 1}}};

// Exactness of the residual of a reproducible solution needs total degree
// 3p - 2 in the bulk and 3p - 1 on faces; both stay within the available
// rules for the supported degrees.
int bulk_degree(int p) { return std::min(8, std::max(2 * p, 3 * p - 2)); }
int face_degree(int p) { return std::max(2 * p + 1, 3 * p - 1); }

double cell_h(const UnionMesh& mesh, int c) {
  const Box2 b = mesh.cell_box(c);
  return std::min(b.extent(0), b.extent(1));
}

void check_materials(const std::vector<MaterialPhase>& mats, const LevelSetGeometry& ls) {
  if (int(mats.size()) != ls.num_phases())
    throw std::invalid_argument("one material per level-set phase required");
  for (int m = 0; m < int(mats.size()); ++m) {
    if (ls.is_void(m) != mats[m].void_phase)
      throw std::invalid_argument("void flags of materials and level set disagree");
    mats[m].validate();
  }
}

/// One segment where a boundary condition acts, with the outward normal and
/// the material-side region it tests against.
struct FaceSite {
  Vec2 a, b;
  Vec2 n;
  int ucell = -1;
  int phase = 0;
  int comp = 0;
};

template <class BC>
std::vector<FaceSite> bc_sites(const IntegrationMesh& im, const std::vector<MaterialPhase>& mats,
                               const BC& bc) {
  if (bc.phase >= 0) {
    if (bc.phase >= int(mats.size()))
      throw std::invalid_argument("boundary condition names a phase that does not exist");
    if (mats[bc.phase].void_phase)
      throw std::invalid_argument("boundary condition prescribed on a void phase");
  }
  if (bc.side < 0 && !bc.immersed)
    throw std::invalid_argument("boundary condition needs a side or the immersed flag");
  std::vector<FaceSite> out;
  if (bc.side >= 0) {
    static const Vec2 kSideNormal[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    for (const BoundaryPiece& bp : im.boundary_pieces()) {
      if (bp.side != bc.side || mats[bp.phase].void_phase) continue;
      if (bc.phase >= 0 && bp.phase != bc.phase) continue;
      out.push_back({bp.a, bp.b, kSideNormal[bp.side], bp.ucell, bp.phase, bp.comp});
    }
  }
  if (bc.immersed) {
    for (const InterfaceSegment& s : im.interfaces()) {
      const bool vm = mats[s.phase_m].void_phase;
      const bool vn = mats[s.phase_n].void_phase;
      if (vm == vn) continue;
      if (vn) {
        if (bc.phase >= 0 && s.phase_m != bc.phase) continue;
        out.push_back({s.a, s.b, s.normal, s.ucell_m, s.phase_m, s.comp_m});
      } else {
        if (bc.phase >= 0 && s.phase_n != bc.phase) continue;
        out.push_back({s.a, s.b, s.normal * -1.0, s.ucell_n, s.phase_n, s.comp_n});
      }
    }
  }
  return out;
}

void scatter(std::vector<Eigen::Triplet<double>>& trips, const Eigen::MatrixXd& Ke,
             std::span<const int> rows, std::span<const int> cols) {
  for (int i = 0; i < int(rows.size()); ++i)
    for (int j = 0; j < int(cols.size()); ++j)
      if (Ke(i, j) != 0.0) trips.emplace_back(rows[i], cols[j], Ke(i, j));
}

void scatter_rhs(Eigen::VectorXd& b, const Eigen::VectorXd& Fe, std::span<const int> rows) {
  for (int i = 0; i < int(rows.size()); ++i) b[rows[i]] += Fe[i];
}

std::vector<int> vector_dofs(std::span<const int> scalar) {
  std::vector<int> g(scalar.size() * 2);
  for (size_t r = 0; r < scalar.size(); ++r) {
    g[2 * r] = 2 * scalar[r];
    g[2 * r + 1] = 2 * scalar[r] + 1;
  }
  return g;
}

/// Per-(keying cell, phase pair) interface measure for the elemental
/// interface penalty; segments on facets count for their m-side cell.
std::unordered_map<std::uint64_t, double> interface_measures(const IntegrationMesh& im) {
  std::unordered_map<std::uint64_t, double> meas;
  const int P = im.num_phases();
  for (const InterfaceSegment& s : im.interfaces()) {
    const std::uint64_t key =
        (std::uint64_t(s.ucell_m) * P + s.phase_m) * P + s.phase_n;
    meas[key] += (s.b - s.a).norm();
  }
  return meas;
}

InterfaceWeighting segment_weights(const IntegrationMesh& im,
                                   const std::unordered_map<std::uint64_t, double>& meas,
                                   const InterfaceSegment& s, double km, double kn, double c_I,
                                   bool inverse) {
  const std::uint64_t key =
      (std::uint64_t(s.ucell_m) * im.num_phases() + s.phase_m) * im.num_phases() + s.phase_n;
  return interface_weighting(im.phase_area(s.ucell_m, s.phase_m), km,
                             im.phase_area(s.ucell_n, s.phase_n), kn, meas.at(key), c_I,
                             inverse);
}

/// Strain-displacement matrix (Voigt xx, yy, xy) from shape values M with
/// columns (value, d/dx, d/dy); displacement dofs interleave as 2 r + d.
Eigen::MatrixXd strain_matrix(const Eigen::MatrixXd& M) {
  const int nl = int(M.rows());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, 2 * nl);
  for (int r = 0; r < nl; ++r) {
    B(0, 2 * r) = M(r, 1);
    B(1, 2 * r + 1) = M(r, 2);
    B(2, 2 * r) = M(r, 2);
    B(2, 2 * r + 1) = M(r, 1);
  }
  return B;
}

/// Rows of the boundary traction (D B) n per displacement dof.
Eigen::MatrixXd traction_matrix(const Eigen::MatrixXd& DB, const Vec2& n) {
  Eigen::MatrixXd T(2, DB.cols());
  T.row(0) = DB.row(0) * n.x + DB.row(2) * n.y;
  T.row(1) = DB.row(2) * n.x + DB.row(1) * n.y;
  return T;
}

/// Shape matrix of a vector field: N2(d, 2 r + d) = N_r.
Eigen::MatrixXd vector_shapes(const Eigen::VectorXd& N) {
  Eigen::MatrixXd N2 = Eigen::MatrixXd::Zero(2, 2 * N.size());
  for (int r = 0; r < N.size(); ++r) {
    N2(0, 2 * r) = N[r];
    N2(1, 2 * r + 1) = N[r];
  }
  return N2;
}

/// Ghost penalty of one scalar basis: for every ghost facet the jump of the
/// p-th normal-axis derivative of the extended polynomials, integrated over
/// the whole facet, scaled by gamma * h^(2(p-1)+1). `apply` scatters the
/// local jump operator.
template <class Apply>
void ghost_loop(const Enrichment& enr, const std::vector<MaterialPhase>& mats,
                const WeakFormConfig& wf, bool elastic, Apply&& apply) {
  const IntegrationMesh& im = enr.integration();
  const UnionMesh& mesh = im.mesh();
  const Extractor& ex = enr.extractor();
  const std::array<int, 2> deg = ex.basis().degree();
  const int p = std::max(deg[0], deg[1]);
  for (const GhostFacet& gf : im.ghost_facets()) {
    const MaterialPhase& mat = mats[gf.phase];
    if (mat.void_phase) continue;
    const UnionFacet& f = mesh.facets()[gf.facet];
    const Vec2 a = f.axis == 0 ? Vec2{f.coord, f.lo} : Vec2{f.lo, f.coord};
    const Vec2 b = f.axis == 0 ? Vec2{f.coord, f.hi} : Vec2{f.hi, f.coord};
    const int pn = deg[f.axis];
    const std::array<std::array<int, 2>, 1> dn{
        f.axis == 0 ? std::array<int, 2>{pn, 0} : std::array<int, 2>{0, pn}};
    const double h = cell_h(mesh, f.cell_in);
    const double k = elastic ? mat.E : mat.kappa;
    const double scale = wf.gamma_G * k * std::pow(h, 2 * (pn - 1) + 1);
    const auto din = enr.cell_dofs(f.cell_in, gf.phase, gf.comp_in);
    const auto dout = enr.cell_dofs(f.cell_out, gf.phase, gf.comp_out);
    const int ni = int(din.size()), no = int(dout.size());
    Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(ni + no, ni + no);
    for (const QuadPoint& q : segment_rule(a, b, 2 * p + 1)) {
      Eigen::VectorXd J(ni + no);
      J.head(ni) = ex.evaluate(f.cell_in, q.p, dn).col(0);
      J.tail(no) = -ex.evaluate(f.cell_out, q.p, dn).col(0);
      Ke += (q.w * scale) * (J * J.transpose());
    }
    std::vector<int> dofs(din.begin(), din.end());
    dofs.insert(dofs.end(), dout.begin(), dout.end());
    apply(Ke, dofs);
  }
}

}  // namespace

InterfaceWeighting interface_weighting(double meas_m, double k_m, double meas_n, double k_n,
                                       double meas_gamma, double c_I, bool inverse) {
  const double rm = meas_m / k_m;
  const double rn = meas_n / k_n;
  InterfaceWeighting w;
  if (inverse) {
    w.wm = (1.0 / rm) / (1.0 / rm + 1.0 / rn);
  } else {
    w.wm = rm / (rm + rn);
  }
  w.wn = 1.0 - w.wm;
  w.gamma = 2.0 * c_I * meas_gamma / (rm + rn);
  return w;
}

DofLayout layout_dofs(std::span<const int> field_sizes) {
  DofLayout l;
  l.offset.reserve(field_sizes.size());
  for (int s : field_sizes) {
    l.offset.push_back(l.total);
    l.total += s;
  }
  return l;
}

LinearSystem assemble_thermal(const ThermalProblem& prob) {
  const Enrichment& enr = *prob.enr;
  const IntegrationMesh& im = enr.integration();
  const Extractor& ex = enr.extractor();
  const UnionMesh& mesh = im.mesh();
  check_materials(prob.materials, im.levelset());
  const std::array<int, 2> deg = ex.basis().degree();
  const int p = std::max(deg[0], deg[1]);
  const double c_D = prob.wf.dirichlet_constant(p);
  const double c_I = prob.wf.interface_constant(p);

  const int n = enr.num_dofs();
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  for (const IntegrationTri& tri : im.tris()) {
    const MaterialPhase& mat = prob.materials[tri.phase];
    if (mat.void_phase) continue;
    const auto dofs = enr.cell_dofs(tri.ucell, tri.phase, tri.comp);
    const int nl = int(dofs.size());
    Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(nl, nl);
    Eigen::VectorXd Fe = Eigen::VectorXd::Zero(nl);
    for (const QuadPoint& q : triangle_rule(tri.v, bulk_degree(p))) {
      const Eigen::MatrixXd M = ex.evaluate(tri.ucell, q.p, kValGrad);
      Ke += (q.w * mat.kappa) *
            (M.col(1) * M.col(1).transpose() + M.col(2) * M.col(2).transpose());
      if (prob.source) Fe += (q.w * prob.source(q.p)) * M.col(0);
    }
    scatter(trips, Ke, dofs, dofs);
    scatter_rhs(rhs, Fe, dofs);
  }

  for (const NeumannBC& bc : prob.neumann) {
    for (const FaceSite& s : bc_sites(im, prob.materials, bc)) {
      const auto dofs = enr.cell_dofs(s.ucell, s.phase, s.comp);
      Eigen::VectorXd Fe = Eigen::VectorXd::Zero(dofs.size());
      for (const QuadPoint& q : segment_rule(s.a, s.b, face_degree(p)))
        Fe += (q.w * bc.value(q.p, 0)) * ex.evaluate(s.ucell, q.p, kVal).col(0);
      scatter_rhs(rhs, Fe, dofs);
    }
  }

  for (const DirichletBC& bc : prob.dirichlet) {
    for (const FaceSite& s : bc_sites(im, prob.materials, bc)) {
      const MaterialPhase& mat = prob.materials[s.phase];
      const double gamma = c_D * mat.kappa / cell_h(mesh, s.ucell);
      const auto dofs = enr.cell_dofs(s.ucell, s.phase, s.comp);
      const int nl = int(dofs.size());
      Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(nl, nl);
      Eigen::VectorXd Fe = Eigen::VectorXd::Zero(nl);
      for (const QuadPoint& q : segment_rule(s.a, s.b, face_degree(p))) {
        const Eigen::MatrixXd M = ex.evaluate(s.ucell, q.p, kValGrad);
        const Eigen::VectorXd N = M.col(0);
        const Eigen::VectorXd dn = mat.kappa * (M.col(1) * s.n.x + M.col(2) * s.n.y);
        const double g = bc.value(q.p, 0);
        Ke += q.w * (-N * dn.transpose() + dn * N.transpose() + gamma * N * N.transpose());
        Fe += (q.w * g) * (dn + gamma * N);
      }
      scatter(trips, Ke, dofs, dofs);
      scatter_rhs(rhs, Fe, dofs);
    }
  }

  const auto meas = interface_measures(im);
  for (const InterfaceSegment& s : im.interfaces()) {
    const MaterialPhase& mm = prob.materials[s.phase_m];
    const MaterialPhase& mn = prob.materials[s.phase_n];
    if (mm.void_phase || mn.void_phase) continue;
    const InterfaceWeighting w =
        segment_weights(im, meas, s, mm.kappa, mn.kappa, c_I, prob.wf.inverse_weights);
    const auto dm = enr.cell_dofs(s.ucell_m, s.phase_m, s.comp_m);
    const auto dn_ = enr.cell_dofs(s.ucell_n, s.phase_n, s.comp_n);
    const int nm = int(dm.size()), nn = int(dn_.size());
    Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(nm + nn, nm + nn);
    for (const QuadPoint& q : segment_rule(s.a, s.b, face_degree(p))) {
      const Eigen::MatrixXd Mm = ex.evaluate(s.ucell_m, q.p, kValGrad);
      const Eigen::MatrixXd Mn = ex.evaluate(s.ucell_n, q.p, kValGrad);
      Eigen::VectorXd J(nm + nn), A(nm + nn);
      J.head(nm) = Mm.col(0);
      J.tail(nn) = -Mn.col(0);
      A.head(nm) = (w.wm * mm.kappa) * (Mm.col(1) * s.normal.x + Mm.col(2) * s.normal.y);
      A.tail(nn) = (w.wn * mn.kappa) * (Mn.col(1) * s.normal.x + Mn.col(2) * s.normal.y);
      Ke += q.w * (-J * A.transpose() + A * J.transpose() + w.gamma * J * J.transpose());
    }
    std::vector<int> dofs(dm.begin(), dm.end());
    dofs.insert(dofs.end(), dn_.begin(), dn_.end());
    scatter(trips, Ke, dofs, dofs);
  }

  if (prob.wf.ghost) {
    ghost_loop(enr, prob.materials, prob.wf, false,
               [&](const Eigen::MatrixXd& Ke, const std::vector<int>& dofs) {
                 scatter(trips, Ke, dofs, dofs);
               });
  }

  LinearSystem sys;
  sys.A.resize(n, n);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.b = std::move(rhs);
  return sys;
}

namespace {

/// Batch temperature evaluation of an optional coupled field on one region.
class CoupledTemperature {
 public:
  CoupledTemperature(const ElasticProblem& prob, const IntegrationMesh& im) {
    if (!prob.temperature_enr) return;
    if (!prob.temperature) throw std::invalid_argument("temperature coefficients missing");
    if (&prob.temperature_enr->integration() != &im)
      throw std::invalid_argument("temperature field must share the integration mesh");
    enr_ = prob.temperature_enr;
    coeffs_ = prob.temperature;
  }

  bool active() const { return enr_ != nullptr; }

  Eigen::VectorXd at(int ucell, int phase, int comp, std::span<const Vec2> pts) const {
    return enr_->evaluate(*coeffs_, ucell, phase, comp, pts, kVal).col(0);
  }

 private:
  const Enrichment* enr_ = nullptr;
  const Eigen::VectorXd* coeffs_ = nullptr;
};

}  // namespace

LinearSystem assemble_elastic(const ElasticProblem& prob) {
  const Enrichment& enr = *prob.enr;
  const IntegrationMesh& im = enr.integration();
  const Extractor& ex = enr.extractor();
  const UnionMesh& mesh = im.mesh();
  check_materials(prob.materials, im.levelset());
  const std::array<int, 2> deg = ex.basis().degree();
  const int p = std::max(deg[0], deg[1]);
  const double c_D = prob.wf.dirichlet_constant(p);
  const double c_I = prob.wf.interface_constant(p);
  const bool ps = prob.wf.plane_strain;
  const CoupledTemperature temp(prob, im);
  // The coupled thermal load raises the integrand degree by that of the
  // temperature field; two extra orders cover every pairing used here.
  const int bq = std::min(8, bulk_degree(p) + (temp.active() ? 2 : 0));

  const int n = 2 * enr.num_dofs();
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  for (const IntegrationTri& tri : im.tris()) {
    const MaterialPhase& mat = prob.materials[tri.phase];
    if (mat.void_phase) continue;
    const Eigen::Matrix3d D = constitutive_matrix(mat, ps);
    const auto sdofs = enr.cell_dofs(tri.ucell, tri.phase, tri.comp);
    const std::vector<int> dofs = vector_dofs(sdofs);
    const int nl = int(dofs.size());
    Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(nl, nl);
    Eigen::VectorXd Fe = Eigen::VectorXd::Zero(nl);
    const auto qps = triangle_rule(tri.v, bq);
    std::vector<Vec2> pts(qps.size());
    for (size_t i = 0; i < qps.size(); ++i) pts[i] = qps[i].p;
    Eigen::VectorXd T;
    if (temp.active()) T = temp.at(tri.ucell, tri.phase, tri.comp, pts);
    for (size_t i = 0; i < qps.size(); ++i) {
      const QuadPoint& q = qps[i];
      const Eigen::MatrixXd M = ex.evaluate(tri.ucell, q.p, kValGrad);
      const Eigen::MatrixXd B = strain_matrix(M);
      Ke += q.w * (B.transpose() * D * B);
      if (prob.body) {
        const Vec2 f = prob.body(q.p);
        for (int r = 0; r < int(sdofs.size()); ++r) {
          Fe[2 * r] += q.w * M(r, 0) * f.x;
          Fe[2 * r + 1] += q.w * M(r, 0) * f.y;
        }
      }
      if (temp.active())
        Fe += q.w * (B.transpose() * (D * thermal_strain(mat, T[i], ps)));
    }
    scatter(trips, Ke, dofs, dofs);
    scatter_rhs(rhs, Fe, dofs);
  }

  for (const NeumannBC& bc : prob.neumann) {
    for (const FaceSite& s : bc_sites(im, prob.materials, bc)) {
      const auto sdofs = enr.cell_dofs(s.ucell, s.phase, s.comp);
      const std::vector<int> dofs = vector_dofs(sdofs);
      Eigen::VectorXd Fe = Eigen::VectorXd::Zero(dofs.size());
      for (const QuadPoint& q : segment_rule(s.a, s.b, face_degree(p))) {
        const Eigen::VectorXd N = ex.evaluate(s.ucell, q.p, kVal).col(0);
        for (int r = 0; r < N.size(); ++r)
          for (int d = 0; d < 2; ++d) Fe[2 * r + d] += q.w * N[r] * bc.value(q.p, d);
      }
      scatter_rhs(rhs, Fe, dofs);
    }
  }

  for (const DirichletBC& bc : prob.dirichlet) {
    for (const FaceSite& s : bc_sites(im, prob.materials, bc)) {
      const MaterialPhase& mat = prob.materials[s.phase];
      const Eigen::Matrix3d D = constitutive_matrix(mat, ps);
      const Eigen::Matrix2d P =
          Eigen::Vector2d(bc.mask[0] ? 1.0 : 0.0, bc.mask[1] ? 1.0 : 0.0).asDiagonal();
      const double gamma = c_D * mat.E / cell_h(mesh, s.ucell);
      const auto sdofs = enr.cell_dofs(s.ucell, s.phase, s.comp);
      const std::vector<int> dofs = vector_dofs(sdofs);
      const int nl = int(dofs.size());
      Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(nl, nl);
      Eigen::VectorXd Fe = Eigen::VectorXd::Zero(nl);
      const auto qps = segment_rule(s.a, s.b, face_degree(p));
      std::vector<Vec2> pts(qps.size());
      for (size_t i = 0; i < qps.size(); ++i) pts[i] = qps[i].p;
      Eigen::VectorXd T;
      if (temp.active()) T = temp.at(s.ucell, s.phase, s.comp, pts);
      for (size_t i = 0; i < qps.size(); ++i) {
        const QuadPoint& q = qps[i];
        const Eigen::MatrixXd M = ex.evaluate(s.ucell, q.p, kValGrad);
        const Eigen::MatrixXd N2 = vector_shapes(M.col(0));
        const Eigen::MatrixXd Tr = traction_matrix(D * strain_matrix(M), s.n);
        Ke += q.w * (-N2.transpose() * P * Tr + Tr.transpose() * P * N2 +
                     gamma * N2.transpose() * P * N2);
        Eigen::Vector2d g(bc.mask[0] ? bc.value(q.p, 0) : 0.0,
                          bc.mask[1] ? bc.value(q.p, 1) : 0.0);
        Fe += q.w * (Tr.transpose() * (P * g) + gamma * (N2.transpose() * (P * g)));
        if (temp.active()) {
          const Eigen::Vector3d sth = D * thermal_strain(mat, T[i], ps);
          const Eigen::Vector2d tth(sth[0] * s.n.x + sth[2] * s.n.y,
                                    sth[2] * s.n.x + sth[1] * s.n.y);
          Fe -= q.w * (N2.transpose() * (P * tth));
        }
      }
      scatter(trips, Ke, dofs, dofs);
      scatter_rhs(rhs, Fe, dofs);
    }
  }

  const auto meas = interface_measures(im);
  for (const InterfaceSegment& s : im.interfaces()) {
    const MaterialPhase& mm = prob.materials[s.phase_m];
    const MaterialPhase& mn = prob.materials[s.phase_n];
    if (mm.void_phase || mn.void_phase) continue;
    const InterfaceWeighting w =
        segment_weights(im, meas, s, mm.E, mn.E, c_I, prob.wf.inverse_weights);
    const Eigen::Matrix3d Dm = constitutive_matrix(mm, ps);
    const Eigen::Matrix3d Dn = constitutive_matrix(mn, ps);
    const auto sm = enr.cell_dofs(s.ucell_m, s.phase_m, s.comp_m);
    const auto sn = enr.cell_dofs(s.ucell_n, s.phase_n, s.comp_n);
    const std::vector<int> gm = vector_dofs(sm);
    const std::vector<int> gn = vector_dofs(sn);
    const int nm = int(gm.size()), nn = int(gn.size());
    Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(nm + nn, nm + nn);
    Eigen::VectorXd Fe = Eigen::VectorXd::Zero(nm + nn);
    const auto qps = segment_rule(s.a, s.b, face_degree(p));
    std::vector<Vec2> pts(qps.size());
    for (size_t i = 0; i < qps.size(); ++i) pts[i] = qps[i].p;
    Eigen::VectorXd Tm, Tn;
    if (temp.active()) {
      Tm = temp.at(s.ucell_m, s.phase_m, s.comp_m, pts);
      Tn = temp.at(s.ucell_n, s.phase_n, s.comp_n, pts);
    }
    for (size_t i = 0; i < qps.size(); ++i) {
      const QuadPoint& q = qps[i];
      const Eigen::MatrixXd Mm = ex.evaluate(s.ucell_m, q.p, kValGrad);
      const Eigen::MatrixXd Mn = ex.evaluate(s.ucell_n, q.p, kValGrad);
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2, nm + nn);
      J.leftCols(nm) = vector_shapes(Mm.col(0));
      J.rightCols(nn) = -vector_shapes(Mn.col(0));
      Eigen::MatrixXd A(2, nm + nn);
      A.leftCols(nm) = w.wm * traction_matrix(Dm * strain_matrix(Mm), s.normal);
      A.rightCols(nn) = w.wn * traction_matrix(Dn * strain_matrix(Mn), s.normal);
      Ke += q.w * (-J.transpose() * A + A.transpose() * J + w.gamma * J.transpose() * J);
      if (temp.active()) {
        const Eigen::Vector3d sth = w.wm * (Dm * thermal_strain(mm, Tm[i], ps)) +
                                    w.wn * (Dn * thermal_strain(mn, Tn[i], ps));
        const Eigen::Vector2d tth(sth[0] * s.normal.x + sth[2] * s.normal.y,
                                  sth[2] * s.normal.x + sth[1] * s.normal.y);
        Fe -= q.w * (J.transpose() * tth);
      }
    }
    std::vector<int> dofs(gm.begin(), gm.end());
    dofs.insert(dofs.end(), gn.begin(), gn.end());
    scatter(trips, Ke, dofs, dofs);
    scatter_rhs(rhs, Fe, dofs);
  }

  if (prob.wf.ghost) {
    ghost_loop(enr, prob.materials, prob.wf, true,
               [&](const Eigen::MatrixXd& Ke, const std::vector<int>& sdofs) {
                 const int nl = int(sdofs.size());
                 Eigen::MatrixXd Kv = Eigen::MatrixXd::Zero(2 * nl, 2 * nl);
                 for (int i = 0; i < nl; ++i)
                   for (int j = 0; j < nl; ++j)
                     for (int d = 0; d < 2; ++d) Kv(2 * i + d, 2 * j + d) = Ke(i, j);
                 scatter(trips, Kv, vector_dofs(sdofs), vector_dofs(sdofs));
               });
  }

  LinearSystem sys;
  sys.A.resize(n, n);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.b = std::move(rhs);
  return sys;
}

double temperature_at(const Enrichment& enr, const Eigen::VectorXd& T, int ucell, int phase,
                      int comp, const Vec2& p) {
  const std::array<Vec2, 1> pts{p};
  return enr.evaluate(T, ucell, phase, comp, pts, kVal)(0, 0);
}

Eigen::Vector3d stress_at(const ElasticProblem& prob, const Eigen::VectorXd& u, int ucell,
                          int phase, int comp, const Vec2& p) {
  const Enrichment& enr = *prob.enr;
  const MaterialPhase& mat = prob.materials[phase];
  const auto sdofs = enr.cell_dofs(ucell, phase, comp);
  const Eigen::MatrixXd M = enr.extractor().evaluate(ucell, p, kValGrad);
  double u1x = 0, u1y = 0, u2x = 0, u2y = 0;
  for (int r = 0; r < int(sdofs.size()); ++r) {
    const double cx = u[2 * sdofs[r]];
    const double cy = u[2 * sdofs[r] + 1];
    u1x += cx * M(r, 1);
    u1y += cx * M(r, 2);
    u2x += cy * M(r, 1);
    u2y += cy * M(r, 2);
  }
  Eigen::Vector3d eps(u1x, u2y, u1y + u2x);
  if (prob.temperature_enr) {
    const double T = temperature_at(*prob.temperature_enr, *prob.temperature, ucell, phase,
                                    comp, p);
    eps -= thermal_strain(mat, T, prob.wf.plane_strain);
  }
  return constitutive_matrix(mat, prob.wf.plane_strain) * eps;
}

FieldError error_norms(const Enrichment& enr, const Eigen::VectorXd& coeffs, int components,
                       const Reference& ref, int quad_degree) {
  const IntegrationMesh& im = enr.integration();
  if (coeffs.size() != std::int64_t(enr.num_dofs()) * components)
    throw std::invalid_argument("coefficient count does not match the field");
  std::vector<Eigen::VectorXd> cc(components);
  for (int d = 0; d < components; ++d) {
    cc[d].resize(enr.num_dofs());
    for (int i = 0; i < enr.num_dofs(); ++i) cc[d][i] = coeffs[components * i + d];
  }
  FieldError err;
  for (const IntegrationTri& tri : im.tris()) {
    if (im.levelset().is_void(tri.phase)) continue;
    const auto qps = triangle_rule(tri.v, quad_degree);
    std::vector<Vec2> pts(qps.size());
    for (size_t i = 0; i < qps.size(); ++i) pts[i] = qps[i].p;
    for (int d = 0; d < components; ++d) {
      const Eigen::MatrixXd V =
          enr.evaluate(cc[d], tri.ucell, tri.phase, tri.comp, pts, kValGrad);
      for (size_t i = 0; i < qps.size(); ++i) {
        const RefValue rv = ref(RefSite{tri.phase, d, pts[i], tri.ucell, tri.comp});
        const double e = V(i, 0) - rv.v;
        const double gx = V(i, 1) - rv.g.x;
        const double gy = V(i, 2) - rv.g.y;
        err.l2 += qps[i].w * e * e;
        err.h1 += qps[i].w * (gx * gx + gy * gy);
        err.ref_l2 += qps[i].w * rv.v * rv.v;
        err.ref_h1 += qps[i].w * rv.g.dot(rv.g);
      }
    }
  }
  err.l2 = std::sqrt(err.l2);
  err.h1 = std::sqrt(err.h1);
  err.ref_l2 = std::sqrt(err.ref_l2);
  err.ref_h1 = std::sqrt(err.ref_h1);
  return err;
}

}  // namespace xthb
