#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "xthb/assembly.hpp"
#include "xthb/solver.hpp"

using namespace xthb;

namespace {

constexpr std::array<std::array<int, 2>, 1> kVal{{{0, 0}}};
constexpr std::array<std::array<int, 2>, 3> kGrad{{{0, 0}, {1, 0}, {0, 1}}};

/// Everything a solve needs, constructed in dependency order on the stack.
struct Setup {
  PolyTreeForest forest;
  LevelSetGeometry ls;
  HierBasis basis;
  UnionMesh mesh;
  Extractor ex;
  IntegrationMesh im;
  Enrichment enr;

  Setup(const Box2& dom, int nx, int ny, LevelSetGeometry lset, int p,
        std::vector<CellKey> flags = {}, int geom_refine = 0)
      : forest(make_forest(dom, nx, ny, flags, p)),
        ls(std::move(lset)),
        basis(build_truncated(forest, 0, {p, p})),
        mesh(build_union_mesh(forest, geom_refine)),
        ex(basis, mesh),
        im(build_integration_mesh(mesh, ls)),
        enr(ex, im) {}

  static PolyTreeForest make_forest(const Box2& dom, int nx, int ny,
                                    const std::vector<CellKey>& flags, int p) {
    PolyTreeForest f(dom, nx, ny, 1);
    if (!flags.empty()) f.refine(0, flags, p);
    return f;
  }
};

LevelSetGeometry single_phase() {
  LevelSetGeometry ls;
  ls.add_phase([](const Vec2&) { return 1.0; });
  return ls;
}

LevelSetGeometry split_phase(std::function<double(const Vec2&)> phi, bool second_void = false) {
  LevelSetGeometry ls;
  ls.add_phase(levelset_negate(phi));
  ls.add_phase(std::move(phi), second_void);
  return ls;
}

/// Material where phi is positive, void elsewhere.
LevelSetGeometry material_where(std::function<double(const Vec2&)> phi) {
  LevelSetGeometry ls;
  ls.add_phase(phi);
  ls.add_phase(levelset_negate(std::move(phi)), true);
  return ls;
}

std::vector<DirichletBC> all_sides(std::function<double(const Vec2&, int)> g,
                                   bool immersed = false) {
  std::vector<DirichletBC> bcs;
  for (int side = 0; side < 4; ++side) bcs.push_back({side, false, -1, {true, true}, g});
  if (immersed) bcs.push_back({-1, true, -1, {true, true}, g});
  return bcs;
}

Eigen::VectorXd comp_slice(const Eigen::VectorXd& u, int comps, int d) {
  Eigen::VectorXd out(u.size() / comps);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = u[comps * i + d];
  return out;
}

/// Max pointwise error over vertices, edge midpoints and centroid of every
/// material triangle.
double linf_error(const Setup& s, const Eigen::VectorXd& coeffs, int comps, int d,
                  const std::function<double(const Vec2&)>& exact) {
  const Eigen::VectorXd c = comps == 1 ? coeffs : comp_slice(coeffs, comps, d);
  double err = 0.0;
  for (const IntegrationTri& tri : s.im.tris()) {
    if (s.ls.is_void(tri.phase)) continue;
    const std::array<Vec2, 7> pts{
        tri.v[0], tri.v[1], tri.v[2],
        0.5 * (tri.v[0] + tri.v[1]), 0.5 * (tri.v[1] + tri.v[2]),
        0.5 * (tri.v[2] + tri.v[0]),
        (1.0 / 3.0) * (tri.v[0] + tri.v[1] + tri.v[2])};
    const Eigen::MatrixXd v = s.enr.evaluate(c, tri.ucell, tri.phase, tri.comp, pts, kVal);
    for (int q = 0; q < 7; ++q) err = std::max(err, std::abs(v(q, 0) - exact(pts[q])));
  }
  return err;
}

double unsymmetry(const Eigen::SparseMatrix<double>& A) {
  return (Eigen::MatrixXd(A) - Eigen::MatrixXd(A).transpose()).cwiseAbs().maxCoeff();
}

/// Marsden coefficients of x^p (or y^p) for the truncated hierarchical basis:
/// the coefficient of a level-l function with 1D index i is the product of
/// its p interior knots, times the partition-of-unity factor of the other
/// direction.
Eigen::VectorXd marsden_power(const Setup& s, int dir) {
  const int p = s.basis.degree()[dir];
  Eigen::VectorXd c(s.enr.num_dofs());
  for (int dof = 0; dof < s.enr.num_dofs(); ++dof) {
    const EnrichedDof& ed = s.enr.dofs()[dof];
    const FnKey f = s.basis.functions()[ed.fn];
    const double h = s.forest.cell_size(f.level, dir);
    const double lo = s.forest.domain().lo[dir];
    const int idx = dir == 0 ? f.i : f.j;
    double v = 1.0;
    for (int k = 1; k <= p; ++k) v *= lo + (idx + k) * h;
    c[dof] = v;
  }
  return c;
}

}  // namespace

TEST_CASE("interface weighting follows the measure-over-stiffness convention") {
  const InterfaceWeighting eq = interface_weighting(0.4, 2.0, 0.4, 2.0, 0.3, 8.0, false);
  CHECK(eq.wm == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(eq.wn == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(eq.gamma == doctest::Approx(2.0 * 8.0 * 0.3 / 0.4).epsilon(1e-14));

  // measures 3:1 at equal stiffness weight the larger side three to one
  const InterfaceWeighting skew = interface_weighting(0.3, 1.0, 0.1, 1.0, 0.2, 4.0, false);
  CHECK(skew.wm == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(skew.wn == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(skew.gamma == doctest::Approx(2.0 * 4.0 * 0.2 / 0.4).epsilon(1e-14));

  // the inverse convention flips the weights, not the penalty
  const InterfaceWeighting inv = interface_weighting(0.3, 1.0, 0.1, 1.0, 0.2, 4.0, true);
  CHECK(inv.wm == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(inv.wn == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(inv.gamma == doctest::Approx(skew.gamma).epsilon(1e-14));

  // stiffer material with the same measure takes more of the average
  const InterfaceWeighting stiff = interface_weighting(0.2, 4.0, 0.2, 1.0, 0.1, 2.0, false);
  CHECK(stiff.wm == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(stiff.wn == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("dof layout concatenates field blocks") {
  const std::array<int, 3> sizes{5, 12, 3};
  const DofLayout l = layout_dofs(sizes);
  REQUIRE(l.offset.size() == 3);
  CHECK(l.offset[0] == 0);
  CHECK(l.offset[1] == 5);
  CHECK(l.offset[2] == 17);
  CHECK(l.total == 20);
}

TEST_CASE("thermal patch test on a hierarchical mesh") {
  auto exact = [](const Vec2& p) { return p.x * p.x + 3.0 * p.x * p.y + p.y * p.y + p.x - 2.0 * p.y + 1.0; };
  Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, 4, 4, single_phase(), 2,
          {{0, 1, 1}, {0, 2, 1}, {0, 1, 2}, {0, 2, 2}});
  ThermalProblem prob;
  prob.enr = &s.enr;
  prob.materials = {MaterialPhase{1.0, 0.0, 2.3, 0.0, 0.0, false}};
  prob.dirichlet = all_sides([&](const Vec2& p, int) { return exact(p); });
  prob.source = [&](const Vec2&) { return -2.3 * 4.0; };  // -kappa * laplacian

  SUBCASE("default penalty") {
    const LinearSystem sys = assemble_thermal(prob);
    CHECK(unsymmetry(sys.A) > 1e-3);  // Nitsche adjoint term breaks symmetry
    const Eigen::VectorXd T = solve_direct(sys);
    CHECK(linf_error(s, T, 1, 0, exact) < 1e-10);
  }
  SUBCASE("penalty-free variant") {
    prob.wf.c_D = 0.0;
    const Eigen::VectorXd T = solve_direct(assemble_thermal(prob));
    CHECK(linf_error(s, T, 1, 0, exact) < 1e-10);
  }
}

TEST_CASE("assembly is deterministic") {
  Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, 4, 4, split_phase(levelset_circle({0.5, 0.5}, 0.3)), 2);
  ThermalProblem prob;
  prob.enr = &s.enr;
  prob.materials = {MaterialPhase{1.0, 0.0, 1.0}, MaterialPhase{1.0, 0.0, 4.0}};
  prob.dirichlet = all_sides([](const Vec2& p, int) { return p.x; });
  const LinearSystem a = assemble_thermal(prob);
  const LinearSystem b = assemble_thermal(prob);
  CHECK((Eigen::MatrixXd(a.A) - Eigen::MatrixXd(b.A)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.b - b.b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("thermal patch test on a cut domain with an immersed boundary") {
  auto exact = [](const Vec2& p) { return p.x * p.x - p.y * p.y + 2.0 * p.x * p.y - p.x + 0.5; };
  Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, 8, 8, split_phase(levelset_circle({0.5, 0.5}, 0.23), true),
          2);
  REQUIRE(!s.im.ghost_facets().empty());
  ThermalProblem prob;
  prob.enr = &s.enr;
  prob.materials = {MaterialPhase{1.0, 0.0, 1.9, 0.0, 0.0, false},
                    MaterialPhase{1.0, 0.0, 1.0, 0.0, 0.0, true}};
  prob.dirichlet = all_sides([&](const Vec2& p, int) { return exact(p); }, true);
  const Eigen::VectorXd T = solve_direct(assemble_thermal(prob));
  CHECK(linf_error(s, T, 1, 0, exact) < 1e-10);
}

TEST_CASE("thermal flux boundary reproduces a linear profile") {
  Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, 6, 6, single_phase(), 1);
  const double kappa = 1.4;
  ThermalProblem prob;
  prob.enr = &s.enr;
  prob.materials = {MaterialPhase{1.0, 0.0, kappa}};
  prob.dirichlet = {{0, false, -1, {true, true}, [](const Vec2&, int) { return 0.0; }}};
  prob.neumann = {{1, false, -1, [&](const Vec2&, int) { return kappa * 0.7; }}};
  const Eigen::VectorXd T = solve_direct(assemble_thermal(prob));
  CHECK(linf_error(s, T, 1, 0, [](const Vec2& p) { return 0.7 * p.x; }) < 1e-10);
}

TEST_CASE("dirichlet penalty scales with the inverse background edge") {
  const double kappa = 1.7, c_D = 5.0;
  auto penalty_energy = [&](int n) {
    Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, n, n, single_phase(), 1);
    ThermalProblem prob;
    prob.enr = &s.enr;
    prob.materials = {MaterialPhase{1.0, 0.0, kappa}};
    prob.dirichlet = {{0, false, -1, {true, true}, [](const Vec2&, int) { return 0.0; }}};
    prob.wf.c_D = c_D;
    const Eigen::SparseMatrix<double> with = assemble_thermal(prob).A;
    prob.wf.c_D = 0.0;
    const Eigen::SparseMatrix<double> without = assemble_thermal(prob).A;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(with.rows());
    return ones.dot((with - without) * ones);  // gamma * side length by partition of unity
  };
  CHECK(penalty_energy(4) == doctest::Approx(c_D * kappa * 4.0).epsilon(1e-12));
  CHECK(penalty_energy(8) == doctest::Approx(c_D * kappa * 8.0).epsilon(1e-12));
}

TEST_CASE("elastic patch test with a linear field and constant stress") {
  auto ux = [](const Vec2& p) { return 0.1 + 0.3 * p.x + 0.2 * p.y; };
  auto uy = [](const Vec2& p) { return -0.2 + 0.1 * p.x - 0.4 * p.y; };
  Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, 4, 4, single_phase(), 1);
  ElasticProblem prob;
  prob.enr = &s.enr;
  prob.materials = {MaterialPhase{7.0, 0.3, 1.0}};
  prob.dirichlet = all_sides([&](const Vec2& p, int d) { return d == 0 ? ux(p) : uy(p); });
  const LinearSystem sys = assemble_elastic(prob);
  CHECK(unsymmetry(sys.A) > 1e-3);
  const Eigen::VectorXd u = solve_direct(sys);
  CHECK(linf_error(s, u, 2, 0, ux) < 1e-10);
  CHECK(linf_error(s, u, 2, 1, uy) < 1e-10);

  const Eigen::Vector3d sig_exact =
      constitutive_matrix(prob.materials[0], false) * Eigen::Vector3d(0.3, -0.4, 0.2 + 0.1);
  for (const IntegrationTri& tri : s.im.tris()) {
    const Vec2 c = (1.0 / 3.0) * (tri.v[0] + tri.v[1] + tri.v[2]);
    const Eigen::Vector3d sig = stress_at(prob, u, tri.ucell, tri.phase, tri.comp, c);
    CHECK((sig - sig_exact).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("elastic patch test with body load on a cut domain") {
  const double E = 3.0, nu = 0.25, C = E / (1.0 - nu * nu);
  auto ux = [](const Vec2& p) { return p.x * p.x; };
  auto uy = [](const Vec2& p) { return p.x * p.y; };
  Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, 8, 8, split_phase(levelset_circle({0.5, 0.5}, 0.23), true),
          2);
  ElasticProblem prob;
  prob.enr = &s.enr;
  prob.materials = {MaterialPhase{E, nu, 1.0, 0.0, 0.0, false},
                    MaterialPhase{1.0, 0.0, 1.0, 0.0, 0.0, true}};
  prob.dirichlet = all_sides([&](const Vec2& p, int d) { return d == 0 ? ux(p) : uy(p); }, true);
  prob.body = [&](const Vec2&) { return Vec2{-C * (2.0 + nu + (1.0 - nu) / 2.0), 0.0}; };
  const Eigen::VectorXd u = solve_direct(assemble_elastic(prob));
  CHECK(linf_error(s, u, 2, 0, ux) < 1e-10);
  CHECK(linf_error(s, u, 2, 1, uy) < 1e-10);
}

TEST_CASE("component masks constrain only the selected directions") {
  // symmetry conditions left and bottom, full data right and top
  auto ux = [](const Vec2& p) { return 0.3 * p.x; };
  auto uy = [](const Vec2& p) { return -0.4 * p.y; };
  auto g = [&](const Vec2& p, int d) { return d == 0 ? ux(p) : uy(p); };
  Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, 4, 4, single_phase(), 1);
  ElasticProblem prob;
  prob.enr = &s.enr;
  prob.materials = {MaterialPhase{2.0, 0.2, 1.0}};
  prob.dirichlet = {{0, false, -1, {true, false}, g},
                    {2, false, -1, {false, true}, g},
                    {1, false, -1, {true, true}, g},
                    {3, false, -1, {true, true}, g}};
  const Eigen::VectorXd u = solve_direct(assemble_elastic(prob));
  CHECK(linf_error(s, u, 2, 0, ux) < 1e-10);
  CHECK(linf_error(s, u, 2, 1, uy) < 1e-10);
}

TEST_CASE("identical materials across an inclined interface match the uncut solution") {
  auto exact = [](const Vec2& p) { return p.x * p.x + 0.5 * p.x * p.y - p.y + 2.0; };
  auto bcs = all_sides([&](const Vec2& p, int) { return exact(p); });
  const MaterialPhase mat{1.0, 0.0, 3.1};
  auto solve_T = [&](LevelSetGeometry lset, int phases) {
    auto s = std::make_unique<Setup>(Box2{{0.0, 0.0}, {1.0, 1.0}}, 6, 6, std::move(lset), 2);
    ThermalProblem prob;
    prob.enr = &s->enr;
    prob.materials.assign(phases, mat);
    prob.dirichlet = bcs;
    prob.source = [&](const Vec2&) { return -mat.kappa * 2.0; };
    return std::pair(std::move(s), solve_direct(assemble_thermal(prob)));
  };
  auto [s1, T1] = solve_T(single_phase(), 1);
  auto [s2, T2] = solve_T(split_phase(levelset_halfplane({0.45, 0.5}, 1.2)), 2);
  REQUIRE(!s2->im.interfaces().empty());
  CHECK(linf_error(*s1, T1, 1, 0, exact) < 1e-8);
  CHECK(linf_error(*s2, T2, 1, 0, exact) < 1e-8);

  auto lux = [](const Vec2& p) { return 0.2 * p.x + 0.7 * p.y; };
  auto luy = [](const Vec2& p) { return 0.5 * p.x - 0.3 * p.y; };
  auto s3 = std::make_unique<Setup>(Box2{{0.0, 0.0}, {1.0, 1.0}}, 6, 6,
                                    split_phase(levelset_halfplane({0.45, 0.5}, 1.2)), 2);
  ElasticProblem ep;
  ep.enr = &s3->enr;
  ep.materials = {MaterialPhase{2.0, 0.3, 1.0}, MaterialPhase{2.0, 0.3, 1.0}};
  ep.dirichlet = all_sides([&](const Vec2& p, int d) { return d == 0 ? lux(p) : luy(p); });
  const Eigen::VectorXd u = solve_direct(assemble_elastic(ep));
  CHECK(linf_error(*s3, u, 2, 0, lux) < 1e-8);
  CHECK(linf_error(*s3, u, 2, 1, luy) < 1e-8);
}

TEST_CASE("ghost penalty matches the hand value for two linear elements") {
  // two cells of edge 1/2, the right one cut by a void sliver; the jump of
  // the normal derivative across the shared facet weights the three x-line
  // functions by (2, -4, 2)
  const double kappa = 3.0;
  Setup s(Box2{{0.0, 0.0}, {1.0, 0.5}}, 2, 1,
          material_where(levelset_halfplane({0.95, 0.0}, M_PI / 2)), 1);
  ThermalProblem prob;
  prob.enr = &s.enr;
  prob.materials = {MaterialPhase{1.0, 0.0, kappa, 0.0, 0.0, false},
                    MaterialPhase{1.0, 0.0, 1.0, 0.0, 0.0, true}};
  prob.dirichlet = {{0, false, -1, {true, true}, [](const Vec2&, int) { return 0.0; }}};
  const Eigen::SparseMatrix<double> with = assemble_thermal(prob).A;
  prob.wf.ghost = false;
  const Eigen::MatrixXd G = Eigen::MatrixXd(with) - Eigen::MatrixXd(assemble_thermal(prob).A);

  REQUIRE(s.im.ghost_facets().size() == 1);
  REQUIRE(s.enr.num_dofs() == 6);
  const double jump[3] = {2.0, -4.0, 2.0};
  const double mass[2][2] = {{0.5 / 3.0, 0.5 / 6.0}, {0.5 / 6.0, 0.5 / 3.0}};
  const double scale = 0.001 * kappa * 0.5;  // gamma_G * kappa * h^(2(p-1)+1)
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 0; ++j)
      for (int i2 = -1; i2 <= 1; ++i2)
        for (int j2 = -1; j2 <= 0; ++j2) {
          const int a = s.basis.function_index(FnKey{0, i, j});
          const int b = s.basis.function_index(FnKey{0, i2, j2});
          const double want = scale * jump[i + 1] * jump[i2 + 1] * mass[j + 1][j2 + 1];
          CHECK(G(a, b) == doctest::Approx(want).epsilon(1e-13).scale(1.0));
        }
}

TEST_CASE("ghost penalty is invariant under geometric scaling") {
  // correct exponent 2(p-1)+1 makes the ghost matrix scale-free in 2D
  auto ghost_matrix = [](double size) {
    Setup s(Box2{{0.0, 0.0}, {size, size}}, 3, 3, split_phase(levelset_circle({0.52 * size, 0.49 * size}, 0.3 * size), true),
            2);
    ThermalProblem prob;
    prob.enr = &s.enr;
    prob.materials = {MaterialPhase{1.0, 0.0, 1.8, 0.0, 0.0, false},
                      MaterialPhase{1.0, 0.0, 1.0, 0.0, 0.0, true}};
    prob.dirichlet = all_sides([](const Vec2&, int) { return 0.0; });
    const Eigen::SparseMatrix<double> with = assemble_thermal(prob).A;
    prob.wf.ghost = false;
    return Eigen::MatrixXd(Eigen::MatrixXd(with) - Eigen::MatrixXd(assemble_thermal(prob).A));
  };
  const Eigen::MatrixXd g1 = ghost_matrix(1.0);
  const Eigen::MatrixXd g2 = ghost_matrix(2.0);
  REQUIRE(g1.cwiseAbs().maxCoeff() > 0.0);
  CHECK((g1 - g2).cwiseAbs().maxCoeff() < 1e-12 * g1.cwiseAbs().maxCoeff());
}

TEST_CASE("ghost energy vanishes on global polynomials") {
  for (const int p : {1, 2, 3}) {
    CAPTURE(p);
    std::vector<CellKey> flags;
    if (p == 2)
      flags = {{0, 3, 3}, {0, 4, 3}, {0, 3, 4}, {0, 4, 4}};
    Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, 8, 8,
            split_phase(levelset_circle({0.52, 0.49}, 0.23), true), p, flags);
    REQUIRE(!s.im.ghost_facets().empty());

    // coefficients of x^p through the knot products of each function's level
    const Eigen::VectorXd c = marsden_power(s, 0);
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 40;) {
      const Vec2 q{unit(rng), unit(rng)};
      if (s.ls.phase_at(q) != 0) continue;
      ++trial;
      const int uc = s.mesh.locate(q);
      if (s.im.is_cut(uc)) continue;  // component lookup is trivial only off the cut
      const Eigen::MatrixXd v = s.enr.evaluate(c, uc, 0, 0, {{q}}, kVal);
      REQUIRE(v(0, 0) == doctest::Approx(std::pow(q.x, p)).epsilon(1e-9));
    }

    ThermalProblem prob;
    prob.enr = &s.enr;
    prob.materials = {MaterialPhase{1.0, 0.0, 1.0, 0.0, 0.0, false},
                      MaterialPhase{1.0, 0.0, 1.0, 0.0, 0.0, true}};
    prob.dirichlet = all_sides([](const Vec2&, int) { return 0.0; });
    const Eigen::SparseMatrix<double> with = assemble_thermal(prob).A;
    prob.wf.ghost = false;
    const Eigen::SparseMatrix<double> without = assemble_thermal(prob).A;
    const double energy = c.dot((with - without) * c);
    CHECK(std::abs(energy) < 1e-12 * std::max(1.0, c.squaredNorm()));
  }
}

TEST_CASE("ghost stabilization bounds the sliver conditioning") {
  // material left of a line just right of a mesh line; the sliver width
  // shrinks by orders of magnitude without changing the dof count
  auto condition = [](double delta, bool ghost) {
    Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, 10, 10,
            material_where(levelset_halfplane({0.5 + delta * 0.1, 0.0}, M_PI / 2)), 2);
    ThermalProblem prob;
    prob.enr = &s.enr;
    prob.materials = {MaterialPhase{1.0, 0.0, 1.0, 0.0, 0.0, false},
                      MaterialPhase{1.0, 0.0, 1.0, 0.0, 0.0, true}};
    prob.dirichlet = {{0, false, -1, {true, true}, [](const Vec2&, int) { return 0.0; }}};
    prob.wf.ghost = ghost;
    return estimate_condition(assemble_thermal(prob).A);
  };
  const double deltas[3] = {1e-2, 1e-4, 1e-6};
  double stab_min = 1e300, stab_max = 0.0;
  for (const double d : deltas) {
    const double c = condition(d, true);
    stab_min = std::min(stab_min, c);
    stab_max = std::max(stab_max, c);
  }
  CHECK(stab_max / stab_min < 10.0);
  CHECK(condition(1e-6, false) / condition(1e-2, false) >= 1e3);
}

TEST_CASE("uniform heating of identical phases expands stress-free") {
  const double alpha = 1e-4, dT = 30.0;
  const MaterialPhase mat{2.0, 0.3, 1.5, alpha, 0.0, false};
  Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, 8, 8, split_phase(levelset_circle({0.52, 0.5}, 0.2)), 1);
  REQUIRE(!s.im.interfaces().empty());

  ThermalProblem tp;
  tp.enr = &s.enr;
  tp.materials = {mat, mat};
  tp.dirichlet = all_sides([&](const Vec2&, int) { return dT; });
  const Eigen::VectorXd T = solve_direct(assemble_thermal(tp));
  CHECK(linf_error(s, T, 1, 0, [&](const Vec2&) { return dT; }) < 1e-10);

  ElasticProblem ep;
  ep.enr = &s.enr;
  ep.materials = {mat, mat};
  ep.dirichlet = all_sides([&](const Vec2& p, int d) { return alpha * dT * (d == 0 ? p.x : p.y); });
  ep.temperature_enr = &s.enr;
  ep.temperature = &T;
  const Eigen::VectorXd u = solve_direct(assemble_elastic(ep));
  CHECK(linf_error(s, u, 2, 0, [&](const Vec2& p) { return alpha * dT * p.x; }) < 1e-9);
  CHECK(linf_error(s, u, 2, 1, [&](const Vec2& p) { return alpha * dT * p.y; }) < 1e-9);
  for (const IntegrationTri& tri : s.im.tris()) {
    const Vec2 c = (1.0 / 3.0) * (tri.v[0] + tri.v[1] + tri.v[2]);
    const Eigen::Vector3d sig = stress_at(ep, u, tri.ucell, tri.phase, tri.comp, c);
    CHECK(sig.cwiseAbs().maxCoeff() < 1e-8 * mat.E);
  }
}

TEST_CASE("error norms integrate against the reference") {
  Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, 4, 4, single_phase(), 1);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(s.enr.num_dofs());
  const Reference ref = [](const RefSite& s) { return RefValue{s.p.x, {1.0, 0.0}}; };
  const FieldError e = error_norms(s.enr, zero, 1, ref, 4);
  CHECK(e.l2 == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(e.h1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.ref_l2 == doctest::Approx(e.l2).epsilon(1e-14));
  CHECK(e.ref_h1 == doctest::Approx(e.h1).epsilon(1e-14));

  const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2 * s.enr.num_dofs());
  const Reference ref2 = [](const RefSite& s) {
    return s.comp == 0 ? RefValue{s.p.x, {1.0, 0.0}} : RefValue{s.p.y, {0.0, 1.0}};
  };
  const FieldError e2 = error_norms(s.enr, zero2, 2, ref2, 4);
  CHECK(e2.l2 == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(e2.h1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("mismatched material lists are rejected") {
  Setup s(Box2{{0.0, 0.0}, {1.0, 1.0}}, 2, 2, single_phase(), 1);
  ThermalProblem prob;
  prob.enr = &s.enr;
  prob.dirichlet = all_sides([](const Vec2&, int) { return 0.0; });
  prob.materials = {};
  CHECK_THROWS_AS(assemble_thermal(prob), std::invalid_argument);
  prob.materials = {MaterialPhase{-1.0, 0.0, 1.0}};
  CHECK_THROWS_AS(assemble_thermal(prob), std::invalid_argument);
  prob.materials = {MaterialPhase{1.0, 0.0, 1.0, 0.0, 0.0, true}};
  CHECK_THROWS_AS(assemble_thermal(prob), std::invalid_argument);
  prob.materials = {MaterialPhase{1.0, 0.0, 1.0}};
  prob.dirichlet[0].phase = 2;
  CHECK_THROWS_AS(assemble_thermal(prob), std::invalid_argument);
}
