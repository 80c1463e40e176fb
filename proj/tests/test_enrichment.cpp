#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "xthb/enrichment.hpp"
#include "xthb/extraction.hpp"
#include "xthb/integration_mesh.hpp"
#include "xthb/levelset.hpp"
#include "xthb/polytree.hpp"
#include "xthb/union_mesh.hpp"

using namespace xthb;

namespace {

constexpr std::array<std::array<int, 2>, 1> kVal{{{0, 0}}};
constexpr std::array<std::array<int, 2>, 3> kGrad{{{0, 0}, {1, 0}, {0, 1}}};

Box2 support_box(const HierBasis& basis, int fn) {
  const FnKey f = basis.functions()[fn];
  const Box2 dom = basis.forest().domain();
  const double hx = basis.forest().cell_size(f.level, 0);
  const double hy = basis.forest().cell_size(f.level, 1);
  Box2 b{{dom.lo.x + f.i * hx, dom.lo.y + f.j * hy},
         {dom.lo.x + (f.i + basis.degree()[0] + 1) * hx,
          dom.lo.y + (f.j + basis.degree()[1] + 1) * hy}};
  b.lo.x = std::max(b.lo.x, dom.lo.x);
  b.lo.y = std::max(b.lo.y, dom.lo.y);
  b.hi.x = std::min(b.hi.x, dom.hi.x);
  b.hi.y = std::min(b.hi.y, dom.hi.y);
  return b;
}

// brute-force oracle: rasterize the support, classify pixel centers by phase,
// count 4-connected components of non-void pixels per phase
int pixel_region_count(const LevelSetGeometry& ls, const Box2& supp, int res = 256) {
  std::vector<int> phase(std::size_t(res) * res);
  for (int j = 0; j < res; ++j)
    for (int i = 0; i < res; ++i) {
      const Vec2 p{supp.lo.x + (i + 0.5) / res * supp.extent(0),
                   supp.lo.y + (j + 0.5) / res * supp.extent(1)};
      phase[std::size_t(j) * res + i] = ls.phase_at(p);
    }
  std::vector<char> seen(phase.size(), 0);
  int regions = 0;
  std::vector<int> stack;
  for (std::size_t s = 0; s < phase.size(); ++s) {
    if (seen[s] || ls.is_void(phase[s])) continue;
    ++regions;
    seen[s] = 1;
    stack.push_back(int(s));
    while (!stack.empty()) {
      const int q = stack.back();
      stack.pop_back();
      const int qi = q % res, qj = q / res;
      const int nb[4] = {q - 1, q + 1, q - res, q + res};
      const bool ok[4] = {qi > 0, qi + 1 < res, qj > 0, qj + 1 < res};
      for (int d = 0; d < 4; ++d) {
        if (!ok[d] || seen[nb[d]] || phase[nb[d]] != phase[q]) continue;
        seen[nb[d]] = 1;
        stack.push_back(nb[d]);
      }
    }
  }
  return regions;
}

}  // namespace

TEST_CASE("single uncut phase enriches every function exactly once") {
  PolyTreeForest forest(Box2{{0.0, 0.0}, {1.0, 1.0}}, 4, 4, 1);
  forest.refine(0, std::vector<CellKey>{{0, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 1, 1}}, 2);
  const HierBasis basis = build_truncated(forest, 0, {2, 2});
  const UnionMesh mesh = build_union_mesh(forest);
  const Extractor ex(basis, mesh);
  LevelSetGeometry ls;
  ls.add_phase([](const Vec2&) { return 1.0; });
  const IntegrationMesh im = build_integration_mesh(mesh, ls);
  const Enrichment en(ex, im);

  REQUIRE(en.num_dofs() == basis.n_functions());
  for (int fn = 0; fn < basis.n_functions(); ++fn) {
    CHECK(en.num_levels(fn) == 1);
    CHECK(en.dof(fn, 0) == fn);
    CHECK(en.level_phase(fn, 0) == 0);
  }

  // enriched evaluation reduces to the plain extracted basis
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(en.num_dofs());
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (int c = 0; c < int(mesh.cells().size()); ++c) {
    const Box2 box = mesh.cell_box(c);
    const Vec2 p{box.lo.x + unit(rng) * box.extent(0), box.lo.y + unit(rng) * box.extent(1)};
    const Eigen::MatrixXd v = en.evaluate(ones, c, 0, 0, {{p}}, kGrad);
    CHECK(v(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(v(0, 1)) < 1e-10);
    CHECK(std::abs(v(0, 2)) < 1e-10);
  }
}

TEST_CASE("circular inclusion splits straddling supports into two levels") {
  PolyTreeForest forest(Box2{{0.0, 0.0}, {1.0, 1.0}}, 8, 8, 1);
  const HierBasis basis = build_truncated(forest, 0, {1, 1});
  const UnionMesh mesh = build_union_mesh(forest);
  const Extractor ex(basis, mesh);
  LevelSetGeometry ls;
  ls.add_phase(levelset_negate(levelset_circle(Vec2{0.5, 0.5}, 0.2)));
  ls.add_phase(levelset_circle(Vec2{0.5, 0.5}, 0.2));
  const IntegrationMesh im = build_integration_mesh(mesh, ls);
  const Enrichment en(ex, im);

  int straddling = 0;
  for (int fn = 0; fn < basis.n_functions(); ++fn) {
    const int L = en.num_levels(fn);
    CHECK(L == pixel_region_count(ls, support_box(basis, fn)));
    if (L == 2) ++straddling;
  }
  CHECK(straddling > 0);

  // a support well inside the inclusion sees one region of the inner phase
  const int inner = basis.function_index(FnKey{0, 3, 3});  // support [0.375, 0.625]^2
  REQUIRE(en.num_levels(inner) == 1);
  CHECK(en.level_phase(inner, 0) == 1);

  // dof ordering is (function, level) lexicographic and bijective
  for (int d = 0; d + 1 < en.num_dofs(); ++d) {
    const EnrichedDof &a = en.dofs()[d], &b = en.dofs()[d + 1];
    CHECK((a.fn < b.fn || (a.fn == b.fn && a.level < b.level)));
  }
}

TEST_CASE("two phases in three strips enrich a wide support three times") {
  PolyTreeForest forest(Box2{{0.0, 0.0}, {1.0, 1.0}}, 4, 4, 1);
  const HierBasis basis = build_truncated(forest, 0, {2, 2});
  const UnionMesh mesh = build_union_mesh(forest);
  const Extractor ex(basis, mesh);
  LevelSetGeometry ls;
  ls.add_phase([](const Vec2& p) { return std::max(0.3 - p.x, p.x - 0.7); });
  ls.add_phase([](const Vec2& p) { return std::min(p.x - 0.3, 0.7 - p.x); });
  const IntegrationMesh im = build_integration_mesh(mesh, ls);
  const Enrichment en(ex, im);

  int total = 0;
  for (int fn = 0; fn < basis.n_functions(); ++fn) {
    const int L = en.num_levels(fn);
    CHECK(L == pixel_region_count(ls, support_box(basis, fn)));
    total += L;
  }
  CHECK(en.num_dofs() == total);

  // central function: support x in [0.25, 1.0] covers outer, middle, outer
  const int wide = basis.function_index(FnKey{0, 1, 1});
  REQUIRE(en.num_levels(wide) == 3);
  CHECK(en.level_phase(wide, 0) == 0);
  CHECK(en.level_phase(wide, 1) == 0);
  CHECK(en.level_phase(wide, 2) == 1);
}

TEST_CASE("a void slit separates support regions and carries no unknowns") {
  PolyTreeForest forest(Box2{{0.0, 0.0}, {1.0, 1.0}}, 8, 8, 1);
  const HierBasis basis = build_truncated(forest, 0, {1, 1});
  const UnionMesh mesh = build_union_mesh(forest);
  const Extractor ex(basis, mesh);
  LevelSetGeometry ls;
  const Box2 slit{{0.45, -0.1}, {0.55, 0.6}};
  ls.add_phase(levelset_negate(levelset_box(slit)));
  ls.add_phase(levelset_box(slit), true);  // void
  const IntegrationMesh im = build_integration_mesh(mesh, ls);
  const Enrichment en(ex, im);

  for (const EnrichedDof& d : en.dofs()) CHECK(d.phase == 0);
  for (int fn = 0; fn < basis.n_functions(); ++fn)
    CHECK(en.num_levels(fn) == pixel_region_count(ls, support_box(basis, fn)));

  // the function centered on the slit at mid height sees left + right material
  const int split = basis.function_index(FnKey{0, 3, 2});  // support [0.375,0.625]x[0.25,0.5]
  CHECK(en.num_levels(split) == 2);
  // above the slit the support material is connected around the top
  const int above = basis.function_index(FnKey{0, 3, 5});  // support [0.375,0.625]x[0.625,0.875]
  CHECK(en.num_levels(above) == 1);

  // void evaluation is rejected
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(en.num_dofs());
  int vc = -1, vtri = -1;
  for (int t = 0; t < int(im.tris().size()) && vc < 0; ++t)
    if (im.tris()[t].phase == 1) {
      vc = im.tris()[t].ucell;
      vtri = t;
    }
  REQUIRE(vc >= 0);
  const Vec2 ctr = (1.0 / 3.0) * (im.tris()[vtri].v[0] + im.tris()[vtri].v[1] + im.tris()[vtri].v[2]);
  CHECK_THROWS_AS(en.evaluate(zero, vc, 1, im.tris()[vtri].comp, {{ctr}}, kVal),
                  std::invalid_argument);
}

TEST_CASE("enriched partition of unity holds on cut hierarchical meshes") {
  PolyTreeForest forest(Box2{{0.0, 0.0}, {1.0, 1.0}}, 6, 6, 1);
  std::vector<CellKey> flags;
  for (int j = 2; j <= 3; ++j)
    for (int i = 2; i <= 3; ++i) flags.push_back(CellKey{0, i, j});
  forest.refine(0, flags, 2);
  const HierBasis basis = build_truncated(forest, 0, {2, 2});
  const UnionMesh mesh = build_union_mesh(forest);
  const Extractor ex(basis, mesh);
  LevelSetGeometry ls;
  ls.add_phase(levelset_negate(levelset_circle(Vec2{0.52, 0.49}, 0.23)));
  ls.add_phase(levelset_circle(Vec2{0.52, 0.49}, 0.23));
  const IntegrationMesh im = build_integration_mesh(mesh, ls);
  const Enrichment en(ex, im);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(en.num_dofs());
  for (int t = 0; t < int(im.tris().size()); ++t) {
    const IntegrationTri& tri = im.tris()[t];
    const Vec2 ctr = (1.0 / 3.0) * (tri.v[0] + tri.v[1] + tri.v[2]);
    const Vec2 mid = 0.5 * (ctr + tri.v[0]);
    const Eigen::MatrixXd v =
        en.evaluate(ones, tri.ucell, tri.phase, tri.comp, {{ctr, mid}}, kGrad);
    for (int q = 0; q < 2; ++q) {
      CHECK(v(q, 0) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(v(q, 1)) < 1e-9);
      CHECK(std::abs(v(q, 2)) < 1e-9);
    }
  }
}

TEST_CASE("per-phase linear fields with an interface jump are reproduced") {
  PolyTreeForest forest(Box2{{0.0, 0.0}, {1.0, 1.0}}, 8, 8, 1);
  const HierBasis basis = build_truncated(forest, 0, {1, 1});
  const UnionMesh mesh = build_union_mesh(forest);
  const Extractor ex(basis, mesh);
  LevelSetGeometry ls;
  ls.add_phase(levelset_negate(levelset_circle(Vec2{0.5, 0.5}, 0.27)));
  ls.add_phase(levelset_circle(Vec2{0.5, 0.5}, 0.27));
  const IntegrationMesh im = build_integration_mesh(mesh, ls);
  const Enrichment en(ex, im);

  const auto field = [](int m, const Vec2& p) {
    return m == 0 ? (0.25 + 2.0 * p.x - 1.5 * p.y) : (-3.0 + 0.5 * p.x + 4.0 * p.y);
  };
  // degree-1 B-splines interpolate linears through their Greville points
  Eigen::VectorXd coeffs(en.num_dofs());
  for (int d = 0; d < en.num_dofs(); ++d) {
    const EnrichedDof& ed = en.dofs()[d];
    const FnKey f = basis.functions()[ed.fn];
    const Vec2 node{(f.i + 1) / 8.0, (f.j + 1) / 8.0};
    coeffs[d] = field(ed.phase, node);
  }
  for (int t = 0; t < int(im.tris().size()); ++t) {
    const IntegrationTri& tri = im.tris()[t];
    const Vec2 ctr = (1.0 / 3.0) * (tri.v[0] + tri.v[1] + tri.v[2]);
    const Eigen::MatrixXd v = en.evaluate(coeffs, tri.ucell, tri.phase, tri.comp, {{ctr}}, kVal);
    CHECK(v(0, 0) == doctest::Approx(field(tri.phase, ctr)).epsilon(1e-11));
  }

  // explicit jump: one point just inside and outside the circle along +x
  const Vec2 pin{0.5 + 0.27 - 1e-3, 0.5}, pout{0.5 + 0.27 + 1e-3, 0.5};
  const int cin = mesh.locate(pin), cout_ = mesh.locate(pout);
  int comp_in = -1, comp_out = -1;
  for (int t = im.cell_begin(cin); t < im.cell_end(cin); ++t)
    if (im.tris()[t].phase == 1) comp_in = im.tris()[t].comp;
  for (int t = im.cell_begin(cout_); t < im.cell_end(cout_); ++t)
    if (im.tris()[t].phase == 0) comp_out = im.tris()[t].comp;
  REQUIRE(comp_in >= 0);
  REQUIRE(comp_out >= 0);
  const double vin = en.evaluate(coeffs, cin, 1, comp_in, {{pin}}, kVal)(0, 0);
  const double vout = en.evaluate(coeffs, cout_, 0, comp_out, {{pout}}, kVal)(0, 0);
  CHECK(vin == doctest::Approx(field(1, pin)).epsilon(1e-9));
  CHECK(vout == doctest::Approx(field(0, pout)).epsilon(1e-9));
  CHECK(std::abs(vin - vout) > 0.5);  // genuine C^{-1} jump across the interface
}

TEST_CASE("enrichment construction is deterministic") {
  PolyTreeForest forest(Box2{{0.0, 0.0}, {1.0, 1.0}}, 6, 6, 1);
  const HierBasis basis = build_truncated(forest, 0, {2, 2});
  const UnionMesh mesh = build_union_mesh(forest);
  const Extractor ex(basis, mesh);
  LevelSetGeometry ls;
  ls.add_phase(levelset_negate(levelset_circle(Vec2{0.47, 0.55}, 0.24)));
  ls.add_phase(levelset_circle(Vec2{0.47, 0.55}, 0.24));
  const IntegrationMesh im = build_integration_mesh(mesh, ls);
  const Enrichment a(ex, im), b(ex, im);
  REQUIRE(a.num_dofs() == b.num_dofs());
  for (int d = 0; d < a.num_dofs(); ++d) {
    CHECK(a.dofs()[d].fn == b.dofs()[d].fn);
    CHECK(a.dofs()[d].level == b.dofs()[d].level);
    CHECK(a.dofs()[d].phase == b.dofs()[d].phase);
  }
}
