#include "xthb/extraction.hpp"

#include <cmath>

#include "xthb/lagrange.hpp"

namespace xthb {

Eigen::MatrixXd lagrange_shapes_2d(std::array<int, 2> degree, const Box2& box, const Vec2& p,
                                   std::span<const std::array<int, 2>> derivs) {
  const int px = degree[0], py = degree[1];
  const double u = (p.x - box.lo.x) / box.extent(0);
  const double v = (p.y - box.lo.y) / box.extent(1);
  std::vector<double> lx(px + 1), ly(py + 1);
  Eigen::MatrixXd out((px + 1) * (py + 1), Eigen::Index(derivs.size()));
  for (std::size_t d = 0; d < derivs.size(); ++d) {
    lagrange_basis_1d(px, u, derivs[d][0], lx.data());
    lagrange_basis_1d(py, v, derivs[d][1], ly.data());
    for (int ay = 0; ay <= py; ++ay)
      for (int ax = 0; ax <= px; ++ax) out(ay * (px + 1) + ax, Eigen::Index(d)) = ly[ay] * lx[ax];
  }
  return out;
}

namespace {

Eigen::MatrixXd href_2d(std::array<int, 2> degree, int cx, int cy) {
  const int nx = degree[0] + 1, ny = degree[1] + 1;
  const auto tx = lagrange_href_table_1d(degree[0], cx);
  const auto ty = lagrange_href_table_1d(degree[1], cy);
  Eigen::MatrixXd m(nx * ny, nx * ny);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      for (int jy = 0; jy < ny; ++jy)
        for (int jx = 0; jx < nx; ++jx)
          m(iy * nx + ix, jy * nx + jx) = ty[iy * ny + jy] * tx[ix * nx + jx];
  return m;
}

}  // namespace

Extractor::Extractor(const HierBasis& basis, const UnionMesh& mesh)
    : basis_(&basis), mesh_(&mesh) {
  for (int c = 0; c < 4; ++c) href_[c] = href_2d(basis.degree(), c & 1, c >> 1);
  tables_.resize(mesh.cells().size());
  built_.assign(mesh.cells().size(), 0);
}

const ExtractionTable& Extractor::table(int ucell) const {
  if (built_[ucell]) return tables_[ucell];
  const auto [px, py] = basis_->degree();
  const CellKey target = mesh_->cells()[ucell].key;
  const CellKey field = mesh_->field_cell(basis_->ai(), ucell);
  const int elem = basis_->element_of(field);
  const HierBasis::ElementTable& et = basis_->elements()[elem];

  // nodal values on the field element: evaluate the element table at the
  // tensor Lagrange nodes of the field cell
  const Box2 fbox = basis_->forest().cell_box(field);
  Eigen::MatrixXd nodal(Eigen::Index((px + 1) * (py + 1)), et.rows.rows());
  const auto nx = lagrange_nodes_1d(px);
  const auto ny = lagrange_nodes_1d(py);
  constexpr std::array<std::array<int, 2>, 1> value_only = {{{0, 0}}};
  for (int jy = 0; jy <= py; ++jy)
    for (int jx = 0; jx <= px; ++jx) {
      const Vec2 q{fbox.lo.x + fbox.extent(0) * nx[jx], fbox.lo.y + fbox.extent(1) * ny[jy]};
      nodal.row(jy * (px + 1) + jx) = basis_->evaluate(elem, q, value_only).col(0).transpose();
    }

  // push through the subdivision chain field -> target
  for (int step = target.level - field.level - 1; step >= 0; --step) {
    const int cx = (target.i >> step) & 1;
    const int cy = (target.j >> step) & 1;
    nodal = href_[(cy << 1) | cx] * nodal;
  }

  tables_[ucell] = ExtractionTable{field, et.fn, std::move(nodal)};
  built_[ucell] = 1;
  return tables_[ucell];
}

Eigen::MatrixXd Extractor::evaluate(int ucell, const Vec2& p,
                                    std::span<const std::array<int, 2>> derivs) const {
  const ExtractionTable& t = table(ucell);
  const Box2 box = mesh_->cell_box(ucell);
  const Eigen::MatrixXd shapes = lagrange_shapes_2d(basis_->degree(), box, p, derivs);
  Eigen::MatrixXd out = t.nodal.transpose() * shapes;
  for (std::size_t d = 0; d < derivs.size(); ++d)
    out.col(Eigen::Index(d)) *= std::pow(1.0 / box.extent(0), derivs[d][0]) *
                                std::pow(1.0 / box.extent(1), derivs[d][1]);
  return out;
}

}  // namespace xthb
