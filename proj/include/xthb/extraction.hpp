#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

#include "xthb/thb_basis.hpp"
#include "xthb/union_mesh.hpp"

namespace xthb {

/// Values (or derivatives with respect to the unit coordinates of a box) of
/// the tensor-product Lagrange shapes on that box at a physical point; one
/// column per (kx, ky) pair, rows in y-major node order.
Eigen::MatrixXd lagrange_shapes_2d(std::array<int, 2> degree, const Box2& box, const Vec2& p,
                                   std::span<const std::array<int, 2>> derivs);

/// Lagrange-extracted view of a hierarchical basis on one union cell: the
/// visible functions (those of the owning field element) and their values at
/// the cell's tensor Lagrange nodes. Any visible function restricted to the
/// cell is a polynomial of coordinate degree (px, py), so
///   B_k(x) = sum_j nodal(j, k) L_j(x)
/// holds exactly with the cell's own Lagrange shapes L_j.
struct ExtractionTable {
  CellKey field;              // owning Active forest cell
  std::vector<int> fn;        // visible function ids, ascending
  Eigen::MatrixXd nodal;      // (px+1)(py+1) x fn.size()
};

/// Builds extraction tables against one basis (one AI). Tables are produced
/// per union cell by interpolating the field element tables at the field
/// element's nodes and pushing the nodal values down the subdivision chain
/// with the Lagrange h-refinement tables.
class Extractor {
 public:
  Extractor(const HierBasis& basis, const UnionMesh& mesh);

  const HierBasis& basis() const { return *basis_; }
  const UnionMesh& mesh() const { return *mesh_; }

  const ExtractionTable& table(int ucell) const;

  /// Basis function values at a physical point of a union cell through the
  /// extracted representation; columns follow `derivs` (physical derivatives),
  /// rows follow table(ucell).fn.
  Eigen::MatrixXd evaluate(int ucell, const Vec2& p,
                           std::span<const std::array<int, 2>> derivs) const;

 private:
  const HierBasis* basis_;
  const UnionMesh* mesh_;
  std::array<Eigen::MatrixXd, 4> href_;  // 2D node transfer per child code
  mutable std::vector<ExtractionTable> tables_;
  mutable std::vector<char> built_;
};

}  // namespace xthb
