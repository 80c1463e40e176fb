#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <unordered_map>
#include <vector>

#include "xthb/polytree.hpp"

namespace xthb {

/// Basis function address: refinement level plus the lattice index of the
/// lower-left cell of its support. Indices range over [-p, n * 2^level - 1]
/// per direction (the grid extends p cells beyond the domain so no function
/// is clamped).
struct FnKey {
  int level = 0;
  int i = 0;
  int j = 0;

  friend bool operator==(const FnKey&, const FnKey&) = default;
};

struct FnKeyLess {
  bool operator()(const FnKey& a, const FnKey& b) const {
    if (a.level != b.level) return a.level < b.level;
    if (a.j != b.j) return a.j < b.j;
    return a.i < b.i;
  }
};

/// Hierarchical (or truncated hierarchical) B-spline basis for one AI of a
/// forest. A level-l function is active when every in-domain cell of its
/// support is Active or Refined and at least one is Active. On every Active
/// cell of the AI the visible functions are stored as coefficient rows over
/// the (px+1)*(py+1) same-level lattice B-splines restricted to that cell;
/// for the truncated variant the rows have the coefficients of finer-level
/// functions whose support lies in the refined region zeroed out level by
/// level. The active function set and ids are identical for both variants.
class HierBasis {
 public:
  struct ElementTable {
    CellKey cell;
    std::vector<int> fn;    // visible function ids, ascending
    Eigen::MatrixXd rows;   // fn.size() x (px+1)*(py+1), local lex order (y-major)
  };

  const PolyTreeForest& forest() const { return *forest_; }
  int ai() const { return ai_; }
  std::array<int, 2> degree() const { return degree_; }
  bool truncated() const { return truncated_; }

  int n_functions() const { return int(functions_.size()); }
  const std::vector<FnKey>& functions() const { return functions_; }
  int function_index(const FnKey& f) const;

  const std::vector<ElementTable>& elements() const { return elements_; }
  int element_of(const CellKey& c) const;
  int element_containing(const Vec2& p) const;

  /// Values of all visible functions on an element at a physical point, one
  /// column per requested derivative pair (kx, ky) (derivatives in physical
  /// coordinates). Rows follow elements()[elem].fn.
  Eigen::MatrixXd evaluate(int elem, const Vec2& p,
                           std::span<const std::array<int, 2>> derivs) const;

  /// Shortest edge over the active cells.
  double h_min() const;

  friend HierBasis build_basis_impl(const PolyTreeForest&, int, std::array<int, 2>, bool);

 private:
  const PolyTreeForest* forest_ = nullptr;
  int ai_ = 0;
  std::array<int, 2> degree_{1, 1};
  bool truncated_ = false;
  std::vector<FnKey> functions_;
  std::unordered_map<std::uint64_t, int> fn_index_;
  std::vector<ElementTable> elements_;
  std::unordered_map<std::uint64_t, int> elem_index_;
};

/// Hierarchical basis (no truncation). Requires buffer regularity of the
/// forest for b >= max(degree); throws std::runtime_error otherwise.
HierBasis build_hierarchical(const PolyTreeForest& forest, int ai, std::array<int, 2> degree);

/// Truncated hierarchical basis: same active set, partition of unity restored.
HierBasis build_truncated(const PolyTreeForest& forest, int ai, std::array<int, 2> degree);

}  // namespace xthb
