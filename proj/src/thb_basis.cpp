#include "xthb/thb_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "xthb/bspline.hpp"

namespace xthb {

namespace {

std::uint64_t pack_fn(const FnKey& f) {
  return (std::uint64_t(f.level) << 52) | (std::uint64_t(std::uint32_t(f.i + 8)) << 26) |
         std::uint64_t(std::uint32_t(f.j + 8));
}

std::uint64_t pack_cell(const CellKey& c) {
  return (std::uint64_t(c.level) << 52) | (std::uint64_t(std::uint32_t(c.i)) << 26) |
         std::uint64_t(std::uint32_t(c.j));
}

// Tensor-product two-level transfer for one child cell: square matrix of size
// (px+1)(py+1) mapping parent-local coefficient rows to child-local ones,
// row'_b = sum_a row_a M(a, b). Local indices are y-major.
Eigen::MatrixXd transfer_2d(std::array<int, 2> degree, int cx, int cy) {
  const int nx = degree[0] + 1, ny = degree[1] + 1;
  const auto mx = subdivision_transfer_1d(degree[0], cx);
  const auto my = subdivision_transfer_1d(degree[1], cy);
  Eigen::MatrixXd m(nx * ny, nx * ny);
  for (int ay = 0; ay < ny; ++ay)
    for (int ax = 0; ax < nx; ++ax)
      for (int by = 0; by < ny; ++by)
        for (int bx = 0; bx < nx; ++bx)
          m(ay * nx + ax, by * nx + bx) = my[ay * ny + by] * mx[ax * nx + bx];
  return m;
}

struct Builder {
  const PolyTreeForest& forest;
  int ai;
  std::array<int, 2> degree;
  bool truncated;
  std::vector<FnKey>& functions;
  std::unordered_map<std::uint64_t, int>& fn_index;
  std::vector<HierBasis::ElementTable>& elements;
  std::unordered_map<std::uint64_t, int>& elem_index;
  std::unordered_map<std::uint64_t, bool> trunc_memo;
  std::array<Eigen::MatrixXd, 4> transfer;  // child (cy << 1) | cx

  int fn_id(const FnKey& f) const {
    auto it = fn_index.find(pack_fn(f));
    return it == fn_index.end() ? -1 : it->second;
  }

  // Every in-domain support cell of f exists with state Active or Refined;
  // reports whether at least one is Active.
  bool support_covered(const FnKey& f, bool& has_active) const {
    has_active = false;
    const int n_i = forest.base_cells(0) << f.level;
    const int n_j = forest.base_cells(1) << f.level;
    for (int dj = 0; dj <= degree[1]; ++dj)
      for (int di = 0; di <= degree[0]; ++di) {
        const CellKey c{f.level, f.i + di, f.j + dj};
        if (c.i < 0 || c.j < 0 || c.i >= n_i || c.j >= n_j) continue;
        if (!forest.exists(c)) return false;
        const CellState s = forest.state(ai, c);
        if (s == CellState::Inactive) return false;
        if (s == CellState::Active) has_active = true;
      }
    return true;
  }

  // supp(g), restricted to the domain, lies in the refined region of g's
  // level: every in-domain support cell exists with state Active or Refined.
  bool support_in_level_domain(const FnKey& g) {
    auto it = trunc_memo.find(pack_fn(g));
    if (it != trunc_memo.end()) return it->second;
    bool r = true;
    const int n_i = forest.base_cells(0) << g.level;
    const int n_j = forest.base_cells(1) << g.level;
    for (int dj = 0; dj <= degree[1] && r; ++dj)
      for (int di = 0; di <= degree[0] && r; ++di) {
        const CellKey c{g.level, g.i + di, g.j + dj};
        if (c.i < 0 || c.j < 0 || c.i >= n_i || c.j >= n_j) continue;
        if (!forest.exists(c) || forest.state(ai, c) == CellState::Inactive) r = false;
      }
    trunc_memo.emplace(pack_fn(g), r);
    return r;
  }

  void collect_active_functions() {
    std::set<FnKey, FnKeyLess> fns;
    for (const CellKey& c : forest.active_cells(ai))
      for (int dj = 0; dj <= degree[1]; ++dj)
        for (int di = 0; di <= degree[0]; ++di) {
          const FnKey f{c.level, c.i - di, c.j - dj};
          bool has_active = false;
          if (support_covered(f, has_active) && has_active) fns.insert(f);
        }
    functions.assign(fns.begin(), fns.end());
    for (int k = 0; k < int(functions.size()); ++k) fn_index.emplace(pack_fn(functions[k]), k);
  }

  void emit_element(const CellKey& cell, const std::vector<int>& fn,
                    const Eigen::MatrixXd& rows) {
    std::vector<int> order(fn.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fn[a] < fn[b]; });
    HierBasis::ElementTable et;
    et.cell = cell;
    for (int r : order)
      if (rows.row(r).maxCoeff() > 0.0) et.fn.push_back(fn[r]);  // coefficients >= 0
    et.rows.resize(int(et.fn.size()), rows.cols());
    int k = 0;
    for (int r : order)
      if (rows.row(r).maxCoeff() > 0.0) et.rows.row(k++) = rows.row(r);
    elem_index.emplace(pack_cell(cell), int(elements.size()));
    elements.push_back(std::move(et));
  }

  void descend(const CellKey& cell, std::vector<int>&& fn, Eigen::MatrixXd&& rows) {
    const CellState s = forest.state(ai, cell);
    if (s == CellState::Active) {
      emit_element(cell, fn, rows);
      return;
    }
    if (s != CellState::Refined) return;

    const int px = degree[0], py = degree[1];
    const int child_level = cell.level + 1;
    for (int cy = 0; cy <= 1; ++cy)
      for (int cx = 0; cx <= 1; ++cx) {
        const CellKey ch{child_level, 2 * cell.i + cx, 2 * cell.j + cy};
        Eigen::MatrixXd crows = rows * transfer[(cy << 1) | cx];
        std::vector<int> cfn = fn;
        if (truncated)
          for (int by = 0; by <= py; ++by)
            for (int bx = 0; bx <= px; ++bx) {
              const FnKey g{child_level, ch.i - px + bx, ch.j - py + by};
              if (support_in_level_domain(g)) crows.col(by * (px + 1) + bx).setZero();
            }
        // unit rows for the active child-level lattice functions
        for (int by = 0; by <= py; ++by)
          for (int bx = 0; bx <= px; ++bx) {
            const FnKey g{child_level, ch.i - px + bx, ch.j - py + by};
            const int id = fn_id(g);
            if (id < 0) continue;
            cfn.push_back(id);
            crows.conservativeResize(crows.rows() + 1, Eigen::NoChange);
            crows.row(crows.rows() - 1).setZero();
            crows(crows.rows() - 1, by * (px + 1) + bx) = 1.0;
          }
        descend(ch, std::move(cfn), std::move(crows));
      }
  }

  void run() {
    const std::string err = forest.check_buffer_regularity(ai, std::max(degree[0], degree[1]));
    if (!err.empty()) throw std::runtime_error("build basis: " + err);

    for (int c = 0; c < 4; ++c) transfer[c] = transfer_2d(degree, c & 1, c >> 1);
    collect_active_functions();

    const int px = degree[0], py = degree[1];
    for (int j = 0; j < forest.base_cells(1); ++j)
      for (int i = 0; i < forest.base_cells(0); ++i) {
        std::vector<int> fn;
        Eigen::MatrixXd rows(0, (px + 1) * (py + 1));
        for (int by = 0; by <= py; ++by)
          for (int bx = 0; bx <= px; ++bx) {
            const int id = fn_id(FnKey{0, i - px + bx, j - py + by});
            if (id < 0) continue;
            fn.push_back(id);
            rows.conservativeResize(rows.rows() + 1, Eigen::NoChange);
            rows.row(rows.rows() - 1).setZero();
            rows(rows.rows() - 1, by * (px + 1) + bx) = 1.0;
          }
        descend(CellKey{0, i, j}, std::move(fn), std::move(rows));
      }

    std::vector<int> order(elements.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return CellKeyLess{}(elements[a].cell, elements[b].cell);
    });
    std::vector<HierBasis::ElementTable> sorted;
    sorted.reserve(order.size());
    for (int k : order) sorted.push_back(std::move(elements[k]));
    elements = std::move(sorted);
    elem_index.clear();
    for (int k = 0; k < int(elements.size()); ++k)
      elem_index.emplace(pack_cell(elements[k].cell), k);
  }
};

}  // namespace

int HierBasis::function_index(const FnKey& f) const {
  auto it = fn_index_.find(pack_fn(f));
  return it == fn_index_.end() ? -1 : it->second;
}

int HierBasis::element_of(const CellKey& c) const {
  auto it = elem_index_.find(pack_cell(c));
  return it == elem_index_.end() ? -1 : it->second;
}

int HierBasis::element_containing(const Vec2& p) const {
  const int e = element_of(forest_->active_cell_containing(ai_, p));
  if (e < 0) throw std::logic_error("HierBasis: active cell without element table");
  return e;
}

Eigen::MatrixXd HierBasis::evaluate(int elem, const Vec2& p,
                                    std::span<const std::array<int, 2>> derivs) const {
  const ElementTable& et = elements_[elem];
  const Box2 box = forest_->cell_box(et.cell);
  const int px = degree_[0], py = degree_[1];
  const double hx = box.extent(0), hy = box.extent(1);
  const double u = (p.x - box.lo.x) / hx;
  const double v = (p.y - box.lo.y) / hy;

  Eigen::MatrixXd out(et.rows.rows(), Eigen::Index(derivs.size()));
  Eigen::VectorXd w((px + 1) * (py + 1));
  std::vector<double> vx(px + 1), vy(py + 1);
  for (std::size_t d = 0; d < derivs.size(); ++d) {
    const int kx = derivs[d][0], ky = derivs[d][1];
    element_basis_1d(px, u, kx, vx.data());
    element_basis_1d(py, v, ky, vy.data());
    for (int ay = 0; ay <= py; ++ay)
      for (int ax = 0; ax <= px; ++ax) w[ay * (px + 1) + ax] = vy[ay] * vx[ax];
    out.col(Eigen::Index(d)) =
        et.rows * w * (std::pow(1.0 / hx, kx) * std::pow(1.0 / hy, ky));
  }
  return out;
}

double HierBasis::h_min() const {
  int deepest = 0;
  for (const auto& et : elements_) deepest = std::max(deepest, et.cell.level);
  return std::min(forest_->cell_size(deepest, 0), forest_->cell_size(deepest, 1));
}

HierBasis build_basis_impl(const PolyTreeForest& forest, int ai, std::array<int, 2> degree,
                           bool truncated) {
  if (degree[0] < 1 || degree[1] < 1)
    throw std::invalid_argument("build basis: degree must be >= 1");
  if (ai < 0 || ai >= forest.num_ais()) throw std::invalid_argument("build basis: bad AI");
  HierBasis basis;
  basis.forest_ = &forest;
  basis.ai_ = ai;
  basis.degree_ = degree;
  basis.truncated_ = truncated;
  Builder b{forest,          ai,
            degree,          truncated,
            basis.functions_, basis.fn_index_,
            basis.elements_, basis.elem_index_,
            {},              {}};
  b.run();
  return basis;
}

HierBasis build_hierarchical(const PolyTreeForest& forest, int ai, std::array<int, 2> degree) {
  return build_basis_impl(forest, ai, degree, false);
}

HierBasis build_truncated(const PolyTreeForest& forest, int ai, std::array<int, 2> degree) {
  return build_basis_impl(forest, ai, degree, true);
}

}  // namespace xthb
