#include "xthb/enrichment.hpp"

#include <algorithm>
#include <stdexcept>

namespace xthb {

namespace {

int row_of(const ExtractionTable& t, int fn) {
  const auto it = std::lower_bound(t.fn.begin(), t.fn.end(), fn);
  return int(it - t.fn.begin());
}

}  // namespace

Enrichment::Enrichment(const Extractor& extractor, const IntegrationMesh& im)
    : ex_(&extractor), im_(&im) {
  const UnionMesh& mesh = extractor.mesh();
  const LevelSetGeometry& ls = im.levelset();
  const int n_cells = int(mesh.cells().size());
  const int P = im.num_phases();
  const int n_fns = extractor.basis().n_functions();

  // global node ids for the (cell, phase, component) regions
  std::vector<int> node_begin(std::size_t(n_cells) * P + 1, 0);
  for (int c = 0; c < n_cells; ++c)
    for (int m = 0; m < P; ++m)
      node_begin[std::size_t(c) * P + m + 1] =
          node_begin[std::size_t(c) * P + m] + im.num_components(c, m);
  const int n_nodes = node_begin.back();
  const auto node_id = [&](int c, int m, int comp) {
    return node_begin[std::size_t(c) * P + m] + comp;
  };

  std::vector<std::vector<std::array<int, 2>>> adj(n_nodes);  // (cell, comp), phase implied
  for (const FacetTrace& t : im.facet_traces()) {
    const UnionFacet& f = mesh.facets()[t.facet];
    adj[node_id(f.cell_in, t.phase, t.comp_in)].push_back({f.cell_out, t.comp_out});
    adj[node_id(f.cell_out, t.phase, t.comp_out)].push_back({f.cell_in, t.comp_in});
  }

  std::vector<std::vector<int>> visible(n_fns);
  for (int c = 0; c < n_cells; ++c)
    for (int fn : extractor.table(c).fn) visible[fn].push_back(c);

  std::vector<int> stamp(n_nodes, -1);
  std::vector<std::array<int, 3>> stack;  // cell, phase, comp

  fn_begin_.assign(n_fns + 1, 0);
  std::vector<std::array<int, 2>> labeled;  // (node, level) per function, reused
  std::vector<std::vector<std::array<int, 2>>> fn_labels(n_fns);
  std::vector<std::vector<int>> fn_level_phase(n_fns);

  for (int fn = 0; fn < n_fns; ++fn) {
    const std::vector<int>& cells = visible[fn];
    int levels = 0;
    labeled.clear();
    for (int m = 0; m < P; ++m) {
      if (ls.is_void(m)) continue;
      for (int c : cells) {
        for (int comp = 0; comp < im.num_components(c, m); ++comp) {
          const int seed = node_id(c, m, comp);
          if (stamp[seed] == fn) continue;
          const int lev = levels++;
          fn_level_phase[fn].push_back(m);
          stamp[seed] = fn;
          stack.push_back({c, m, comp});
          while (!stack.empty()) {
            const auto [cc, mm, kk] = stack.back();
            stack.pop_back();
            const int id = node_id(cc, mm, kk);
            labeled.push_back({id, lev});
            for (const auto& [nc, nk] : adj[id]) {
              if (!std::binary_search(cells.begin(), cells.end(), nc)) continue;
              const int nid = node_id(nc, mm, nk);
              if (stamp[nid] == fn) continue;
              stamp[nid] = fn;
              stack.push_back({nc, mm, nk});
            }
          }
        }
      }
    }
    fn_begin_[fn + 1] = fn_begin_[fn] + levels;
    fn_labels[fn] = std::move(labeled);
  }

  dofs_.reserve(fn_begin_[n_fns]);
  for (int fn = 0; fn < n_fns; ++fn)
    for (int lev = 0; lev < fn_begin_[fn + 1] - fn_begin_[fn]; ++lev)
      dofs_.push_back(EnrichedDof{fn, lev, fn_level_phase[fn][lev]});

  cell_dofs_.resize(std::size_t(n_cells) * P);
  for (int c = 0; c < n_cells; ++c) {
    const ExtractionTable& t = extractor.table(c);
    for (int m = 0; m < P; ++m)
      cell_dofs_[std::size_t(c) * P + m].assign(
          std::size_t(im.num_components(c, m)) * t.fn.size(), -1);
  }
  std::vector<int> node_cell(n_nodes), node_phase(n_nodes), node_comp(n_nodes);
  for (int c = 0; c < n_cells; ++c)
    for (int m = 0; m < P; ++m)
      for (int comp = 0; comp < im.num_components(c, m); ++comp) {
        const int id = node_id(c, m, comp);
        node_cell[id] = c;
        node_phase[id] = m;
        node_comp[id] = comp;
      }
  for (int fn = 0; fn < n_fns; ++fn)
    for (const auto& [id, lev] : fn_labels[fn]) {
      const int c = node_cell[id];
      const ExtractionTable& t = extractor.table(c);
      cell_dofs_[std::size_t(c) * P + node_phase[id]]
                [std::size_t(node_comp[id]) * t.fn.size() + row_of(t, fn)] =
          fn_begin_[fn] + lev;
    }
}

std::span<const int> Enrichment::cell_dofs(int ucell, int phase, int comp) const {
  const std::vector<int>& v = cell_dofs_[std::size_t(ucell) * im_->num_phases() + phase];
  const std::size_t n = ex_->table(ucell).fn.size();
  if (v.empty()) return {};
  return {v.data() + std::size_t(comp) * n, n};
}

Eigen::MatrixXd Enrichment::evaluate(const Eigen::VectorXd& coeffs, int ucell, int phase,
                                     int comp, std::span<const Vec2> pts,
                                     std::span<const std::array<int, 2>> derivs) const {
  if (im_->levelset().is_void(phase))
    throw std::invalid_argument("enriched fields are not defined on void phases");
  const std::span<const int> dof = cell_dofs(ucell, phase, comp);
  Eigen::MatrixXd out(pts.size(), derivs.size());
  Eigen::VectorXd local(dof.size());
  for (std::size_t r = 0; r < dof.size(); ++r) local[r] = coeffs[dof[r]];
  for (std::size_t q = 0; q < pts.size(); ++q)
    out.row(q) = local.transpose() * ex_->evaluate(ucell, pts[q], derivs);
  return out;
}

}  // namespace xthb
