#include "xthb/integration_mesh.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>

namespace xthb {

namespace {

constexpr double kSnapT = 1e-10;       // crossing parameter snap to edge ends
constexpr double kAreaDropRel = 1e-14; // of the cell area
constexpr double kLineTolRel = 1e-10;  // of the cell size, distance to a line
constexpr double kOverlapRel = 1e-12;  // of the cell size, minimal overlap

struct RawTri {
  std::array<Vec2, 3> v;
  int phase = -1;  // -1 while undecided
};

struct CellResult {
  std::vector<IntegrationTri> tris;
  std::vector<InterfaceSegment> interfaces;
};

// Split one triangle by the linear interpolant of the vertex values w into the
// w >= 0 polygon and the w < 0 polygon (shared crossing points are bitwise
// identical on both sides).
void clip_triangle(const std::array<Vec2, 3>& v, const std::array<double, 3>& w,
                   std::vector<Vec2>& pos, std::vector<Vec2>& neg) {
  pos.clear();
  neg.clear();
  for (int e = 0; e < 3; ++e) {
    const int f = (e + 1) % 3;
    if (w[e] >= 0.0) pos.push_back(v[e]);
    if (w[e] <= 0.0) neg.push_back(v[e]);
    if ((w[e] > 0.0 && w[f] < 0.0) || (w[e] < 0.0 && w[f] > 0.0)) {
      double t = w[e] / (w[e] - w[f]);
      Vec2 x;
      if (t < kSnapT)
        x = v[e];
      else if (t > 1.0 - kSnapT)
        x = v[f];
      else
        x = v[e] + t * (v[f] - v[e]);
      pos.push_back(x);
      neg.push_back(x);
    }
  }
  auto dedupe = [](std::vector<Vec2>& poly) {
    poly.erase(std::unique(poly.begin(), poly.end(),
                           [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
               poly.end());
    while (poly.size() > 1 && poly.front().x == poly.back().x && poly.front().y == poly.back().y)
      poly.pop_back();
  };
  dedupe(pos);
  dedupe(neg);
}

void fan_triangulate(const std::vector<Vec2>& poly, int phase, double min_area,
                     std::vector<RawTri>& out) {
  for (std::size_t k = 2; k < poly.size(); ++k)
    if (tri_area(poly[0], poly[k - 1], poly[k]) > min_area)
      out.push_back(RawTri{{poly[0], poly[k - 1], poly[k]}, phase});
}

// Collinear overlap of segments (p, q) and (r, s): both endpoints of (r, s)
// within line_tol of the line through (p, q) and the parameter intervals
// overlapping by more than min_len. Returns the overlap endpoints.
bool collinear_overlap(const Vec2& p, const Vec2& q, const Vec2& r, const Vec2& s,
                       double line_tol, double min_len, Vec2& a, Vec2& b) {
  const Vec2 d = q - p;
  const double len = d.norm();
  if (len < min_len) return false;
  const Vec2 u = d * (1.0 / len);
  if (std::abs(cross(u, r - p)) > line_tol || std::abs(cross(u, s - p)) > line_tol) return false;
  const double t0 = std::clamp(std::min(u.dot(r - p), u.dot(s - p)), 0.0, len);
  const double t1 = std::clamp(std::max(u.dot(r - p), u.dot(s - p)), 0.0, len);
  if (t1 - t0 <= min_len) return false;
  a = p + t0 * u;
  b = p + t1 * u;
  return true;
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

class CellCutter {
 public:
  CellCutter(const UnionMesh& mesh, const LevelSetGeometry& ls) : mesh_(mesh), ls_(ls) {}

  CellResult cut(int ucell) const {
    const Box2 box = mesh_.cell_box(ucell);
    const double h = std::min(box.extent(0), box.extent(1));
    const double min_area = kAreaDropRel * box.extent(0) * box.extent(1);
    const int n_phases = ls_.num_phases();

    const std::array<Vec2, 4> corner = {box.lo, Vec2{box.hi.x, box.lo.y}, box.hi,
                                        Vec2{box.lo.x, box.hi.y}};
    std::vector<RawTri> undecided = {RawTri{{corner[0], corner[1], corner[2]}, -1},
                                     RawTri{{corner[0], corner[2], corner[3]}, -1}};
    std::vector<RawTri> done;

    std::vector<Vec2> pos, neg;
    for (int m = 0; m + 1 < n_phases && !undecided.empty(); ++m) {
      auto psi = [&](const Vec2& p) {
        double rest = ls_.value(m + 1, p);
        for (int k = m + 2; k < n_phases; ++k) rest = std::max(rest, ls_.value(k, p));
        return ls_.value(m, p) - rest;
      };
      double scale = 0.0;
      for (const Vec2& q : corner) scale = std::max(scale, std::abs(psi(q)));
      for (int e = 0; e < 4; ++e) {
        const double we = psi(corner[e]);
        const double wf = psi(corner[(e + 1) % 4]);
        if ((we > 0.0 && wf > 0.0) || (we < 0.0 && wf < 0.0)) {
          const double wm = psi(0.5 * (corner[e] + corner[(e + 1) % 4]));
          if ((we > 0.0) != (wm > 0.0) && std::abs(wm) > 1e-12 * scale)
            throw GeometryResolutionError(
                "level set changes sign twice along an integration cell edge; the union mesh "
                "does not resolve the geometry, increase geometry.geom_refine or "
                "geometry.geom_level");
        }
      }
      std::vector<RawTri> next;
      for (const RawTri& tri : undecided) {
        std::array<double, 3> w;
        for (int k = 0; k < 3; ++k) w[k] = psi(tri.v[k]);

        if (w[0] >= 0.0 && w[1] >= 0.0 && w[2] >= 0.0) {
          done.push_back(RawTri{tri.v, m});
        } else if (w[0] <= 0.0 && w[1] <= 0.0 && w[2] <= 0.0) {
          next.push_back(tri);
        } else {
          clip_triangle(tri.v, w, pos, neg);
          fan_triangulate(pos, m, min_area, done);
          fan_triangulate(neg, -1, min_area, next);
        }
      }
      undecided.swap(next);
    }
    for (const RawTri& tri : undecided) done.push_back(RawTri{tri.v, n_phases - 1});

    CellResult result;
    const int n = int(done.size());

    // connected components per phase via collinear edge overlaps
    const double line_tol = kLineTolRel * h;
    const double min_len = kOverlapRel * h;
    DisjointSet dsu(n);
    std::vector<std::tuple<int, int, Vec2, Vec2>> contacts;  // tri, tri, overlap
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Vec2 a, b;
        bool touching = false;
        for (int e = 0; e < 3 && !touching; ++e)
          for (int f = 0; f < 3 && !touching; ++f)
            touching = collinear_overlap(done[i].v[e], done[i].v[(e + 1) % 3], done[j].v[f],
                                         done[j].v[(f + 1) % 3], line_tol, min_len, a, b);
        if (!touching) continue;
        if (done[i].phase == done[j].phase)
          dsu.unite(i, j);
        else
          contacts.emplace_back(i, j, a, b);
      }

    std::vector<int> comp(n, -1);
    std::vector<std::pair<int, int>> roots;  // (phase, root) in first-seen order
    for (int i = 0; i < n; ++i) {
      const int r = dsu.find(i);
      int id = -1;
      for (int k = 0; k < int(roots.size()); ++k)
        if (roots[k] == std::pair<int, int>{done[i].phase, r}) {
          id = k;
          break;
        }
      if (id < 0) {
        id = int(roots.size());
        roots.emplace_back(done[i].phase, r);
      }
      comp[i] = id;
    }
    // component ids local to each phase, in first-seen (deterministic) order
    std::vector<int> local_id(roots.size(), 0);
    for (int m = 0; m < n_phases; ++m) {
      int next_id = 0;
      for (int k = 0; k < int(roots.size()); ++k)
        if (roots[k].first == m) local_id[k] = next_id++;
    }

    result.tris.reserve(n);
    for (int i = 0; i < n; ++i)
      result.tris.push_back(IntegrationTri{done[i].v, ucell, done[i].phase, local_id[comp[i]]});

    for (const auto& [i, j, a, b] : contacts) {
      const int pi = done[i].phase, pj = done[j].phase;
      const int ti = pi < pj ? i : j;  // triangle on the lower-phase side
      const int tj = pi < pj ? j : i;
      const Vec2 d = b - a;
      Vec2 nrm{-d.y, d.x};
      nrm = nrm * (1.0 / nrm.norm());
      const Vec2 cm = (done[ti].v[0] + done[ti].v[1] + done[ti].v[2]) * (1.0 / 3.0);
      const Vec2 cn = (done[tj].v[0] + done[tj].v[1] + done[tj].v[2]) * (1.0 / 3.0);
      if (nrm.dot(cn - cm) < 0.0) nrm = nrm * -1.0;
      result.interfaces.push_back(InterfaceSegment{a, b, nrm, done[ti].phase, done[tj].phase,
                                                   ucell, local_id[comp[ti]], ucell,
                                                   local_id[comp[tj]]});
    }
    return result;
  }

 private:
  const UnionMesh& mesh_;
  const LevelSetGeometry& ls_;
};

int thread_count() {
  if (const char* env = std::getenv("XTHB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 1) return n;
  }
  return 1;
}

}  // namespace

double IntegrationMesh::total_phase_area(int m) const {
  double area = 0.0;
  for (int c = 0; c < int(mesh_->cells().size()); ++c) area += phase_area(c, m);
  return area;
}

double IntegrationMesh::total_interface_length(int phase_m, int phase_n) const {
  const int lo = std::min(phase_m, phase_n), hi = std::max(phase_m, phase_n);
  double len = 0.0;
  for (const InterfaceSegment& s : interfaces_)
    if (s.phase_m == lo && s.phase_n == hi) len += (s.b - s.a).norm();
  return len;
}

IntegrationMesh build_integration_mesh(const UnionMesh& mesh, const LevelSetGeometry& levelset) {
  if (levelset.num_phases() < 1)
    throw std::invalid_argument("integration mesh: level set has no phases");
  IntegrationMesh im;
  im.mesh_ = &mesh;
  im.levelset_ = &levelset;

  const int n_cells = int(mesh.cells().size());
  const int n_phases = levelset.num_phases();
  const CellCutter cutter(mesh, levelset);

  std::vector<CellResult> results(n_cells);
  const int threads = std::min(thread_count(), std::max(1, n_cells));
  if (threads <= 1) {
    for (int c = 0; c < n_cells; ++c) results[c] = cutter.cut(c);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (int c = t; c < n_cells; c += threads) results[c] = cutter.cut(c);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    for (std::thread& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  im.tri_begin_.assign(n_cells + 1, 0);
  im.areas_.assign(std::size_t(n_cells) * n_phases, 0.0);
  im.n_comps_.assign(std::size_t(n_cells) * n_phases, 0);
  im.cut_.assign(n_cells, 0);
  im.iface_len_.assign(n_cells, 0.0);

  for (int c = 0; c < n_cells; ++c) {
    im.tri_begin_[c + 1] = im.tri_begin_[c] + int(results[c].tris.size());
    for (const IntegrationTri& tri : results[c].tris) {
      im.tris_.push_back(tri);
      im.areas_[std::size_t(c) * n_phases + tri.phase] += tri_area(tri.v[0], tri.v[1], tri.v[2]);
      im.n_comps_[std::size_t(c) * n_phases + tri.phase] =
          std::max(im.n_comps_[std::size_t(c) * n_phases + tri.phase], tri.comp + 1);
    }
    for (const InterfaceSegment& s : results[c].interfaces) {
      im.interfaces_.push_back(s);
      im.iface_len_[c] += (s.b - s.a).norm();
    }
    int present = 0;
    for (int m = 0; m < n_phases; ++m) present += im.phase_area(c, m) > 0.0;
    im.cut_[c] = present > 1;
  }

  // facet processing: collect triangle edges lying on each facet line, pair
  // the two sides by interval overlap
  struct EdgeOnFacet {
    double lo, hi;
    int tri;
  };
  auto edges_on = [&](int c, int axis, double coord, double tol) {
    std::vector<EdgeOnFacet> list;
    for (int k = im.cell_begin(c); k < im.cell_end(c); ++k) {
      const IntegrationTri& tri = im.tris_[k];
      for (int e = 0; e < 3; ++e) {
        const Vec2& p = tri.v[e];
        const Vec2& q = tri.v[(e + 1) % 3];
        if (std::abs(p[axis] - coord) > tol || std::abs(q[axis] - coord) > tol) continue;
        const double a = std::min(p[1 - axis], q[1 - axis]);
        const double b = std::max(p[1 - axis], q[1 - axis]);
        if (b > a) list.push_back(EdgeOnFacet{a, b, k});
      }
    }
    std::sort(list.begin(), list.end(),
              [](const EdgeOnFacet& a, const EdgeOnFacet& b) { return a.lo < b.lo; });
    return list;
  };

  for (int f = 0; f < int(mesh.facets().size()); ++f) {
    const UnionFacet& facet = mesh.facets()[f];
    const Box2 in_box = mesh.cell_box(facet.cell_in);
    const double h = std::min(in_box.extent(0), in_box.extent(1));
    const double tol = 10.0 * kLineTolRel * h;
    const double min_len = kOverlapRel * h;
    const auto ins = edges_on(facet.cell_in, facet.axis, facet.coord, tol);

    if (facet.cell_out < 0) {
      for (const EdgeOnFacet& e : ins) {
        const IntegrationTri& tri = im.tris_[e.tri];
        Vec2 a, b;
        if (facet.axis == 0) {
          a = Vec2{facet.coord, e.lo};
          b = Vec2{facet.coord, e.hi};
        } else {
          a = Vec2{e.lo, facet.coord};
          b = Vec2{e.hi, facet.coord};
        }
        im.boundary_.push_back(BoundaryPiece{a, b, facet.side, tri.ucell, tri.phase, tri.comp});
      }
      continue;
    }

    const auto outs = edges_on(facet.cell_out, facet.axis, facet.coord, tol);
    for (const EdgeOnFacet& ei : ins)
      for (const EdgeOnFacet& eo : outs) {
        const double lo = std::max(ei.lo, eo.lo);
        const double hi = std::min(ei.hi, eo.hi);
        if (hi - lo <= min_len) continue;
        const IntegrationTri& tin = im.tris_[ei.tri];
        const IntegrationTri& tout = im.tris_[eo.tri];
        if (tin.phase == tout.phase) {
          im.traces_.push_back(FacetTrace{f, lo, hi, tin.phase, tin.comp, tout.comp});
        } else {
          // interface lying exactly on the facet
          Vec2 a, b, nrm;
          if (facet.axis == 0) {
            a = Vec2{facet.coord, lo};
            b = Vec2{facet.coord, hi};
            nrm = Vec2{in_box.center().x < facet.coord ? 1.0 : -1.0, 0.0};
          } else {
            a = Vec2{lo, facet.coord};
            b = Vec2{hi, facet.coord};
            nrm = Vec2{0.0, in_box.center().y < facet.coord ? 1.0 : -1.0};
          }
          InterfaceSegment seg;
          seg.a = a;
          seg.b = b;
          if (tin.phase < tout.phase) {
            seg.normal = nrm;
            seg.phase_m = tin.phase;
            seg.phase_n = tout.phase;
            seg.ucell_m = facet.cell_in;
            seg.comp_m = tin.comp;
            seg.ucell_n = facet.cell_out;
            seg.comp_n = tout.comp;
          } else {
            seg.normal = nrm * -1.0;
            seg.phase_m = tout.phase;
            seg.phase_n = tin.phase;
            seg.ucell_m = facet.cell_out;
            seg.comp_m = tout.comp;
            seg.ucell_n = facet.cell_in;
            seg.comp_n = tin.comp;
          }
          im.interfaces_.push_back(seg);
          im.iface_len_[facet.cell_in] += hi - lo;
        }
      }
  }

  // ghost facets: both cells carry the phase, at least one is cut
  std::set<std::array<int, 4>> ghost_keys;
  for (const FacetTrace& t : im.traces_) {
    const UnionFacet& facet = mesh.facets()[t.facet];
    if (!im.cut_[facet.cell_in] && !im.cut_[facet.cell_out]) continue;
    if (im.phase_area(facet.cell_in, t.phase) <= 0.0 ||
        im.phase_area(facet.cell_out, t.phase) <= 0.0)
      continue;
    ghost_keys.insert({t.facet, t.phase, t.comp_in, t.comp_out});
  }
  for (const auto& k : ghost_keys) im.ghosts_.push_back(GhostFacet{k[0], k[1], k[2], k[3]});

  return im;
}

}  // namespace xthb
