#include "xthb/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "xthb/assembly.hpp"
#include "xthb/enrichment.hpp"
#include "xthb/integration_mesh.hpp"
#include "xthb/quadrature.hpp"
#include "xthb/solver.hpp"
#include "xthb/thb_basis.hpp"

namespace xthb {

namespace {

using Clock = std::chrono::steady_clock;
using PhiFn = std::function<double(const Vec2&)>;
using ExactFn = std::function<double(const Vec2&, int)>;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<PhiFn> geometry_functions(const GeometrySpec& g, const Box2& domain) {
  if (g.kind == "none") return {[](const Vec2&) { return 1.0; }};
  if (g.kind == "halfplane") {
    PhiFn f = levelset_halfplane(g.anchor, g.angle);
    return {f, levelset_negate(f)};
  }
  if (g.kind == "circle") {
    PhiFn f = levelset_circle(g.center, g.radius);
    return {f, levelset_negate(f)};
  }
  if (g.kind == "ellipse") {
    PhiFn f = levelset_ellipse(g.center, g.semi_axes[0], g.semi_axes[1]);
    return {f, levelset_negate(f)};
  }
  if (g.kind == "lshape") {
    PhiFn f = levelset_lshape();
    return {f, levelset_negate(f)};
  }
  if (g.kind == "csv") return levelset_from_csv(g.path, domain);
  throw std::invalid_argument("geometry kind '" + g.kind + "' is not supported");
}

/// Refinement instructions of one pipeline build: uniform levels per AI and
/// the number of applications of each schedule criterion.
struct BuildPlan {
  std::vector<int> uniform;
  std::vector<int> criterion_apps;
};

int plan_ais(const StudyConfig& cfg) {
  int n = 1;
  for (const auto& f : cfg.fields) n = std::max(n, f.ai + 1);
  for (const auto& cr : cfg.schedule.criteria) n = std::max(n, cr.ai + 1);
  return n;
}

BuildPlan empty_plan(const StudyConfig& cfg) {
  return {std::vector<int>(plan_ais(cfg), 0), std::vector<int>(cfg.schedule.criteria.size(), 0)};
}

/// Plan of refinement step `s` of a series study: step-following fields
/// refine uniformly in uniform mode and through the criteria in local mode;
/// fixed fields sit at their fixed level either way.
BuildPlan step_plan(const StudyConfig& cfg, int s) {
  BuildPlan plan = empty_plan(cfg);
  for (const auto& f : cfg.fields)
    plan.uniform[f.ai] = f.refine == "fixed" ? f.fixed_level
                         : cfg.schedule.mode == "uniform" ? s
                                                          : 0;
  if (cfg.schedule.mode == "local")
    for (auto& a : plan.criterion_apps) a = s;
  return plan;
}

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

std::vector<CellKey> criterion_flags(const PolyTreeForest& forest, const CriterionSpec& cr,
                                     const std::vector<PhiFn>& phi, int application) {
  std::vector<CellKey> flags;
  for (const CellKey& cell : forest.active_cells(cr.ai)) {
    const Box2 box = forest.cell_box(cell);
    const double h = std::max(box.extent(0), box.extent(1));
    const Vec2 ctr = box.center();
    bool hit = false;
    if (cr.kind == "interface_band") {
      if (cr.phase < 0 || cr.phase >= int(phi.size()))
        throw std::invalid_argument("criterion phase out of range");
      hit = std::abs(phi[cr.phase](ctr)) < cr.c * h;
    } else if (cr.kind == "boundary_segment") {
      hit = dist_point_segment(ctr, cr.a, cr.b) < cr.c * h;
    } else if (cr.kind == "box") {
      const double f = std::pow(cr.shrink, application - 1);
      const Vec2 c0 = cr.box.center();
      const Vec2 half{0.5 * cr.box.extent(0) * f, 0.5 * cr.box.extent(1) * f};
      hit = box.intersects(Box2{c0 - half, c0 + half});
    } else {
      throw std::invalid_argument("criterion kind '" + cr.kind + "' is not supported");
    }
    if (hit) flags.push_back(cell);
  }
  return flags;
}

/// Everything one solve step needs, with stable addresses across moves.
struct Pipeline {
  std::vector<PhiFn> phi;
  std::unique_ptr<LevelSetGeometry> ls;
  std::unique_ptr<PolyTreeForest> forest;
  std::unique_ptr<UnionMesh> mesh;
  std::unique_ptr<IntegrationMesh> im;
  struct Disc {
    std::unique_ptr<HierBasis> basis;
    std::unique_ptr<Extractor> ex;
    std::unique_ptr<Enrichment> enr;
  };
  std::vector<Disc> fields;
};

Pipeline build_pipeline(const StudyConfig& cfg, const BuildPlan& plan) {
  Pipeline P;
  P.phi = geometry_functions(cfg.geometry, cfg.domain);
  if (P.phi.size() != cfg.materials.size())
    throw std::invalid_argument("geometry phase count does not match the material list");
  P.ls = std::make_unique<LevelSetGeometry>();
  for (size_t m = 0; m < P.phi.size(); ++m)
    P.ls->add_phase(P.phi[m], cfg.materials[m].void_phase, "phase" + std::to_string(m));

  const int b = config_buffer(cfg);
  P.forest =
      std::make_unique<PolyTreeForest>(cfg.domain, cfg.base[0], cfg.base[1], plan_ais(cfg));
  for (size_t ai = 0; ai < plan.uniform.size(); ++ai)
    for (int l = 0; l < plan.uniform[ai]; ++l) {
      const auto cells = P.forest->active_cells(int(ai));
      P.forest->refine(int(ai), cells, b);
    }
  int max_apps = 0;
  for (int a : plan.criterion_apps) max_apps = std::max(max_apps, a);
  for (int k = 1; k <= max_apps; ++k)
    for (size_t ci = 0; ci < cfg.schedule.criteria.size(); ++ci) {
      if (plan.criterion_apps[ci] < k) continue;
      const auto flags = criterion_flags(*P.forest, cfg.schedule.criteria[ci], P.phi, k);
      if (!flags.empty()) P.forest->refine(cfg.schedule.criteria[ci].ai, flags, b);
    }

  P.mesh = std::make_unique<UnionMesh>(
      build_union_mesh(*P.forest, cfg.geometry.geom_refine, cfg.geometry.geom_level));
  P.im = std::make_unique<IntegrationMesh>(build_integration_mesh(*P.mesh, *P.ls));
  for (int m = 0; m < P.ls->num_phases(); ++m)
    if (!(P.im->total_phase_area(m) > 0.0))
      throw GeometryResolutionError(
          "phase " + std::to_string(m) +
          " has no area at the current geometry resolution; raise geometry.geom_refine or "
          "geometry.geom_level, or refine the base mesh");

  P.fields.resize(cfg.fields.size());
  for (size_t fi = 0; fi < cfg.fields.size(); ++fi) {
    const FieldSpec& f = cfg.fields[fi];
    P.fields[fi].basis =
        std::make_unique<HierBasis>(build_truncated(*P.forest, f.ai, f.degree));
    P.fields[fi].ex = std::make_unique<Extractor>(*P.fields[fi].basis, *P.mesh);
    P.fields[fi].enr = std::make_unique<Enrichment>(*P.fields[fi].ex, *P.im);
  }
  return P;
}

double field_h(const PolyTreeForest& forest, int ai) {
  int lmax = 0;
  for (const CellKey& c : forest.active_cells(ai)) lmax = std::max(lmax, c.level);
  return std::min(forest.cell_size(lmax, 0), forest.cell_size(lmax, 1));
}

std::function<double(const Vec2&, int)> make_value(const ValueSpec& v, const ExactFn& exact) {
  if (v.kind == "constant") {
    const double c = v.v;
    return [c](const Vec2&, int) { return c; };
  }
  if (v.kind == "sine") {
    const double amp = v.amp, freq = v.freq, off = v.offset;
    const int axis = v.axis;
    return [amp, freq, off, axis](const Vec2& p, int) { return amp * std::sin(freq * p[axis]) + off; };
  }
  if (v.kind == "exact") {
    if (!exact)
      throw std::invalid_argument("this study has no analytic solution for value kind 'exact'");
    return exact;
  }
  throw std::invalid_argument("value kind '" + v.kind + "' is not supported");
}

void convert_bcs(const std::vector<BCSpec>& specs, const ExactFn& exact,
                 std::vector<DirichletBC>& dirichlet, std::vector<NeumannBC>& neumann) {
  for (const BCSpec& bc : specs) {
    if (bc.kind == "dirichlet") {
      DirichletBC d;
      d.side = bc.side;
      d.immersed = bc.immersed;
      d.phase = bc.phase;
      d.mask = bc.mask;
      d.value = make_value(bc.value, exact);
      dirichlet.push_back(std::move(d));
    } else {
      NeumannBC n;
      n.side = bc.side;
      n.immersed = bc.immersed;
      n.phase = bc.phase;
      n.value = make_value(bc.value, exact);
      neumann.push_back(std::move(n));
    }
  }
}

struct Solved {
  Eigen::VectorXd x;
  int n_dof = 0;
  double seconds = 0.0;
};

int field_degree(const StudyConfig& cfg, int fi) {
  return std::max(cfg.fields[fi].degree[0], cfg.fields[fi].degree[1]);
}

Solved solve_thermal_field(const StudyConfig& cfg, const Pipeline& P, int fi,
                           const ExactFn& exact, ThermalProblem& prob) {
  const auto t0 = Clock::now();
  prob = ThermalProblem{};
  prob.enr = P.fields[fi].enr.get();
  prob.materials = cfg.materials;
  prob.wf = cfg.penalties;
  convert_bcs(cfg.thermal_bcs, exact, prob.dirichlet, prob.neumann);
  LinearSystem sys = assemble_thermal(prob);
  Solved s;
  try {
    s.x = solve_direct(sys);
  } catch (const std::exception& e) {
    throw std::runtime_error("field '" + cfg.fields[fi].name + "' (" +
                             std::to_string(sys.A.rows()) + " dofs): " + e.what());
  }
  s.n_dof = int(sys.A.rows());
  s.seconds = elapsed(t0);
  return s;
}

Solved solve_elastic_field(const StudyConfig& cfg, const Pipeline& P, int fi,
                           std::function<Vec2(const Vec2&)> body, const Enrichment* t_enr,
                           const Eigen::VectorXd* temperature, const ExactFn& exact,
                           ElasticProblem& prob) {
  const auto t0 = Clock::now();
  prob = ElasticProblem{};
  prob.enr = P.fields[fi].enr.get();
  prob.materials = cfg.materials;
  prob.wf = cfg.penalties;
  convert_bcs(cfg.elastic_bcs, exact, prob.dirichlet, prob.neumann);
  prob.body = std::move(body);
  prob.temperature_enr = t_enr;
  prob.temperature = temperature;
  LinearSystem sys = assemble_elastic(prob);
  Solved s;
  try {
    s.x = solve_direct(sys);
  } catch (const std::exception& e) {
    throw std::runtime_error("field '" + cfg.fields[fi].name + "' (" +
                             std::to_string(sys.A.rows()) + " dofs): " + e.what());
  }
  s.n_dof = int(sys.A.rows());
  s.seconds = elapsed(t0);
  return s;
}

/// Reference backed by a solved field of a run on the same union lattice;
/// evaluation maps the site's cell by lattice key and reuses the site's
/// region index, which require_same_regions has checked to agree.
Reference oracle_reference(const UnionMesh& run_mesh, const UnionMesh& ref_mesh,
                           const Enrichment& ref_enr, const Eigen::VectorXd& ref_coeffs,
                           int components) {
  auto slices = std::make_shared<std::vector<Eigen::VectorXd>>(components);
  for (int d = 0; d < components; ++d) {
    (*slices)[d].resize(ref_enr.num_dofs());
    for (int i = 0; i < ref_enr.num_dofs(); ++i) (*slices)[d][i] = ref_coeffs[components * i + d];
  }
  return [&run_mesh, &ref_mesh, &ref_enr, slices](const RefSite& s) {
    const int rc = ref_mesh.cell_at(run_mesh.cells()[s.ucell].key);
    if (rc < 0)
      throw std::runtime_error(
          "reference run does not share the union lattice; align geometry.geom_level with "
          "reference_level");
    const std::array<Vec2, 1> pt{s.p};
    static const std::array<std::array<int, 2>, 3> derivs{{{0, 0}, {1, 0}, {0, 1}}};
    const Eigen::MatrixXd V = ref_enr.evaluate((*slices)[s.comp], rc, s.phase, s.region, pt, derivs);
    return RefValue{V(0, 0), {V(0, 1), V(0, 2)}};
  };
}

void require_same_regions(const IntegrationMesh& run, const IntegrationMesh& ref) {
  const auto& rc = run.mesh().cells();
  const auto& fc = ref.mesh().cells();
  if (rc.size() != fc.size())
    throw std::runtime_error(
        "run and reference union meshes differ in size; align geometry.geom_level with "
        "reference_level");
  for (size_t c = 0; c < rc.size(); ++c) {
    if (!(rc[c].key == fc[c].key))
      throw std::runtime_error("run and reference union lattices disagree");
    for (int m = 0; m < run.num_phases(); ++m)
      if (run.num_components(int(c), m) != ref.num_components(int(c), m))
        throw std::runtime_error("run and reference integration regions disagree");
  }
}

double observed_rate(double e_prev, double e_cur, double h_prev, double h_cur) {
  if (!(e_prev > 0.0) || !(e_cur > 0.0)) return 0.0;
  const double num = std::log2(e_prev / e_cur);
  if (h_prev > 0.0 && h_cur > 0.0) {
    const double den = std::log2(h_prev / h_cur);
    if (std::abs(den) > 1e-12) return num / den;
  }
  return num;
}

void fill_rates(std::vector<StepRecord>& rows) {
  std::map<std::string, size_t> prev;
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto it = prev.find(rows[i].field);
    if (it != prev.end()) {
      const StepRecord& p = rows[it->second];
      rows[i].rate_l2 = observed_rate(p.err_l2, rows[i].err_l2, p.h, rows[i].h);
      rows[i].rate_h1 = observed_rate(p.err_h1, rows[i].err_h1, p.h, rows[i].h);
    }
    prev[rows[i].field] = i;
  }
}

void apply_timing_gate(const StudyConfig& cfg, StudyReport& rep) {
  if (cfg.output.timing) return;
  for (auto& r : rep.rows) r.seconds = 0.0;
}

int field_index(const StudyConfig& cfg, const std::string& name) {
  for (size_t i = 0; i < cfg.fields.size(); ++i)
    if (cfg.fields[i].name == name) return int(i);
  throw std::invalid_argument("study '" + cfg.study + "' needs a field named '" + name + "'");
}

void sample_export(StudyReport& rep, const Enrichment& enr, const Eigen::VectorXd& coeffs,
                   int components, const std::string& name) {
  static const std::array<std::array<int, 2>, 1> val{{{0, 0}}};
  const IntegrationMesh& im = enr.integration();
  for (int d = 0; d < components; ++d) {
    Eigen::VectorXd slice(enr.num_dofs());
    for (int i = 0; i < enr.num_dofs(); ++i) slice[i] = coeffs[components * i + d];
    FieldExport ex;
    ex.field = components == 1 ? name : name + (d == 0 ? "_x" : "_y");
    for (const IntegrationTri& t : im.tris()) {
      if (im.levelset().is_void(t.phase)) continue;
      const Eigen::MatrixXd V = enr.evaluate(slice, t.ucell, t.phase, t.comp, t.v, val);
      for (int k = 0; k < 3; ++k) ex.vertices.push_back({t.v[k], V(k, 0)});
    }
    rep.exports.push_back(std::move(ex));
  }
}

double von_mises(const Eigen::Vector3d& s) {
  return std::sqrt(s[0] * s[0] - s[0] * s[1] + s[1] * s[1] + 3.0 * s[2] * s[2]);
}

struct VmError {
  double err = 0.0;
  double ref = 0.0;
};

/// L2 error of the two-sided average of the Von Mises stress along all
/// material-material interfaces, against a reference run on the same lattice.
VmError vm_interface_error(const ElasticProblem& run, const Eigen::VectorXd& u_run,
                           const ElasticProblem& ref, const Eigen::VectorXd& u_ref, int degree) {
  const IntegrationMesh& im = run.enr->integration();
  const UnionMesh& rm = im.mesh();
  const UnionMesh& fm = ref.enr->integration().mesh();
  double e2 = 0.0, r2 = 0.0;
  for (const InterfaceSegment& s : im.interfaces()) {
    if (im.levelset().is_void(s.phase_m) || im.levelset().is_void(s.phase_n)) continue;
    const int rc_m = fm.cell_at(rm.cells()[s.ucell_m].key);
    const int rc_n = fm.cell_at(rm.cells()[s.ucell_n].key);
    if (rc_m < 0 || rc_n < 0)
      throw std::runtime_error("reference run does not share the union lattice");
    for (const QuadPoint& q : segment_rule(s.a, s.b, degree)) {
      const double vm_run =
          0.5 * (von_mises(stress_at(run, u_run, s.ucell_m, s.phase_m, s.comp_m, q.p)) +
                 von_mises(stress_at(run, u_run, s.ucell_n, s.phase_n, s.comp_n, q.p)));
      const double vm_ref =
          0.5 * (von_mises(stress_at(ref, u_ref, rc_m, s.phase_m, s.comp_m, q.p)) +
                 von_mises(stress_at(ref, u_ref, rc_n, s.phase_n, s.comp_n, q.p)));
      e2 += q.w * (vm_run - vm_ref) * (vm_run - vm_ref);
      r2 += q.w * vm_ref * vm_ref;
    }
  }
  return {std::sqrt(e2), std::sqrt(r2)};
}

// ---------------------------------------------------------------- bar2d ----

StudyReport run_bar(const StudyConfig& cfg) {
  StudyReport rep;
  rep.study = cfg.study;
  const int fi = field_index(cfg, "u");
  if (cfg.materials.size() != 2 || cfg.materials[0].void_phase || cfg.materials[1].void_phase ||
      cfg.materials[0].E != cfg.materials[1].E || cfg.materials[0].nu != cfg.materials[1].nu)
    throw std::invalid_argument("bar2d expects two identical non-void materials");
  const double E = cfg.materials[0].E;

  const Reference ref = [E](const RefSite& s) {
    if (s.comp == 1) return RefValue{};
    const double x = s.p.x;
    return RefValue{2.0 / 3.0 * (4.0 * x - x * x * x * x) / E,
                    {8.0 / 3.0 * (1.0 - x * x * x) / E, 0.0}};
  };
  const ExactFn exact = [&ref](const Vec2& p, int d) { return ref(RefSite{0, d, p, -1, 0}).v; };
  const auto body = [](const Vec2& p) { return Vec2{8.0 * p.x * p.x, 0.0}; };

  for (int s = 0; s < cfg.schedule.steps; ++s) {
    const auto t0 = Clock::now();
    const Pipeline P = build_pipeline(cfg, step_plan(cfg, s));
    ElasticProblem prob;
    const Solved sol = solve_elastic_field(cfg, P, fi, body, nullptr, nullptr, exact, prob);
    const FieldError e = error_norms(*P.fields[fi].enr, sol.x, 2, ref, 8);
    rep.rows.push_back({s, "u", sol.n_dof, field_h(*P.forest, cfg.fields[fi].ai), e.l2, e.h1, 0.0,
                        0.0, elapsed(t0)});
    if (cfg.output.fields && s == cfg.schedule.steps - 1)
      sample_export(rep, *P.fields[fi].enr, sol.x, 2, "u");
  }
  fill_rates(rep.rows);
  rep.summary = {{"p", field_degree(cfg, fi)}, {"angle", cfg.geometry.angle}};
  apply_timing_gate(cfg, rep);
  return rep;
}

// ---------------------------------------------------------------- lshape ----

/// Exact corner solution in polar coordinates around the reentrant corner;
/// the angle snaps to the nearest leg for points that the linearized cut
/// placed marginally inside the removed quadrant.
RefValue lshape_exact(const Vec2& p) {
  const double r = p.norm();
  if (r == 0.0) return RefValue{};
  double th = std::atan2(p.y, p.x);
  if (th < 0.0) th += 2.0 * std::numbers::pi;
  if (th > 1.5 * std::numbers::pi) th = th > 1.75 * std::numbers::pi ? 0.0 : 1.5 * std::numbers::pi;
  const double r23 = std::pow(r, 2.0 / 3.0);
  const double v = r23 * std::sin(2.0 * th / 3.0);
  const double dr = 2.0 / 3.0 * r23 / r * std::sin(2.0 * th / 3.0);
  const double dt = 2.0 / 3.0 * r23 / r * std::cos(2.0 * th / 3.0);
  const double c = std::cos(th), s = std::sin(th);
  return RefValue{v, {dr * c - dt * s, dr * s + dt * c}};
}

StudyReport run_lshape(const StudyConfig& cfg) {
  StudyReport rep;
  rep.study = cfg.study;
  const int fi = field_index(cfg, "T");
  const Reference ref = [](const RefSite& s) { return lshape_exact(s.p); };
  const ExactFn exact = [](const Vec2& p, int) { return lshape_exact(p).v; };

  for (int s = 0; s < cfg.schedule.steps; ++s) {
    const auto t0 = Clock::now();
    const Pipeline P = build_pipeline(cfg, step_plan(cfg, s));
    ThermalProblem prob;
    const Solved sol = solve_thermal_field(cfg, P, fi, exact, prob);
    const FieldError e = error_norms(*P.fields[fi].enr, sol.x, 1, ref, 8);
    rep.rows.push_back({s, "T", sol.n_dof, field_h(*P.forest, cfg.fields[fi].ai), e.l2, e.h1, 0.0,
                        0.0, elapsed(t0)});
    if (cfg.output.fields && s == cfg.schedule.steps - 1)
      sample_export(rep, *P.fields[fi].enr, sol.x, 1, "T");
  }
  fill_rates(rep.rows);
  rep.summary = {{"p", field_degree(cfg, fi)}, {"mode", cfg.schedule.mode}};
  apply_timing_gate(cfg, rep);
  return rep;
}

// --------------------------------------------------------- elliptic_hole ----

BuildPlan reference_plan(const StudyConfig& cfg) {
  BuildPlan plan = empty_plan(cfg);
  for (const auto& f : cfg.fields) plan.uniform[f.ai] = cfg.reference_level;
  return plan;
}

StudyReport run_elliptic(const StudyConfig& cfg) {
  StudyReport rep;
  rep.study = cfg.study;
  const int fT = field_index(cfg, "T");
  const int fU = field_index(cfg, "u");
  if (cfg.reference_level < 0)
    throw std::invalid_argument("elliptic_hole needs reference_level >= 0 (self-oracle)");
  const int errq = std::min(8, 2 * std::max(field_degree(cfg, fT), field_degree(cfg, fU)) + 2);

  const auto tref = Clock::now();
  const Pipeline R = build_pipeline(cfg, reference_plan(cfg));
  ThermalProblem probTref;
  const Solved Tref = solve_thermal_field(cfg, R, fT, nullptr, probTref);
  ElasticProblem probUref;
  const Solved Uref = solve_elastic_field(cfg, R, fU, nullptr, R.fields[fT].enr.get(), &Tref.x,
                                          nullptr, probUref);
  rep.summary["reference"] = {{"level", cfg.reference_level},
                              {"T_dofs", Tref.n_dof},
                              {"u_dofs", Uref.n_dof},
                              {"seconds", cfg.output.timing ? elapsed(tref) : 0.0}};

  for (const std::string& variant : cfg.variants) {
    nlohmann::json series = nlohmann::json::array();
    if (variant == "equal_meshes") {
      for (int s = 0; s < cfg.schedule.steps; ++s) {
        const auto t0 = Clock::now();
        BuildPlan plan = empty_plan(cfg);
        plan.uniform[cfg.fields[fT].ai] = s;
        plan.uniform[cfg.fields[fU].ai] = s;
        const Pipeline P = build_pipeline(cfg, plan);
        require_same_regions(*P.im, *R.im);
        ThermalProblem probT;
        const Solved T = solve_thermal_field(cfg, P, fT, nullptr, probT);
        ElasticProblem probU;
        const Solved U =
            solve_elastic_field(cfg, P, fU, nullptr, P.fields[fT].enr.get(), &T.x, nullptr, probU);
        const double t_solve = elapsed(t0);
        const FieldError eT = error_norms(
            *P.fields[fT].enr, T.x, 1,
            oracle_reference(*P.mesh, *R.mesh, *R.fields[fT].enr, Tref.x, 1), errq);
        const FieldError eU = error_norms(
            *P.fields[fU].enr, U.x, 2,
            oracle_reference(*P.mesh, *R.mesh, *R.fields[fU].enr, Uref.x, 2), errq);
        const double h = field_h(*P.forest, cfg.fields[fT].ai);
        rep.rows.push_back({s, "T", T.n_dof, h, eT.l2, eT.h1, 0.0, 0.0, T.seconds});
        rep.rows.push_back(
            {s, "u", U.n_dof, h, eU.l2, eU.h1, 0.0, 0.0, t_solve - T.seconds});
        if (cfg.output.fields && s == cfg.schedule.steps - 1) {
          sample_export(rep, *P.fields[fT].enr, T.x, 1, "T");
          sample_export(rep, *P.fields[fU].enr, U.x, 2, "u");
        }
        series.push_back({{"step", s},
                          {"h", h},
                          {"T_dofs", T.n_dof},
                          {"u_dofs", U.n_dof},
                          {"T_err_l2", eT.l2},
                          {"T_err_h1", eT.h1},
                          {"u_err_l2", eU.l2},
                          {"u_err_h1", eU.h1}});
      }
    } else if (variant == "coarse_temperature") {
      const int u_level = cfg.fields[fU].fixed_level;
      for (int s = 0; s < std::min(cfg.schedule.steps, u_level); ++s) {
        const auto t0 = Clock::now();
        BuildPlan plan = empty_plan(cfg);
        plan.uniform[cfg.fields[fT].ai] = s;
        plan.uniform[cfg.fields[fU].ai] = u_level;
        const Pipeline P = build_pipeline(cfg, plan);
        require_same_regions(*P.im, *R.im);
        ThermalProblem probT;
        const Solved T = solve_thermal_field(cfg, P, fT, nullptr, probT);
        ElasticProblem probU;
        const Solved U =
            solve_elastic_field(cfg, P, fU, nullptr, P.fields[fT].enr.get(), &T.x, nullptr, probU);
        const double t_solve = elapsed(t0);
        const FieldError eU = error_norms(
            *P.fields[fU].enr, U.x, 2,
            oracle_reference(*P.mesh, *R.mesh, *R.fields[fU].enr, Uref.x, 2), errq);
        const double hT = field_h(*P.forest, cfg.fields[fT].ai);
        rep.rows.push_back({s, "u:coarse_T", U.n_dof, hT, eU.l2, eU.h1, 0.0, 0.0, t_solve});
        series.push_back({{"step", s},
                          {"h_T", hT},
                          {"u_level", u_level},
                          {"u_err_l2", eU.l2},
                          {"u_err_h1", eU.h1}});
      }
    } else {
      throw std::invalid_argument("elliptic_hole variant '" + variant + "' is unknown");
    }
    rep.summary["variants"][variant] = series;
  }
  fill_rates(rep.rows);
  apply_timing_gate(cfg, rep);
  return rep;
}

// --------------------------------------------------- two_material_plate ----

StudyReport run_plate(const StudyConfig& cfg) {
  StudyReport rep;
  rep.study = cfg.study;
  const int fT = field_index(cfg, "T");
  const int fU = field_index(cfg, "u");
  if (cfg.reference_level < 0)
    throw std::invalid_argument("two_material_plate needs reference_level >= 0 (self-oracle)");
  const int errq = std::min(8, 2 * std::max(field_degree(cfg, fT), field_degree(cfg, fU)) + 2);
  const int vmq = 2 * field_degree(cfg, fU) + 1;

  const auto find_criterion = [&](const std::string& kind, int ai) {
    for (size_t i = 0; i < cfg.schedule.criteria.size(); ++i)
      if (cfg.schedule.criteria[i].kind == kind && cfg.schedule.criteria[i].ai == ai)
        return int(i);
    throw std::invalid_argument("two_material_plate needs a '" + kind +
                                "' criterion for activation index " + std::to_string(ai));
  };
  const int t_seg = find_criterion("boundary_segment", cfg.fields[fT].ai);
  const int t_band = find_criterion("interface_band", cfg.fields[fT].ai);
  const int u_seg = find_criterion("boundary_segment", cfg.fields[fU].ai);
  const int u_band = find_criterion("interface_band", cfg.fields[fU].ai);
  const int apps = cfg.schedule.steps;

  const auto tref = Clock::now();
  const Pipeline R = build_pipeline(cfg, reference_plan(cfg));
  ThermalProblem probTref;
  const Solved Tref = solve_thermal_field(cfg, R, fT, nullptr, probTref);
  ElasticProblem probUref;
  const Solved Uref = solve_elastic_field(cfg, R, fU, nullptr, R.fields[fT].enr.get(), &Tref.x,
                                          nullptr, probUref);
  rep.summary["reference"] = {{"level", cfg.reference_level},
                              {"T_dofs", Tref.n_dof},
                              {"u_dofs", Uref.n_dof},
                              {"seconds", cfg.output.timing ? elapsed(tref) : 0.0}};

  int step = 0;
  for (const std::string& variant : cfg.variants) {
    BuildPlan plan = empty_plan(cfg);
    if (variant == "uniform") {
      plan.uniform[cfg.fields[fT].ai] = apps;
      plan.uniform[cfg.fields[fU].ai] = apps;
    } else if (variant == "a") {
      for (int ci : {t_seg, t_band, u_seg, u_band}) plan.criterion_apps[ci] = apps;
    } else if (variant == "b") {
      for (int ci : {t_seg, u_band}) plan.criterion_apps[ci] = apps;
    } else if (variant == "c") {
      plan.criterion_apps[u_band] = apps;
    } else if (variant == "d") {
      plan.criterion_apps[t_seg] = apps;
    } else {
      throw std::invalid_argument("two_material_plate variant '" + variant + "' is unknown");
    }

    const auto t0 = Clock::now();
    const Pipeline P = build_pipeline(cfg, plan);
    require_same_regions(*P.im, *R.im);
    ThermalProblem probT;
    ElasticProblem probU;
    Solved T, U;
    try {
      T = solve_thermal_field(cfg, P, fT, nullptr, probT);
      U = solve_elastic_field(cfg, P, fU, nullptr, P.fields[fT].enr.get(), &T.x, nullptr, probU);
    } catch (const std::exception& e) {
      throw std::runtime_error("variant '" + variant + "': " + e.what());
    }
    const double t_solve = elapsed(t0);
    const FieldError eT =
        error_norms(*P.fields[fT].enr, T.x, 1,
                    oracle_reference(*P.mesh, *R.mesh, *R.fields[fT].enr, Tref.x, 1), errq);
    const FieldError eU =
        error_norms(*P.fields[fU].enr, U.x, 2,
                    oracle_reference(*P.mesh, *R.mesh, *R.fields[fU].enr, Uref.x, 2), errq);
    const VmError vm = vm_interface_error(probU, U.x, probUref, Uref.x, vmq);

    rep.rows.push_back({step, "T:" + variant, T.n_dof,
                        field_h(*P.forest, cfg.fields[fT].ai), eT.l2, eT.h1, 0.0, 0.0,
                        T.seconds});
    rep.rows.push_back({step, "u:" + variant, U.n_dof,
                        field_h(*P.forest, cfg.fields[fU].ai), eU.l2, eU.h1, 0.0, 0.0,
                        t_solve - T.seconds});
    rep.summary["variants"][variant] = {{"T_dofs", T.n_dof},
                                        {"u_dofs", U.n_dof},
                                        {"total_dofs", T.n_dof + U.n_dof},
                                        {"vm_err_l2", vm.err},
                                        {"vm_ref_l2", vm.ref},
                                        {"T_err_l2", eT.l2},
                                        {"u_err_l2", eU.l2}};
    if (cfg.output.fields && variant == cfg.variants.back()) {
      sample_export(rep, *P.fields[fT].enr, T.x, 1, "T");
      sample_export(rep, *P.fields[fU].enr, U.x, 2, "u");
    }
    ++step;
  }
  fill_rates(rep.rows);
  apply_timing_gate(cfg, rep);
  return rep;
}

}  // namespace

StudyReport run_study(const StudyConfig& cfg) {
  const auto problems = validate_config(cfg);
  if (!problems.empty()) {
    std::string msg = "config does not validate:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw std::invalid_argument(msg);
  }
  if (cfg.study == "bar2d") return run_bar(cfg);
  if (cfg.study == "lshape") return run_lshape(cfg);
  if (cfg.study == "elliptic_hole") return run_elliptic(cfg);
  if (cfg.study == "two_material_plate") return run_plate(cfg);
  throw std::invalid_argument("unknown study '" + cfg.study + "'");
}

}  // namespace xthb
