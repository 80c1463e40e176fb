#include "xthb/config.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace xthb {

namespace {

using nlohmann::json;

void expect_keys(const json& j, const char* where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw std::runtime_error(std::string(where) + ": expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) throw std::runtime_error(std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

json vec_json(const Vec2& v) { return json::array({v.x, v.y}); }

Vec2 vec_from(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 2)
    throw std::runtime_error(std::string(where) + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json box_json(const Box2& b) { return json{{"lo", vec_json(b.lo)}, {"hi", vec_json(b.hi)}}; }

Box2 box_from(const json& j, const char* where) {
  expect_keys(j, where, {"lo", "hi"});
  Box2 b;
  if (j.contains("lo")) b.lo = vec_from(j["lo"], where);
  if (j.contains("hi")) b.hi = vec_from(j["hi"], where);
  return b;
}

template <typename T>
T value_or(const json& j, const char* key, T dflt) {
  return j.contains(key) ? j[key].get<T>() : dflt;
}

const char* kSideNames[4] = {"left", "right", "bottom", "top"};

json side_json(int side) { return side < 0 ? json("none") : json(kSideNames[side]); }

int side_from(const json& j, const char* where) {
  const std::string s = j.get<std::string>();
  if (s == "none") return -1;
  for (int i = 0; i < 4; ++i)
    if (s == kSideNames[i]) return i;
  throw std::runtime_error(std::string(where) +
                           ": side must be left/right/bottom/top/none, got '" + s + "'");
}

json value_json(const ValueSpec& v) {
  return json{{"kind", v.kind}, {"v", v.v},           {"amp", v.amp},
              {"freq", v.freq}, {"offset", v.offset}, {"axis", v.axis}};
}

ValueSpec value_from(const json& j, const char* where) {
  expect_keys(j, where, {"kind", "v", "amp", "freq", "offset", "axis"});
  ValueSpec v;
  v.kind = value_or<std::string>(j, "kind", v.kind);
  v.v = value_or(j, "v", v.v);
  v.amp = value_or(j, "amp", v.amp);
  v.freq = value_or(j, "freq", v.freq);
  v.offset = value_or(j, "offset", v.offset);
  v.axis = value_or(j, "axis", v.axis);
  return v;
}

json bc_json(const BCSpec& bc) {
  return json{{"kind", bc.kind},         {"side", side_json(bc.side)},
              {"immersed", bc.immersed}, {"phase", bc.phase},
              {"mask", bc.mask},         {"value", value_json(bc.value)}};
}

BCSpec bc_from(const json& j, const char* where) {
  expect_keys(j, where, {"kind", "side", "immersed", "phase", "mask", "value"});
  BCSpec bc;
  bc.kind = value_or<std::string>(j, "kind", bc.kind);
  if (j.contains("side")) bc.side = side_from(j["side"], where);
  bc.immersed = value_or(j, "immersed", bc.immersed);
  bc.phase = value_or(j, "phase", bc.phase);
  bc.mask = value_or(j, "mask", bc.mask);
  if (j.contains("value")) bc.value = value_from(j["value"], where);
  return bc;
}

json field_json(const FieldSpec& f) {
  return json{{"name", f.name},
              {"degree", f.degree},
              {"ai", f.ai},
              {"refine", f.refine},
              {"fixed_level", f.fixed_level}};
}

FieldSpec field_from(const json& j, const char* where) {
  expect_keys(j, where, {"name", "degree", "ai", "refine", "fixed_level"});
  FieldSpec f;
  f.name = value_or<std::string>(j, "name", f.name);
  f.degree = value_or(j, "degree", f.degree);
  f.ai = value_or(j, "ai", f.ai);
  f.refine = value_or<std::string>(j, "refine", f.refine);
  f.fixed_level = value_or(j, "fixed_level", f.fixed_level);
  return f;
}

json criterion_json(const CriterionSpec& c) {
  return json{{"kind", c.kind},           {"ai", c.ai},
              {"c", c.c},                 {"phase", c.phase},
              {"box", box_json(c.box)},   {"shrink", c.shrink},
              {"a", vec_json(c.a)},       {"b", vec_json(c.b)}};
}

CriterionSpec criterion_from(const json& j, const char* where) {
  expect_keys(j, where, {"kind", "ai", "c", "phase", "box", "shrink", "a", "b"});
  CriterionSpec c;
  c.kind = value_or<std::string>(j, "kind", c.kind);
  c.ai = value_or(j, "ai", c.ai);
  c.c = value_or(j, "c", c.c);
  c.phase = value_or(j, "phase", c.phase);
  if (j.contains("box")) c.box = box_from(j["box"], where);
  c.shrink = value_or(j, "shrink", c.shrink);
  if (j.contains("a")) c.a = vec_from(j["a"], where);
  if (j.contains("b")) c.b = vec_from(j["b"], where);
  return c;
}

json schedule_json(const ScheduleSpec& s) {
  json cr = json::array();
  for (const auto& c : s.criteria) cr.push_back(criterion_json(c));
  return json{{"steps", s.steps}, {"mode", s.mode}, {"criteria", cr}};
}

ScheduleSpec schedule_from(const json& j) {
  expect_keys(j, "schedule", {"steps", "mode", "criteria"});
  ScheduleSpec s;
  s.steps = value_or(j, "steps", s.steps);
  s.mode = value_or<std::string>(j, "mode", s.mode);
  if (j.contains("criteria"))
    for (const auto& c : j["criteria"]) s.criteria.push_back(criterion_from(c, "criterion"));
  return s;
}

json geometry_json(const GeometrySpec& g) {
  return json{{"kind", g.kind},
              {"anchor", vec_json(g.anchor)},
              {"angle", g.angle},
              {"center", vec_json(g.center)},
              {"radius", g.radius},
              {"semi_axes", g.semi_axes},
              {"path", g.path},
              {"geom_refine", g.geom_refine},
              {"geom_level", g.geom_level}};
}

GeometrySpec geometry_from(const json& j) {
  expect_keys(j, "geometry",
              {"kind", "anchor", "angle", "center", "radius", "semi_axes", "path", "geom_refine",
               "geom_level"});
  GeometrySpec g;
  g.kind = value_or<std::string>(j, "kind", g.kind);
  if (j.contains("anchor")) g.anchor = vec_from(j["anchor"], "geometry.anchor");
  g.angle = value_or(j, "angle", g.angle);
  if (j.contains("center")) g.center = vec_from(j["center"], "geometry.center");
  g.radius = value_or(j, "radius", g.radius);
  g.semi_axes = value_or(j, "semi_axes", g.semi_axes);
  g.path = value_or<std::string>(j, "path", g.path);
  g.geom_refine = value_or(j, "geom_refine", g.geom_refine);
  g.geom_level = value_or(j, "geom_level", g.geom_level);
  return g;
}

json material_json(const MaterialPhase& m) {
  return json{{"E", m.E},   {"nu", m.nu}, {"kappa", m.kappa},
              {"alpha", m.alpha}, {"T0", m.T0}, {"void", m.void_phase}};
}

MaterialPhase material_from(const json& j) {
  expect_keys(j, "material", {"E", "nu", "kappa", "alpha", "T0", "void"});
  MaterialPhase m;
  m.E = value_or(j, "E", m.E);
  m.nu = value_or(j, "nu", m.nu);
  m.kappa = value_or(j, "kappa", m.kappa);
  m.alpha = value_or(j, "alpha", m.alpha);
  m.T0 = value_or(j, "T0", m.T0);
  m.void_phase = value_or(j, "void", m.void_phase);
  return m;
}

json penalties_json(const WeakFormConfig& w) {
  return json{{"c_D", w.c_D},   {"c_I", w.c_I},
              {"gamma_G", w.gamma_G}, {"ghost", w.ghost},
              {"plane_strain", w.plane_strain}, {"inverse_weights", w.inverse_weights}};
}

WeakFormConfig penalties_from(const json& j) {
  expect_keys(j, "penalties", {"c_D", "c_I", "gamma_G", "ghost", "plane_strain", "inverse_weights"});
  WeakFormConfig w;
  w.c_D = value_or(j, "c_D", w.c_D);
  w.c_I = value_or(j, "c_I", w.c_I);
  w.gamma_G = value_or(j, "gamma_G", w.gamma_G);
  w.ghost = value_or(j, "ghost", w.ghost);
  w.plane_strain = value_or(j, "plane_strain", w.plane_strain);
  w.inverse_weights = value_or(j, "inverse_weights", w.inverse_weights);
  return w;
}

json output_json(const OutputSpec& o) {
  return json{{"dir", o.dir}, {"timing", o.timing}, {"fields", o.fields}, {"plot", o.plot}};
}

OutputSpec output_from(const json& j) {
  expect_keys(j, "output", {"dir", "timing", "fields", "plot"});
  OutputSpec o;
  o.dir = value_or<std::string>(j, "dir", o.dir);
  o.timing = value_or(j, "timing", o.timing);
  o.fields = value_or(j, "fields", o.fields);
  o.plot = value_or(j, "plot", o.plot);
  return o;
}

json config_json(const StudyConfig& c) {
  json fields = json::array();
  for (const auto& f : c.fields) fields.push_back(field_json(f));
  json materials = json::array();
  for (const auto& m : c.materials) materials.push_back(material_json(m));
  json tb = json::array();
  for (const auto& bc : c.thermal_bcs) tb.push_back(bc_json(bc));
  json eb = json::array();
  for (const auto& bc : c.elastic_bcs) eb.push_back(bc_json(bc));
  return json{{"study", c.study},
              {"title", c.title},
              {"domain", box_json(c.domain)},
              {"base", c.base},
              {"fields", fields},
              {"schedule", schedule_json(c.schedule)},
              {"geometry", geometry_json(c.geometry)},
              {"materials", materials},
              {"thermal_bcs", tb},
              {"elastic_bcs", eb},
              {"penalties", penalties_json(c.penalties)},
              {"reference_level", c.reference_level},
              {"variants", c.variants},
              {"output", output_json(c.output)}};
}

StudyConfig config_from(const json& j) {
  expect_keys(j, "config",
              {"study", "title", "domain", "base", "fields", "schedule", "geometry", "materials",
               "thermal_bcs", "elastic_bcs", "penalties", "reference_level", "variants", "output"});
  StudyConfig c;
  c.study = value_or<std::string>(j, "study", c.study);
  c.title = value_or<std::string>(j, "title", c.title);
  if (j.contains("domain")) c.domain = box_from(j["domain"], "domain");
  c.base = value_or(j, "base", c.base);
  if (j.contains("fields"))
    for (const auto& f : j["fields"]) c.fields.push_back(field_from(f, "field"));
  if (j.contains("schedule")) c.schedule = schedule_from(j["schedule"]);
  if (j.contains("geometry")) c.geometry = geometry_from(j["geometry"]);
  if (j.contains("materials"))
    for (const auto& m : j["materials"]) c.materials.push_back(material_from(m));
  if (j.contains("thermal_bcs"))
    for (const auto& bc : j["thermal_bcs"]) c.thermal_bcs.push_back(bc_from(bc, "thermal_bc"));
  if (j.contains("elastic_bcs"))
    for (const auto& bc : j["elastic_bcs"]) c.elastic_bcs.push_back(bc_from(bc, "elastic_bc"));
  if (j.contains("penalties")) c.penalties = penalties_from(j["penalties"]);
  c.reference_level = value_or(j, "reference_level", c.reference_level);
  c.variants = value_or(j, "variants", c.variants);
  if (j.contains("output")) c.output = output_from(j["output"]);
  return c;
}

}  // namespace

StudyConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return config_from(j);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed config: ") + e.what());
  }
}

std::string serialize_config(const StudyConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

int config_buffer(const StudyConfig& cfg) {
  int b = 1;
  for (const auto& f : cfg.fields) b = std::max({b, f.degree[0], f.degree[1]});
  return b;
}

std::vector<std::string> validate_config(const StudyConfig& cfg) {
  std::vector<std::string> problems;
  const auto bad = [&](const std::string& msg) { problems.push_back(msg); };

  bool known = false;
  for (const auto& s : builtin_studies()) known = known || s == cfg.study;
  if (!known) bad("study '" + cfg.study + "' is not one of the built-in studies");

  if (!(cfg.domain.extent(0) > 0.0) || !(cfg.domain.extent(1) > 0.0))
    bad("domain must have positive extent");
  if (cfg.base[0] < 1 || cfg.base[1] < 1) bad("base mesh needs at least one cell per direction");

  if (cfg.fields.empty()) bad("at least one field is required");
  std::set<int> ais;
  std::set<std::string> names;
  for (size_t i = 0; i < cfg.fields.size(); ++i) {
    const FieldSpec& f = cfg.fields[i];
    const std::string tag = "fields." + std::to_string(i);
    if (f.name.empty()) bad(tag + ": field name must not be empty");
    if (!names.insert(f.name).second) bad(tag + ": duplicate field name '" + f.name + "'");
    if (f.degree[0] < 1 || f.degree[0] > 3 || f.degree[1] < 1 || f.degree[1] > 3)
      bad(tag + ": degrees must be in 1..3");
    if (f.ai < 0) bad(tag + ": ai must be non-negative");
    if (!ais.insert(f.ai).second) bad(tag + ": duplicate activation index");
    if (f.refine != "step" && f.refine != "fixed")
      bad(tag + ": refine must be 'step' or 'fixed'");
    if (f.fixed_level < 0) bad(tag + ": fixed_level must be non-negative");
  }

  if (cfg.schedule.steps < 1) bad("schedule.steps must be at least 1 (schedule nonempty)");
  if (cfg.schedule.mode != "uniform" && cfg.schedule.mode != "local")
    bad("schedule.mode must be 'uniform' or 'local'");
  if (cfg.schedule.mode == "local" && cfg.schedule.criteria.empty())
    bad("local schedule requires at least one criterion");
  for (size_t i = 0; i < cfg.schedule.criteria.size(); ++i) {
    const CriterionSpec& cr = cfg.schedule.criteria[i];
    const std::string tag = "schedule.criteria." + std::to_string(i);
    if (cr.kind != "interface_band" && cr.kind != "boundary_segment" && cr.kind != "box")
      bad(tag + ": unknown kind '" + cr.kind + "'");
    if (cr.ai < 0) bad(tag + ": ai must be non-negative");
    if (cr.kind == "interface_band" && !(cr.c > 0.0)) bad(tag + ": band constant must be positive");
    if (cr.kind == "boundary_segment" && !(cr.c > 0.0)) bad(tag + ": distance must be positive");
    if (cr.kind == "box" && !(cr.shrink > 0.0 && cr.shrink <= 1.0))
      bad(tag + ": shrink must be in (0, 1]");
  }

  const std::string& gk = cfg.geometry.kind;
  int phases = 0;
  if (gk == "none")
    phases = 1;
  else if (gk == "halfplane" || gk == "lshape")
    phases = 2;
  else if (gk == "circle") {
    phases = 2;
    if (!(cfg.geometry.radius > 0.0)) bad("geometry.radius must be positive");
  } else if (gk == "ellipse") {
    phases = 2;
    if (!(cfg.geometry.semi_axes[0] > 0.0 && cfg.geometry.semi_axes[1] > 0.0))
      bad("geometry.semi_axes must be positive");
  } else if (gk == "csv") {
    phases = int(cfg.materials.size());
    if (cfg.geometry.path.empty()) bad("geometry.path is required for csv geometry");
  } else {
    bad("geometry.kind '" + gk + "' is not supported");
  }
  if (cfg.geometry.geom_refine < 0 || cfg.geometry.geom_level < 0)
    bad("geometry refinement levels must be non-negative");

  if (phases > 0 && int(cfg.materials.size()) != phases)
    bad("geometry '" + gk + "' defines " + std::to_string(phases) + " phases but " +
        std::to_string(cfg.materials.size()) + " materials are given");
  bool any_material = false;
  for (size_t i = 0; i < cfg.materials.size(); ++i) {
    any_material = any_material || !cfg.materials[i].void_phase;
    try {
      cfg.materials[i].validate();
    } catch (const std::exception& e) {
      bad("materials." + std::to_string(i) + ": " + e.what());
    }
  }
  if (!cfg.materials.empty() && !any_material) bad("all phases are void");

  const auto check_bcs = [&](const std::vector<BCSpec>& bcs, const char* which) {
    for (size_t i = 0; i < bcs.size(); ++i) {
      const BCSpec& bc = bcs[i];
      const std::string tag = std::string(which) + "." + std::to_string(i);
      if (bc.kind != "dirichlet" && bc.kind != "neumann")
        bad(tag + ": kind must be 'dirichlet' or 'neumann'");
      if (bc.side < 0 && !bc.immersed) bad(tag + ": needs a side or immersed=true");
      if (bc.side >= 0 && bc.immersed) bad(tag + ": side and immersed are exclusive");
      if (bc.side > 3) bad(tag + ": side must be 0..3 (left/right/bottom/top)");
      if (bc.phase >= int(cfg.materials.size())) bad(tag + ": phase out of range");
      const std::string& vk = bc.value.kind;
      if (vk != "constant" && vk != "sine" && vk != "exact")
        bad(tag + ": value kind '" + vk + "' is not supported");
      if (vk == "sine" && (bc.value.axis < 0 || bc.value.axis > 1))
        bad(tag + ": sine axis must be 0 or 1");
    }
  };
  check_bcs(cfg.thermal_bcs, "thermal_bcs");
  check_bcs(cfg.elastic_bcs, "elastic_bcs");

  if (!(cfg.penalties.gamma_G >= 0.0)) bad("penalties.gamma_G must be non-negative");

  const int max_field_level = [&] {
    int l = 0;
    for (const auto& f : cfg.fields)
      if (f.refine == "fixed") l = std::max(l, f.fixed_level);
    return std::max(l, cfg.schedule.steps - 1);
  }();
  if (cfg.reference_level >= 0 && cfg.reference_level < max_field_level)
    bad("reference_level must not be coarser than the finest scheduled field level");

  for (const auto& v : cfg.variants)
    if (v.empty()) bad("variants must not contain empty names");

  const auto has_field = [&](const std::string& name) {
    for (const auto& f : cfg.fields)
      if (f.name == name) return true;
    return false;
  };
  if (cfg.study == "bar2d" && !has_field("u")) bad("bar2d needs a field named 'u'");
  if (cfg.study == "lshape" && !has_field("T")) bad("lshape needs a field named 'T'");
  if (cfg.study == "elliptic_hole" || cfg.study == "two_material_plate") {
    if (!has_field("T") || !has_field("u"))
      bad(cfg.study + " needs fields named 'T' and 'u'");
    if (cfg.reference_level < 0)
      bad(cfg.study + " needs reference_level >= 0 (self-oracle reference)");
  }

  return problems;
}

void apply_override(StudyConfig& cfg, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like path.to.key=value, got '" + assignment +
                                "'");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // unquoted strings like "uniform"
  }

  json root = config_json(cfg);
  json* node = &root;
  std::istringstream segs(path);
  std::string seg;
  std::vector<std::string> parts;
  while (std::getline(segs, seg, '.')) parts.push_back(seg);
  if (parts.empty()) throw std::runtime_error("empty override path");

  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    const std::string& s = parts[i];
    if (node->is_array()) {
      size_t idx = 0;
      try {
        idx = std::stoul(s);
      } catch (...) {
        throw std::runtime_error("override path '" + path + "': '" + s + "' is not a list index");
      }
      if (idx >= node->size())
        throw std::runtime_error("override path '" + path + "': index " + s + " out of range");
      node = &(*node)[idx];
    } else if (node->is_object() && node->contains(s)) {
      node = &(*node)[s];
    } else {
      throw std::runtime_error("override path '" + path + "': no key '" + s + "'");
    }
  }

  const std::string& last = parts.back();
  if (node->is_array()) {
    size_t idx = 0;
    try {
      idx = std::stoul(last);
    } catch (...) {
      throw std::runtime_error("override path '" + path + "': '" + last + "' is not a list index");
    }
    if (idx >= node->size())
      throw std::runtime_error("override path '" + path + "': index " + last + " out of range");
    (*node)[idx] = value;
  } else if (node->is_object() && node->contains(last)) {
    (*node)[last] = value;
  } else {
    throw std::runtime_error("override path '" + path + "': no key '" + last + "'");
  }

  try {
    cfg = config_from(root);
  } catch (const json::exception& e) {
    throw std::runtime_error("override '" + assignment + "' produced an invalid config: " +
                             e.what());
  }
}

std::vector<std::string> builtin_studies() {
  return {"bar2d", "lshape", "elliptic_hole", "two_material_plate"};
}

namespace {

BCSpec dirichlet_side(int side, ValueSpec value, std::array<bool, 2> mask = {true, true}) {
  BCSpec bc;
  bc.kind = "dirichlet";
  bc.side = side;
  bc.mask = mask;
  bc.value = std::move(value);
  return bc;
}

ValueSpec constant(double v) {
  ValueSpec s;
  s.kind = "constant";
  s.v = v;
  return s;
}

ValueSpec exact_value() {
  ValueSpec s;
  s.kind = "exact";
  return s;
}

StudyConfig bar2d_config() {
  StudyConfig c;
  c.study = "bar2d";
  c.title = "Two-material bar with inclined interface under b_x = 8 x^2";
  c.domain = Box2{{0.0, 0.0}, {1.0, 0.5}};
  c.base = {8, 4};
  c.fields = {FieldSpec{"u", {2, 2}, 0, "step", 0}};
  c.schedule.steps = 5;
  c.schedule.mode = "uniform";
  c.geometry.kind = "halfplane";
  c.geometry.anchor = {0.5137, 0.25};
  c.geometry.angle = std::numbers::pi / 3.0;
  MaterialPhase m;
  m.E = 1.0;
  m.nu = 0.0;
  c.materials = {m, m};
  c.elastic_bcs = {dirichlet_side(0, constant(0.0))};
  return c;
}

StudyConfig lshape_config() {
  StudyConfig c;
  c.study = "lshape";
  c.title = "L-shaped domain, T = r^(2/3) sin(2 theta / 3)";
  // min corner offset by -0.127, max corner margin chosen so that the corner
  // legs and the outer edges never land on a lattice line at any dyadic level
  c.domain = Box2{{-1.127, -1.127}, {1.2, 1.2}};
  c.base = {6, 6};
  c.fields = {FieldSpec{"T", {2, 2}, 0, "step", 0}};
  c.schedule.steps = 6;
  c.schedule.mode = "local";
  CriterionSpec corner;
  corner.kind = "box";
  corner.ai = 0;
  corner.box = Box2{{-0.4, -0.4}, {0.4, 0.4}};
  corner.shrink = 0.5;
  CriterionSpec boundary;
  boundary.kind = "interface_band";
  boundary.ai = 1;
  boundary.phase = 0;
  boundary.c = 1.5;
  c.schedule.criteria = {corner, boundary};
  c.geometry.kind = "lshape";
  MaterialPhase m;
  MaterialPhase v;
  v.void_phase = true;
  c.materials = {m, v};
  BCSpec bc;
  bc.kind = "dirichlet";
  bc.immersed = true;
  bc.value = exact_value();
  c.thermal_bcs = {bc};
  return c;
}

StudyConfig elliptic_config() {
  StudyConfig c;
  c.study = "elliptic_hole";
  c.title = "Thermo-elastic plate with elliptic hole, q = 10 on the hole";
  c.domain = Box2{{0.0, 0.0}, {2.0, 2.0}};
  c.base = {10, 10};
  c.fields = {FieldSpec{"T", {1, 1}, 0, "step", 0}, FieldSpec{"u", {2, 2}, 1, "step", 3}};
  c.schedule.steps = 4;
  c.schedule.mode = "uniform";
  c.geometry.kind = "ellipse";
  c.geometry.center = {0.0, 0.0};
  c.geometry.semi_axes = {0.8136, 0.5753};
  c.geometry.geom_level = 4;
  MaterialPhase hole;
  hole.void_phase = true;
  MaterialPhase m;
  m.E = 1.0;
  m.nu = 0.3;
  m.kappa = 1.0;
  m.alpha = 1.0;
  m.T0 = 0.0;
  c.materials = {hole, m};
  BCSpec flux;
  flux.kind = "neumann";
  flux.immersed = true;
  flux.value = constant(10.0);
  c.thermal_bcs = {flux, dirichlet_side(1, constant(1.0))};
  c.elastic_bcs = {dirichlet_side(0, constant(0.0), {true, false}),
                   dirichlet_side(2, constant(0.0), {false, true})};
  c.reference_level = 4;
  c.variants = {"equal_meshes", "coarse_temperature"};
  return c;
}

StudyConfig plate_config() {
  StudyConfig c;
  c.study = "two_material_plate";
  c.title = "Two-material thermo-elastic plate, q = 100 sin(10 y) + 110";
  c.domain = Box2{{0.0, 0.0}, {2.0, 1.0}};
  c.base = {20, 10};
  c.fields = {FieldSpec{"T", {2, 2}, 0, "step", 0}, FieldSpec{"u", {2, 2}, 1, "step", 0}};
  c.schedule.steps = 3;
  c.schedule.mode = "local";
  CriterionSpec t_left;
  t_left.kind = "boundary_segment";
  t_left.ai = 0;
  t_left.a = {0.0, 0.0};
  t_left.b = {0.0, 1.0};
  t_left.c = 2.0;
  CriterionSpec t_circle;
  t_circle.kind = "interface_band";
  t_circle.ai = 0;
  t_circle.phase = 0;
  t_circle.c = 2.0;
  CriterionSpec u_left;
  u_left.kind = "boundary_segment";
  u_left.ai = 1;
  u_left.a = {0.0, 0.0};
  u_left.b = {0.0, 1.0};
  u_left.c = 2.0;
  CriterionSpec u_circle;
  u_circle.kind = "interface_band";
  u_circle.ai = 1;
  u_circle.phase = 0;
  u_circle.c = 2.0;
  c.schedule.criteria = {t_left, t_circle, u_left, u_circle};
  c.geometry.kind = "circle";
  c.geometry.center = {0.7, 0.5};
  c.geometry.radius = 0.25;
  c.geometry.geom_level = 4;
  MaterialPhase a;
  a.E = 1.0;
  a.nu = 0.3;
  a.kappa = 1.0;
  a.alpha = 1.0e-5;
  MaterialPhase b = a;
  b.alpha = 10.0e-5;
  c.materials = {a, b};
  BCSpec flux;
  flux.kind = "neumann";
  flux.side = 0;
  flux.value.kind = "sine";
  flux.value.amp = 100.0;
  flux.value.freq = 10.0;
  flux.value.offset = 110.0;
  flux.value.axis = 1;
  c.thermal_bcs = {flux, dirichlet_side(1, constant(0.0))};
  c.elastic_bcs = {dirichlet_side(0, constant(0.0))};
  c.reference_level = 4;
  c.variants = {"uniform", "a", "b", "c", "d"};
  return c;
}

}  // namespace

StudyConfig builtin_config(const std::string& study) {
  if (study == "bar2d") return bar2d_config();
  if (study == "lshape") return lshape_config();
  if (study == "elliptic_hole") return elliptic_config();
  if (study == "two_material_plate") return plate_config();
  throw std::invalid_argument("unknown study '" + study + "'");
}

}  // namespace xthb
