#pragma once

#include <array>
#include <string>
#include <vector>

#include "xthb/geometry2d.hpp"
#include "xthb/materials.hpp"

namespace xthb {

/// Declarative boundary value. Kinds:
///   constant  value v everywhere
///   sine      amp * sin(freq * x[axis]) + offset
///   exact     the study's analytic reference solution
struct ValueSpec {
  std::string kind = "constant";
  double v = 0.0;
  double amp = 0.0;
  double freq = 1.0;
  double offset = 0.0;
  int axis = 1;

  friend bool operator==(const ValueSpec&, const ValueSpec&) = default;
};

/// One boundary condition. `side` is a bounding-box side (0 left, 1 right,
/// 2 bottom, 3 top) or -1 combined with `immersed` for the immersed boundary.
/// `mask` selects constrained components of a vector field.
struct BCSpec {
  std::string kind = "dirichlet";  // dirichlet | neumann
  int side = -1;
  bool immersed = false;
  int phase = -1;
  std::array<bool, 2> mask{true, true};
  ValueSpec value;

  friend bool operator==(const BCSpec&, const BCSpec&) = default;
};

/// One discretized field and the activation index carrying its refinement.
/// `refine` is "step" (follows the schedule) or "fixed" (held at
/// `fixed_level` uniform refinements on every step).
struct FieldSpec {
  std::string name;
  std::array<int, 2> degree{1, 1};
  int ai = 0;
  std::string refine = "step";
  int fixed_level = 0;

  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

/// Local refinement criterion, applied once per step to the active cells of
/// one activation index. Kinds:
///   interface_band    flag cells with |phi_phase(center)| < c * h
///   boundary_segment  flag cells with dist(center, segment ab) < c * h
///   box               flag cells intersecting `box` shrunk by shrink^(k-1)
///                     around its center on the k-th application
/// h is the longer cell edge. An `ai` without a field refines the union
/// mesh for geometry resolution without adding unknowns.
struct CriterionSpec {
  std::string kind = "interface_band";
  int ai = 0;
  double c = 2.0;
  int phase = 0;
  Box2 box{{0.0, 0.0}, {0.0, 0.0}};
  double shrink = 1.0;
  Vec2 a{0.0, 0.0};
  Vec2 b{0.0, 0.0};

  friend bool operator==(const CriterionSpec&, const CriterionSpec&) = default;
};

/// Refinement schedule: `steps` solves; mode "uniform" refines every
/// step-following field uniformly, "local" applies the criteria once per
/// step.
struct ScheduleSpec {
  int steps = 1;
  std::string mode = "uniform";
  std::vector<CriterionSpec> criteria;

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// Level-set geometry. Primitive kinds define phase 0 as the enclosed set
/// (circle/ellipse interior, half-plane left side, L-shape) and phase 1 as
/// its complement; "csv" reads one function per phase from a lattice file;
/// "none" is a single phase covering the whole domain. Void flags come from
/// the material list. `geom_refine` subdivides every union cell that many
/// extra levels; `geom_level` subdivides to an absolute level.
struct GeometrySpec {
  std::string kind = "none";
  Vec2 anchor{0.0, 0.0};
  double angle = 0.0;
  Vec2 center{0.0, 0.0};
  double radius = 0.0;
  std::array<double, 2> semi_axes{0.0, 0.0};
  std::string path;
  int geom_refine = 0;
  int geom_level = 0;

  friend bool operator==(const GeometrySpec&, const GeometrySpec&) = default;
};

/// Artifact switches. `timing` opts into measured wall times in the seconds
/// column and trades away byte-identical reports between repeated runs.
struct OutputSpec {
  std::string dir = "out";
  bool timing = false;
  bool fields = false;
  bool plot = true;

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

/// Complete description of one study run.
struct StudyConfig {
  std::string study;
  std::string title;
  Box2 domain{{0.0, 0.0}, {1.0, 1.0}};
  std::array<int, 2> base{1, 1};
  std::vector<FieldSpec> fields;
  ScheduleSpec schedule;
  GeometrySpec geometry;
  std::vector<MaterialPhase> materials;
  std::vector<BCSpec> thermal_bcs;
  std::vector<BCSpec> elastic_bcs;
  WeakFormConfig penalties;
  int reference_level = -1;  // self-oracle refinement level, -1 = analytic
  std::vector<std::string> variants;
  OutputSpec output;

  friend bool operator==(const StudyConfig&, const StudyConfig&) = default;
};

/// Parse a config from JSON text. Missing keys take their defaults; unknown
/// keys are rejected. Throws std::runtime_error with a description.
StudyConfig parse_config(const std::string& text);

/// Serialize with every key present, stable order and indentation, so that
/// parse(serialize(c)) == c.
std::string serialize_config(const StudyConfig& cfg);

/// All problems found, empty when the config is runnable.
std::vector<std::string> validate_config(const StudyConfig& cfg);

/// Apply one "path.to.key=value" override; list elements are addressed by
/// index ("fields.0.degree=[3,3]"). Values parse as JSON, falling back to a
/// plain string. Throws std::runtime_error for unknown paths or bad values.
void apply_override(StudyConfig& cfg, const std::string& assignment);

/// Names of the built-in studies.
std::vector<std::string> builtin_studies();

/// Fully populated default config of a built-in study; throws
/// std::invalid_argument for unknown names.
StudyConfig builtin_config(const std::string& study);

/// Refinement buffer derived from the field degrees (b >= max degree).
int config_buffer(const StudyConfig& cfg);

}  // namespace xthb
