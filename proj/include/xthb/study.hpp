#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "xthb/config.hpp"
#include "xthb/geometry2d.hpp"

namespace xthb {

/// One row of a study report: one field on one refinement step (or, for the
/// plate study, one refinement configuration). `h` is the driving mesh size
/// of the row's series: the finest cell edge of the field's activation index,
/// except for series that converge in another field's mesh (documented per
/// study). Rates are successive log2 error ratios per unit log2 mesh ratio,
/// zero on the first row of each series.
struct StepRecord {
  int step = 0;
  std::string field;
  int n_dof = 0;
  double h = 0.0;
  double err_l2 = 0.0;
  double err_h1 = 0.0;
  double rate_l2 = 0.0;
  double rate_h1 = 0.0;
  double seconds = 0.0;
};

/// Solved scalar field sampled on the cut integration mesh as a triangle
/// soup: three consecutive vertices per triangle, each with the field value.
struct FieldExport {
  struct Vertex {
    Vec2 p;
    double v = 0.0;
  };
  std::string field;
  std::vector<Vertex> vertices;  // 3 per triangle
};

struct StudyReport {
  std::string study;
  std::vector<StepRecord> rows;
  nlohmann::json summary;
  std::vector<FieldExport> exports;  // populated when output.fields is set
};

/// Execute a study end to end: per step, refine the forest, build the bases,
/// union and integration meshes, enrich, assemble, solve and measure errors.
/// Throws std::invalid_argument when the config does not validate and
/// std::runtime_error (or GeometryResolutionError) with an actionable
/// message on geometry or solver failures.
StudyReport run_study(const StudyConfig& cfg);

}  // namespace xthb
