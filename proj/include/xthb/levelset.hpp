#pragma once

#include <functional>
#include <string>
#include <vector>

#include "xthb/geometry2d.hpp"

namespace xthb {

/// Multi-phase level-set description: one scalar function per phase, a point
/// belongs to the phase with the largest value (lowest index on ties). Phases
/// marked void carry no unknowns; their cells and interfaces still shape the
/// integration domain of the material phases.
class LevelSetGeometry {
 public:
  struct Phase {
    std::function<double(const Vec2&)> value;
    bool is_void = false;
    std::string name;
  };

  LevelSetGeometry() = default;
  explicit LevelSetGeometry(std::vector<Phase> phases) : phases_(std::move(phases)) {}

  void add_phase(std::function<double(const Vec2&)> value, bool is_void = false,
                 std::string name = {}) {
    phases_.push_back(Phase{std::move(value), is_void, std::move(name)});
  }

  int num_phases() const { return int(phases_.size()); }
  bool is_void(int m) const { return phases_[m].is_void; }
  const std::string& name(int m) const { return phases_[m].name; }
  double value(int m, const Vec2& p) const { return phases_[m].value(p); }

  int phase_at(const Vec2& p) const {
    int best = 0;
    double v = phases_[0].value(p);
    for (int m = 1; m < int(phases_.size()); ++m) {
      const double w = phases_[m].value(p);
      if (w > v) {
        v = w;
        best = m;
      }
    }
    return best;
  }

 private:
  std::vector<Phase> phases_;
};

/// Signed-distance-style primitives used by the studies and the config layer.
std::function<double(const Vec2&)> levelset_circle(Vec2 center, double radius);
std::function<double(const Vec2&)> levelset_ellipse(Vec2 center, double a, double b);
/// Signed distance to the line through `anchor` with inclination `angle`,
/// positive on the left of the direction (cos angle, sin angle). An angle of
/// pi/2 gives a vertical line, positive for x < anchor.x.
std::function<double(const Vec2&)> levelset_halfplane(Vec2 anchor, double angle);
std::function<double(const Vec2&)> levelset_box(const Box2& box);
/// L-shaped region [-1,1]^2 minus the quadrant {x >= 0, y <= 0}.
std::function<double(const Vec2&)> levelset_lshape();
/// Pointwise negation, for building complement phases.
std::function<double(const Vec2&)> levelset_negate(std::function<double(const Vec2&)> f);

/// Bilinear interpolation of per-phase samples on a regular lattice over
/// `domain`, read from a CSV file with columns i, j, phi_1, ..., phi_N
/// (header optional). Lattice extents are inferred from the index ranges;
/// every lattice node must be present exactly once. Returns one function per
/// phase column. Throws std::runtime_error on malformed input.
std::vector<std::function<double(const Vec2&)>> levelset_from_csv(const std::string& path,
                                                                  const Box2& domain);

}  // namespace xthb
