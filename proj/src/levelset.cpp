#include "xthb/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace xthb {

std::function<double(const Vec2&)> levelset_circle(Vec2 center, double radius) {
  return [center, radius](const Vec2& p) {
    return radius - std::hypot(p.x - center.x, p.y - center.y);
  };
}

std::function<double(const Vec2&)> levelset_ellipse(Vec2 center, double a, double b) {
  return [center, a, b](const Vec2& p) {
    const double rx = (p.x - center.x) / a, ry = (p.y - center.y) / b;
    // scaled pseudo-distance: exact zero set, near-unit gradient at the boundary
    return (1.0 - std::sqrt(rx * rx + ry * ry)) * std::min(a, b);
  };
}

std::function<double(const Vec2&)> levelset_halfplane(Vec2 anchor, double angle) {
  const Vec2 d{std::cos(angle), std::sin(angle)};
  return [anchor, d](const Vec2& p) {
    return d.x * (p.y - anchor.y) - d.y * (p.x - anchor.x);
  };
}

std::function<double(const Vec2&)> levelset_box(const Box2& box) {
  return [box](const Vec2& p) {
    return std::min(std::min(p.x - box.lo.x, box.hi.x - p.x),
                    std::min(p.y - box.lo.y, box.hi.y - p.y));
  };
}

std::function<double(const Vec2&)> levelset_lshape() {
  return [](const Vec2& p) {
    const double square = std::min(1.0 - std::abs(p.x), 1.0 - std::abs(p.y));
    const double notch = std::max(-p.x, p.y);
    return std::min(square, notch);
  };
}

std::function<double(const Vec2&)> levelset_negate(std::function<double(const Vec2&)> f) {
  return [f = std::move(f)](const Vec2& p) { return -f(p); };
}

std::vector<std::function<double(const Vec2&)>> levelset_from_csv(const std::string& path,
                                                                  const Box2& domain) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("level set: cannot open " + path);

  struct Row {
    int i, j;
    std::vector<double> phi;
  };
  std::vector<Row> rows;
  int max_i = -1, max_j = -1;
  std::size_t n_phases = 0;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Row row;
    if (!(ls >> row.i >> row.j)) {
      if (line_no == 1) continue;  // header
      throw std::runtime_error("level set: bad row at line " + std::to_string(line_no));
    }
    double v;
    while (ls >> v) row.phi.push_back(v);
    if (row.phi.empty())
      throw std::runtime_error("level set: no values at line " + std::to_string(line_no));
    if (n_phases == 0) n_phases = row.phi.size();
    if (row.phi.size() != n_phases)
      throw std::runtime_error("level set: inconsistent column count at line " +
                               std::to_string(line_no));
    if (row.i < 0 || row.j < 0)
      throw std::runtime_error("level set: negative index at line " + std::to_string(line_no));
    max_i = std::max(max_i, row.i);
    max_j = std::max(max_j, row.j);
    rows.push_back(std::move(row));
  }
  if (max_i < 1 || max_j < 1) throw std::runtime_error("level set: lattice too small in " + path);

  const int ni = max_i + 1, nj = max_j + 1;
  if (rows.size() != std::size_t(ni) * nj)
    throw std::runtime_error("level set: expected " + std::to_string(std::size_t(ni) * nj) +
                             " lattice rows, found " + std::to_string(rows.size()));

  auto grid = std::make_shared<std::vector<double>>(std::size_t(ni) * nj * n_phases,
                                                    std::numeric_limits<double>::quiet_NaN());
  for (const Row& row : rows)
    for (std::size_t m = 0; m < n_phases; ++m)
      (*grid)[(std::size_t(row.j) * ni + row.i) * n_phases + m] = row.phi[m];
  for (double v : *grid)
    if (std::isnan(v)) throw std::runtime_error("level set: duplicate or missing lattice node");

  std::vector<std::function<double(const Vec2&)>> result;
  for (std::size_t m = 0; m < n_phases; ++m)
    result.push_back([grid, domain, ni, nj, n_phases, m](const Vec2& p) {
      const double fx = std::clamp((p.x - domain.lo.x) / domain.extent(0), 0.0, 1.0) * (ni - 1);
      const double fy = std::clamp((p.y - domain.lo.y) / domain.extent(1), 0.0, 1.0) * (nj - 1);
      const int i = std::min(int(fx), ni - 2), j = std::min(int(fy), nj - 2);
      const double tx = fx - i, ty = fy - j;
      auto at = [&](int ii, int jj) {
        return (*grid)[(std::size_t(jj) * ni + ii) * n_phases + m];
      };
      return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) +
             (1 - tx) * ty * at(i, j + 1) + tx * ty * at(i + 1, j + 1);
    });
  return result;
}

}  // namespace xthb
