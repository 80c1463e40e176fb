#include "xthb/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace xthb {

namespace {

struct BaryGroup {
  double a, b, c;  // barycentric coordinates, permuted over distinct values
  double w;
};

struct TriRule {
  int degree;
  std::vector<BaryGroup> groups;
};

// Dunavant symmetric rules; weights in area coordinates (sum 1)
const std::vector<TriRule>& tri_rules() {
  static const double t = 1.0 / 3.0;
  static const std::vector<TriRule> rules = {
      {1, {{t, t, t, 1.0}}},
      {2, {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0}}},
      {4,
       {{0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011},
        {0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322}}},
      {5,
       {{t, t, t, 0.225},
        {0.059715871789770, 0.470142064105115, 0.470142064105115, 0.132394152788506},
        {0.797426985353087, 0.101286507323456, 0.101286507323456, 0.125939180544827}}},
      {6,
       {{0.501426509658179, 0.249286745170910, 0.249286745170910, 0.116786275726379},
        {0.873821971016996, 0.063089014491502, 0.063089014491502, 0.050844906370207},
        {0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374}}},
      {8,
       {{t, t, t, 0.144315607677787},
        {0.081414823414554, 0.459292588292723, 0.459292588292723, 0.095091634267285},
        {0.658861384496480, 0.170569307751760, 0.170569307751760, 0.103217370534718},
        {0.898905543365938, 0.050547228317031, 0.050547228317031, 0.032458497623198},
        {0.008394777409958, 0.263112829634638, 0.728492392955404, 0.027230314174435}}}};
  return rules;
}

void push_perms(const BaryGroup& g, std::vector<std::array<double, 4>>& out) {
  const std::array<std::array<double, 3>, 6> perms = {{{g.a, g.b, g.c},
                                                       {g.b, g.c, g.a},
                                                       {g.c, g.a, g.b},
                                                       {g.a, g.c, g.b},
                                                       {g.b, g.a, g.c},
                                                       {g.c, g.b, g.a}}};
  for (const auto& p : perms) {
    bool dup = false;
    for (const auto& q : out)
      dup = dup || (std::abs(q[0] - p[0]) < 1e-15 && std::abs(q[1] - p[1]) < 1e-15 &&
                    std::abs(q[2] - p[2]) < 1e-15);
    if (!dup) out.push_back({p[0], p[1], p[2], g.w});
  }
}

struct GaussRule {
  std::vector<double> x;  // on [-1, 1], symmetric
  std::vector<double> w;
};

const std::array<GaussRule, 5>& gauss_rules() {
  static const std::array<GaussRule, 5> rules = {{
      {{0.0}, {2.0}},
      {{-0.577350269189626, 0.577350269189626}, {1.0, 1.0}},
      {{-0.774596669241483, 0.0, 0.774596669241483},
       {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}},
      {{-0.861136311594053, -0.339981043584856, 0.339981043584856, 0.861136311594053},
       {0.347854845137454, 0.652145154862546, 0.652145154862546, 0.347854845137454}},
      {{-0.906179845938664, -0.538469310105683, 0.0, 0.538469310105683, 0.906179845938664},
       {0.236926885056189, 0.478628670499366, 0.568888888888889, 0.478628670499366,
        0.236926885056189}},
  }};
  return rules;
}

}  // namespace

std::vector<QuadPoint> triangle_rule(const std::array<Vec2, 3>& v, int degree) {
  const TriRule* rule = nullptr;
  for (const TriRule& r : tri_rules())
    if (r.degree >= degree) {
      rule = &r;
      break;
    }
  if (!rule) throw std::invalid_argument("no stored triangle rule of degree >= requested");

  std::vector<std::array<double, 4>> bary;
  for (const BaryGroup& g : rule->groups) push_perms(g, bary);

  const double area = std::abs(tri_area(v[0], v[1], v[2]));
  std::vector<QuadPoint> out;
  out.reserve(bary.size());
  for (const auto& b : bary)
    out.push_back({b[0] * v[0] + b[1] * v[1] + b[2] * v[2], b[3] * area});
  return out;
}

std::vector<QuadPoint> segment_rule(const Vec2& a, const Vec2& b, int degree) {
  const int n = std::max(1, (degree + 2) / 2);
  if (n > 5) throw std::invalid_argument("no stored segment rule of degree >= requested");
  const GaussRule& rule = gauss_rules()[n - 1];

  const double len = (b - a).norm();
  std::vector<QuadPoint> out;
  out.reserve(rule.x.size());
  for (std::size_t k = 0; k < rule.x.size(); ++k) {
    const double t = 0.5 * (1.0 + rule.x[k]);
    out.push_back({a + t * (b - a), 0.5 * rule.w[k] * len});
  }
  return out;
}

}  // namespace xthb
