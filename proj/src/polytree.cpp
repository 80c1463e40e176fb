#include "xthb/polytree.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace xthb {

PolyTreeForest::PolyTreeForest(const Box2& domain, int nx, int ny, int num_ais)
    : domain_(domain), nx_(nx), ny_(ny), num_ais_(num_ais) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("PolyTreeForest: base grid must be >= 1x1");
  if (num_ais < 1) throw std::invalid_argument("PolyTreeForest: need at least one AI");
  if (domain.extent(0) <= 0.0 || domain.extent(1) <= 0.0)
    throw std::invalid_argument("PolyTreeForest: empty domain");
  levels_.resize(1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      create_cell({0, i, j});
      for (int ai = 0; ai < num_ais; ++ai) set_state(ai, {0, i, j}, CellState::Active);
    }
}

int PolyTreeForest::max_level() const {
  for (int l = int(levels_.size()) - 1; l >= 0; --l)
    if (!levels_[l].index.empty()) return l;
  return 0;
}

Box2 PolyTreeForest::cell_box(const CellKey& c) const {
  const double hx = cell_size(c.level, 0);
  const double hy = cell_size(c.level, 1);
  const Vec2 lo{domain_.lo.x + c.i * hx, domain_.lo.y + c.j * hy};
  return {lo, {lo.x + hx, lo.y + hy}};
}

const std::uint8_t* PolyTreeForest::slot(const CellKey& c) const {
  if (c.level < 0 || c.level >= int(levels_.size())) return nullptr;
  const auto& lvl = levels_[c.level];
  auto it = lvl.index.find(pack(c.i, c.j));
  if (it == lvl.index.end()) return nullptr;
  return &lvl.states[std::size_t(it->second) * num_ais_];
}

std::uint8_t* PolyTreeForest::slot(const CellKey& c) {
  return const_cast<std::uint8_t*>(static_cast<const PolyTreeForest*>(this)->slot(c));
}

bool PolyTreeForest::exists(const CellKey& c) const { return slot(c) != nullptr; }

CellState PolyTreeForest::state(int ai, const CellKey& c) const {
  const std::uint8_t* s = slot(c);
  if (!s) throw std::invalid_argument("PolyTreeForest::state: cell does not exist");
  return CellState(s[ai]);
}

void PolyTreeForest::create_cell(const CellKey& c) {
  if (c.level >= int(levels_.size())) levels_.resize(c.level + 1);
  auto& lvl = levels_[c.level];
  const auto key = pack(c.i, c.j);
  if (lvl.index.count(key)) return;
  lvl.index.emplace(key, std::uint32_t(lvl.coords.size()));
  lvl.coords.emplace_back(c.i, c.j);
  lvl.states.resize(lvl.states.size() + num_ais_, std::uint8_t(CellState::Inactive));
}

void PolyTreeForest::set_state(int ai, const CellKey& c, CellState s) {
  std::uint8_t* p = slot(c);
  if (!p) throw std::logic_error("PolyTreeForest::set_state: missing cell");
  p[ai] = std::uint8_t(s);
}

CellKey PolyTreeForest::covering_active(int ai, const CellKey& pos, bool& covered_deeper) const {
  covered_deeper = false;
  for (int l = 0; l <= pos.level; ++l) {
    const CellKey c{l, pos.i >> (pos.level - l), pos.j >> (pos.level - l)};
    const std::uint8_t* s = slot(c);
    if (!s) throw std::runtime_error("PolyTreeForest: inconsistent coverage walk");
    switch (CellState(s[ai])) {
      case CellState::Active:
        return c;
      case CellState::Refined:
        if (l == pos.level) {
          covered_deeper = true;
          return pos;
        }
        break;
      case CellState::Inactive:
        throw std::runtime_error("PolyTreeForest: inactive cell below active partition");
    }
  }
  throw std::logic_error("PolyTreeForest::covering_active: unreachable");
}

CellKey PolyTreeForest::active_cell_containing(int ai, const Vec2& p) const {
  const double fx = (p.x - domain_.lo.x) / domain_.extent(0);
  const double fy = (p.y - domain_.lo.y) / domain_.extent(1);
  CellKey c{0, std::clamp(int(std::floor(fx * nx_)), 0, nx_ - 1),
            std::clamp(int(std::floor(fy * ny_)), 0, ny_ - 1)};
  while (state(ai, c) == CellState::Refined) {
    const double hx = cell_size(c.level + 1, 0);
    const double hy = cell_size(c.level + 1, 1);
    const int ci = std::clamp(int(std::floor((p.x - domain_.lo.x) / hx)), 2 * c.i, 2 * c.i + 1);
    const int cj = std::clamp(int(std::floor((p.y - domain_.lo.y) / hy)), 2 * c.j, 2 * c.j + 1);
    c = {c.level + 1, ci, cj};
  }
  return c;
}

void PolyTreeForest::refine(int ai, std::span<const CellKey> flags, int b_buffer) {
  if (ai < 0 || ai >= num_ais_) throw std::invalid_argument("refine: bad AI");
  if (b_buffer < 1) throw std::invalid_argument("refine: b_buffer must be >= 1");
  std::set<CellKey, CellKeyLess> flagged;
  for (const CellKey& c : flags) {
    if (!in_domain(c) || !exists(c)) throw std::invalid_argument("refine: flagged cell does not exist");
    if (state(ai, c) != CellState::Active)
      throw std::invalid_argument("refine: flagged cell is not Active for this AI");
    if (c.level + 1 >= kMaxLevels) throw std::runtime_error("refine: level cap (16) reached");
    flagged.insert(c);
  }

  // Buffer closure, run to a fixed point. For a flagged level-l cell, every
  // in-domain level-l lattice position within componentwise center distance
  // b_buffer * h^l must be covered at level >= l-1 afterwards; positions still
  // covered at level l-1 get their covering Active cell flagged too.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<CellKey> snapshot(flagged.begin(), flagged.end());
    for (const CellKey& c : snapshot) {
      if (c.level == 0) continue;
      for (int dj = -b_buffer; dj <= b_buffer; ++dj) {
        for (int di = -b_buffer; di <= b_buffer; ++di) {
          const CellKey q{c.level, c.i + di, c.j + dj};
          if (!in_domain(q)) continue;
          bool deeper = false;
          const CellKey a = covering_active(ai, q, deeper);
          if (deeper || a.level >= c.level) continue;
          if (a.level < c.level - 1)
            throw std::runtime_error("refine: forest violates buffer regularity near flagged cell");
          if (flagged.insert(a).second) changed = true;
        }
      }
    }
  }

  for (const CellKey& c : flagged) {
    if (c.level + 1 >= kMaxLevels) throw std::runtime_error("refine: level cap (16) reached");
    set_state(ai, c, CellState::Refined);
    for (int cj = 0; cj <= 1; ++cj)
      for (int ci = 0; ci <= 1; ++ci) {
        const CellKey ch{c.level + 1, 2 * c.i + ci, 2 * c.j + cj};
        create_cell(ch);
        set_state(ai, ch, CellState::Active);
      }
  }
}

std::vector<CellKey> PolyTreeForest::active_cells(int ai) const {
  std::vector<CellKey> out;
  for (int l = 0; l < int(levels_.size()); ++l) {
    const auto& lvl = levels_[l];
    for (std::size_t s = 0; s < lvl.coords.size(); ++s)
      if (CellState(lvl.states[s * num_ais_ + ai]) == CellState::Active)
        out.push_back({l, lvl.coords[s].first, lvl.coords[s].second});
  }
  std::sort(out.begin(), out.end(), CellKeyLess{});
  return out;
}

std::vector<CellKey> PolyTreeForest::all_cells() const {
  std::vector<CellKey> out;
  for (int l = 0; l < int(levels_.size()); ++l)
    for (const auto& [i, j] : levels_[l].coords) out.push_back({l, i, j});
  std::sort(out.begin(), out.end(), CellKeyLess{});
  return out;
}

std::uint64_t PolyTreeForest::cell_id(const CellKey& c) const {
  std::uint64_t offset = 0;
  std::uint64_t block = std::uint64_t(nx_) * std::uint64_t(ny_);
  for (int l = 0; l < c.level; ++l) {
    offset += block;
    block *= 4;
  }
  const int i0 = c.i >> c.level;
  const int j0 = c.j >> c.level;
  std::uint64_t id = std::uint64_t(j0) * nx_ + i0;
  for (int l = c.level - 1; l >= 0; --l) {
    const std::uint64_t bits =
        ((std::uint64_t(c.j >> l) & 1u) << 1) | (std::uint64_t(c.i >> l) & 1u);
    id = id * 4 + bits;
  }
  return offset + id;
}

std::string PolyTreeForest::check_buffer_regularity(int ai, int b) const {
  for (const CellKey& c : active_cells(ai)) {
    if (c.level == 0) continue;
    for (int dj = -b; dj <= b; ++dj)
      for (int di = -b; di <= b; ++di) {
        const CellKey q{c.level, c.i + di, c.j + dj};
        if (!in_domain(q)) continue;
        bool deeper = false;
        const CellKey a = covering_active(ai, q, deeper);
        if (!deeper && a.level < c.level - 1) {
          std::ostringstream os;
          os << "buffer regularity violated for ai " << ai << ": active cell (level " << c.level
             << ", i " << c.i << ", j " << c.j << ") has level-" << a.level
             << " active cell within range b=" << b;
          return os.str();
        }
      }
  }
  return {};
}

std::string PolyTreeForest::dump() const {
  std::ostringstream os;
  os << "polytree nx=" << nx_ << " ny=" << ny_ << " ais=" << num_ais_
     << " max_level=" << max_level() << "\n";
  for (const CellKey& c : all_cells()) {
    os << "cell level=" << c.level << " i=" << c.i << " j=" << c.j << " id=" << cell_id(c)
       << " states=";
    const std::uint8_t* s = slot(c);
    for (int ai = 0; ai < num_ais_; ++ai)
      os << "IAR"[s[ai]];
    os << "\n";
  }
  return os.str();
}

}  // namespace xthb
