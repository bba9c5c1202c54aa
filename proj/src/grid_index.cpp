#include "semask/grid_index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semask {

GridIndex::GridIndex(double cell_size_deg) : cell_size_(cell_size_deg) {
  if (!(cell_size_deg > 0.0)) throw std::invalid_argument("grid cell size must be > 0");
}

GridIndex GridIndex::build(const std::vector<GeoTextualObject>& objects, double cell_size_deg) {
  GridIndex g(cell_size_deg);
  for (const auto& o : objects) g.add(o.id, o.location);
  return g;
}

std::pair<std::int64_t, std::int64_t> GridIndex::cell_of(const GeoPoint& p) const {
  return {static_cast<std::int64_t>(std::floor(p.lat() / cell_size_)),
          static_cast<std::int64_t>(std::floor(p.lon() / cell_size_))};
}

std::uint64_t GridIndex::key(std::int64_t row, std::int64_t col) {
  return (static_cast<std::uint64_t>(row) << 32) ^ (static_cast<std::uint64_t>(col) & 0xffffffffULL);
}

void GridIndex::add(std::string id, const GeoPoint& p) {
  const auto [row, col] = cell_of(p);
  auto [it, inserted] = cells_.try_emplace(key(row, col));
  if (inserted) occupied_.emplace_back(row, col);
  it->second.push_back({std::move(id), p});
  ++size_;
}

template <typename F>
void GridIndex::scan_cell(std::int64_t row, std::int64_t col, F&& f) const {
  auto it = cells_.find(key(row, col));
  if (it == cells_.end()) return;
  for (const auto& e : it->second) f(e);
}

std::vector<std::string> GridIndex::range_query(const GeoRect& rect) const {
  std::vector<std::string> out;
  if (size_ == 0) return out;
  const auto [r0, c0] = cell_of(GeoPoint(rect.min_lat(), rect.min_lon()));
  const auto [r1, c1] = cell_of(GeoPoint(rect.max_lat(), rect.max_lon()));
  auto collect = [&](const Entry& e) {
    if (contains(rect, e.location)) out.push_back(e.id);
  };
  const double span_cells = static_cast<double>(r1 - r0 + 1) * static_cast<double>(c1 - c0 + 1);
  if (span_cells <= static_cast<double>(occupied_.size())) {
    for (auto r = r0; r <= r1; ++r) {
      for (auto c = c0; c <= c1; ++c) scan_cell(r, c, collect);
    }
  } else {
    // Huge rects: walk the occupied cells instead of the covered ones.
    for (const auto& [r, c] : occupied_) {
      if (r >= r0 && r <= r1 && c >= c0 && c <= c1) scan_cell(r, c, collect);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace semask
