#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semask/geo.hpp"
#include "semask/object.hpp"

namespace semask {

/// Uniform lat/lon grid. A point lives in cell
/// (floor(lat / cell_size), floor(lon / cell_size)). Immutable after build.
class GridIndex {
 public:
  struct Entry {
    std::string id;
    GeoPoint location;
  };

  explicit GridIndex(double cell_size_deg = 0.01);

  static GridIndex build(const std::vector<GeoTextualObject>& objects, double cell_size_deg = 0.01);
  static GridIndex build(const Corpus& corpus, double cell_size_deg = 0.01) {
    return build(corpus.objects(), cell_size_deg);
  }

  void add(std::string id, const GeoPoint& p);

  /// Ids whose location satisfies contains(rect, .), ascending.
  std::vector<std::string> range_query(const GeoRect& rect) const;

  double cell_size() const noexcept { return cell_size_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t occupied_cells() const noexcept { return cells_.size(); }
  std::pair<std::int64_t, std::int64_t> cell_of(const GeoPoint& p) const;

 private:
  static std::uint64_t key(std::int64_t row, std::int64_t col);
  template <typename F>
  void scan_cell(std::int64_t row, std::int64_t col, F&& f) const;

  double cell_size_;
  std::size_t size_ = 0;
  std::unordered_map<std::uint64_t, std::vector<Entry>> cells_;
  std::vector<std::pair<std::int64_t, std::int64_t>> occupied_;
};

}  // namespace semask
