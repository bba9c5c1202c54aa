#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semask {

/// Mean Earth radius (IUGG), used for every great-circle computation.
inline constexpr double kEarthRadiusKm = 6371.0088;

/// Length of one degree of arc on the spherical Earth (~111.195 km).
inline constexpr double kKmPerDegree = 2.0 * 3.14159265358979323846 * kEarthRadiusKm / 360.0;

class GeoError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A WGS84-style coordinate pair in degrees. Rejects out-of-range values.
class GeoPoint {
 public:
  GeoPoint(double lat, double lon);

  double lat() const noexcept { return lat_; }
  double lon() const noexcept { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_;
  double lon_;
};

/// Axis-aligned lat/lon rectangle. Never crosses the antimeridian.
class GeoRect {
 public:
  GeoRect(double min_lat, double max_lat, double min_lon, double max_lon);

  double min_lat() const noexcept { return min_lat_; }
  double max_lat() const noexcept { return max_lat_; }
  double min_lon() const noexcept { return min_lon_; }
  double max_lon() const noexcept { return max_lon_; }

  GeoPoint center() const { return {(min_lat_ + max_lat_) / 2, (min_lon_ + max_lon_) / 2}; }

  friend bool operator==(const GeoRect&, const GeoRect&) = default;

 private:
  double min_lat_;
  double max_lat_;
  double min_lon_;
  double max_lon_;
};

/// Boundary-inclusive containment on all four edges.
bool contains(const GeoRect& rect, const GeoPoint& p) noexcept;

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept;

/// Builds a rect centred on `center` whose E/W edge midpoints lie width_km/2
/// and N/S edge midpoints height_km/2 from the centre. Throws GeoError near
/// the poles or when the rect would leave the valid coordinate range.
GeoRect rect_from_center(const GeoPoint& center, double width_km, double height_km);

/// Free-text spatial keyword query: a range, a textual constraint and k.
class Query {
 public:
  Query(GeoRect range, std::string text, std::size_t k = 10);

  const GeoRect& range() const noexcept { return range_; }
  const std::string& text() const noexcept { return text_; }
  std::size_t k() const noexcept { return k_; }

  /// Whitespace-separated token count of the text. Informational only.
  std::size_t token_count() const;

 private:
  GeoRect range_;
  std::string text_;
  std::size_t k_;
};

}  // namespace semask
