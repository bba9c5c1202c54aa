#include "semask/geo.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

namespace semask {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

bool is_blank(const std::string& s) {
  for (unsigned char c : s) {
    if (!std::isspace(c)) return false;
  }
  return true;
}

}  // namespace

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
  if (!(lat >= -90.0 && lat <= 90.0)) {
    throw GeoError(fmt::format("latitude {} outside [-90, 90]", lat));
  }
  if (!(lon >= -180.0 && lon <= 180.0)) {
    throw GeoError(fmt::format("longitude {} outside [-180, 180]", lon));
  }
}

GeoRect::GeoRect(double min_lat, double max_lat, double min_lon, double max_lon)
    : min_lat_(min_lat), max_lat_(max_lat), min_lon_(min_lon), max_lon_(max_lon) {
  // Validates each corner's coordinates; NaN fails here too.
  GeoPoint{min_lat, min_lon};
  GeoPoint{max_lat, max_lon};
  if (min_lat > max_lat) {
    throw GeoError(fmt::format("min_lat {} > max_lat {}", min_lat, max_lat));
  }
  if (min_lon > max_lon) {
    // Also the shape an antimeridian-crossing rect would take.
    throw GeoError(fmt::format("min_lon {} > max_lon {} (antimeridian-crossing rects are not supported)",
                               min_lon, max_lon));
  }
}

bool contains(const GeoRect& rect, const GeoPoint& p) noexcept {
  return rect.min_lat() <= p.lat() && p.lat() <= rect.max_lat() && rect.min_lon() <= p.lon() &&
         p.lon() <= rect.max_lon();
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double phi1 = a.lat() * kDegToRad;
  const double phi2 = b.lat() * kDegToRad;
  const double dphi = (b.lat() - a.lat()) * kDegToRad;
  const double dlambda = (b.lon() - a.lon()) * kDegToRad;
  const double s1 = std::sin(dphi / 2);
  const double s2 = std::sin(dlambda / 2);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

GeoRect rect_from_center(const GeoPoint& center, double width_km, double height_km) {
  if (!(width_km >= 0.0) || !(height_km >= 0.0)) {
    throw GeoError(fmt::format("negative extent {} x {} km", width_km, height_km));
  }
  const double lat_half = height_km / 2.0 / kKmPerDegree;
  const double cos_lat = std::cos(center.lat() * kDegToRad);
  double lon_half = 0.0;
  if (width_km > 0.0) {
    if (cos_lat < 1e-9) {
      throw GeoError(fmt::format("center latitude {} too close to a pole for a {} km wide rect",
                                 center.lat(), width_km));
    }
    lon_half = width_km / 2.0 / (kKmPerDegree * cos_lat);
  }
  const double min_lat = center.lat() - lat_half;
  const double max_lat = center.lat() + lat_half;
  const double min_lon = center.lon() - lon_half;
  const double max_lon = center.lon() + lon_half;
  if (min_lat < -90.0 || max_lat > 90.0 || min_lon < -180.0 || max_lon > 180.0) {
    throw GeoError(fmt::format("rect [{}, {}] x [{}, {}] leaves the valid coordinate range", min_lat,
                               max_lat, min_lon, max_lon));
  }
  return GeoRect{min_lat, max_lat, min_lon, max_lon};
}

Query::Query(GeoRect range, std::string text, std::size_t k)
    : range_(range), text_(std::move(text)), k_(k) {
  if (is_blank(text_)) throw std::invalid_argument("query text is empty");
  if (k_ < 1) throw std::invalid_argument("query k must be >= 1");
}

std::size_t Query::token_count() const {
  std::istringstream in(text_);
  std::size_t n = 0;
  for (std::string tok; in >> tok;) ++n;
  return n;
}

}  // namespace semask
