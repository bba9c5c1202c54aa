#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semask/geo.hpp"

namespace semask {

struct AddressEnrichment {
  std::optional<std::string> city;
  std::optional<std::string> county;
  std::optional<std::string> suburb;
  std::optional<std::string> neighborhood;

  bool any() const;
};

class GeocoderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coordinates -> administrative names. Throws GeocoderError on failure,
/// including "nothing known about this point".
class ReverseGeocoder {
 public:
  virtual ~ReverseGeocoder() = default;
  virtual AddressEnrichment reverse(const GeoPoint& p) = 0;
};

/// Table of rect -> names; the first rect containing the point wins.
///
/// File format: JSON array of
///   {"rect": {"min_lat", "max_lat", "min_lon", "max_lon"},
///    "city", "county", "suburb", "neighborhood"}   (names optional)
class OfflineGeocoder final : public ReverseGeocoder {
 public:
  struct Entry {
    GeoRect rect;
    AddressEnrichment names;
  };

  explicit OfflineGeocoder(std::vector<Entry> entries) : entries_(std::move(entries)) {}
  static OfflineGeocoder load(const std::filesystem::path& path);

  AddressEnrichment reverse(const GeoPoint& p) override;

 private:
  std::vector<Entry> entries_;
};

/// Nominatim-style reverse geocoding over HTTP:
/// GET {base_url}/reverse?format=jsonv2&lat=..&lon=.. -> {"address": {...}}.
class HttpReverseGeocoder final : public ReverseGeocoder {
 public:
  HttpReverseGeocoder(std::string base_url, std::chrono::milliseconds timeout = std::chrono::seconds(10),
                      std::string user_agent = "semask-ingest/1.0");

  AddressEnrichment reverse(const GeoPoint& p) override;

 private:
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::chrono::milliseconds timeout_;
  std::string user_agent_;
};

}  // namespace semask
