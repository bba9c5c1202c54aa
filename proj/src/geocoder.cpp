#include "semask/geocoder.hpp"

#include <httplib.h>
#include <json.hpp>
#include <fmt/format.h>

#include "semask/resources.hpp"

namespace semask {

namespace {

std::optional<std::string> non_empty(const nlohmann::json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (j.contains(k) && j[k].is_string() && !j[k].get<std::string>().empty()) return j[k].get<std::string>();
  }
  return std::nullopt;
}

}  // namespace

bool AddressEnrichment::any() const {
  auto set = [](const std::optional<std::string>& s) { return s && !s->empty(); };
  return set(city) || set(county) || set(suburb) || set(neighborhood);
}

OfflineGeocoder OfflineGeocoder::load(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(read_file(path));
  std::vector<Entry> entries;
  for (const auto& e : j) {
    const auto& r = e.at("rect");
    GeoRect rect(r.at("min_lat").get<double>(), r.at("max_lat").get<double>(), r.at("min_lon").get<double>(),
                 r.at("max_lon").get<double>());
    AddressEnrichment names{non_empty(e, {"city"}), non_empty(e, {"county"}), non_empty(e, {"suburb"}),
                            non_empty(e, {"neighborhood"})};
    entries.push_back({rect, std::move(names)});
  }
  return OfflineGeocoder(std::move(entries));
}

AddressEnrichment OfflineGeocoder::reverse(const GeoPoint& p) {
  for (const auto& e : entries_) {
    if (contains(e.rect, p) && e.names.any()) return e.names;
  }
  throw GeocoderError(fmt::format("no offline geocoder entry covers ({}, {})", p.lat(), p.lon()));
}

HttpReverseGeocoder::HttpReverseGeocoder(std::string base_url, std::chrono::milliseconds timeout,
                                         std::string user_agent)
    : timeout_(timeout), user_agent_(std::move(user_agent)) {
  const auto scheme = base_url.find("://");
  if (scheme == std::string::npos) throw std::invalid_argument("geocoder base_url needs a scheme");
  const auto slash = base_url.find('/', scheme + 3);
  scheme_host_port_ = base_url.substr(0, slash);
  path_prefix_ = slash == std::string::npos ? "" : base_url.substr(slash);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

AddressEnrichment HttpReverseGeocoder::reverse(const GeoPoint& p) {
  httplib::Client cli(scheme_host_port_);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  const auto path = fmt::format("{}/reverse?format=jsonv2&lat={:.7f}&lon={:.7f}", path_prefix_, p.lat(), p.lon());
  auto res = cli.Get(path, httplib::Headers{{"User-Agent", user_agent_}});
  if (!res) throw GeocoderError("reverse geocoding failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw GeocoderError(fmt::format("reverse geocoding returned HTTP {}", res->status));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw GeocoderError(std::string("reverse geocoding response is not JSON: ") + e.what());
  }
  if (!j.contains("address") || !j["address"].is_object()) throw GeocoderError("response has no address");
  const auto& a = j["address"];
  AddressEnrichment out{non_empty(a, {"city", "town", "village"}), non_empty(a, {"county"}),
                        non_empty(a, {"suburb"}), non_empty(a, {"neighbourhood", "neighborhood"})};
  if (!out.any()) throw GeocoderError("response address has no city/county/suburb/neighborhood");
  return out;
}

}  // namespace semask
