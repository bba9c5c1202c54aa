#include "semask/service.hpp"

#include <chrono>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "semask/mock_providers.hpp"
#include "semask/remote_providers.hpp"
#include "semask/resources.hpp"
#include "semask/text.hpp"

namespace semask {

namespace {

ordered_json rect_json(const GeoRect& r) {
  ordered_json j;
  j["min_lat"] = r.min_lat();
  j["max_lat"] = r.max_lat();
  j["min_lon"] = r.min_lon();
  j["max_lon"] = r.max_lon();
  return j;
}

GeoRect parse_rect(const ordered_json& j) {
  if (!j.is_object()) throw GeoError("rect must be an object");
  auto num = [&j](const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number()) throw GeoError(fmt::format("rect.{} must be a number", key));
    return it->get<double>();
  };
  return GeoRect(num("min_lat"), num("max_lat"), num("min_lon"), num("max_lon"));
}

HttpResult json_result(int status, const ordered_json& j) {
  return {status, j.dump(-1, ' ', false, ordered_json::error_handler_t::replace)};
}

HttpResult error_result(int status, std::string_view code, std::string_view message) {
  return {status, error_body(code, message)};
}

}  // namespace

std::string error_body(std::string_view code, std::string_view message) {
  ordered_json j;
  j["code"] = code;
  j["message"] = message;
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

std::vector<Region> regions_from_json(const ordered_json& j) {
  if (!j.is_array()) throw std::invalid_argument("region catalog must be a JSON array");
  std::vector<Region> out;
  std::set<std::string> names;
  for (const auto& e : j) {
    const auto name = e.at("name").get<std::string>();
    if (text::trim(name).empty()) throw std::invalid_argument("region name is empty");
    if (!names.insert(name).second) throw std::invalid_argument(fmt::format("duplicate region '{}'", name));
    out.push_back({name, parse_rect(e.at("rect"))});
  }
  return out;
}

std::vector<Region> load_regions(const std::filesystem::path& path) {
  try {
    return regions_from_json(ordered_json::parse(read_file(path)));
  } catch (const std::exception& e) {
    throw std::invalid_argument(fmt::format("{}: {}", path.string(), e.what()));
  }
}

ProviderBundle make_provider_bundle(std::string_view mode, const ProviderConfig& config, std::size_t embed_dim) {
  if (mode == "remote") {
    if (config.has_api_key()) {
      auto cfg = config;
      cfg.embed_dim = embed_dim;
      return {std::make_shared<RemoteEmbedder>(cfg), std::make_shared<RemoteChatProvider>(cfg), false};
    }
    spdlog::warn("{} is not set; starting in offline mode with mock providers", config.api_key_env_name);
  } else if (mode != "mock") {
    throw std::invalid_argument(fmt::format("unknown provider mode '{}' (expected mock or remote)", mode));
  }
  return {std::make_shared<HashingEmbedder>(embed_dim), std::make_shared<MockChatProvider>(), true};
}

ServiceCore::ServiceCore(std::vector<Region> regions, ServiceConfig config)
    : regions_(std::move(regions)), config_(std::move(config)) {}

void ServiceCore::initialize(std::shared_ptr<const SearchIndex> index, std::shared_ptr<Embedder> embedder,
                             std::shared_ptr<ChatProvider> chat, PromptTemplate refine) {
  if (!index || !embedder || !chat) throw std::invalid_argument("service needs an index, an embedder and a chat provider");
  if (index->vectors().dim() != embedder->dimension()) {
    throw std::invalid_argument(fmt::format("embedder dimension {} does not match index dimension {}",
                                            embedder->dimension(), index->vectors().dim()));
  }
  auto b = std::make_shared<const Backend>(Backend{std::move(index), std::move(embedder), std::move(chat), std::move(refine)});
  std::lock_guard lock(mu_);
  backend_ = std::move(b);
}

std::shared_ptr<const ServiceCore::Backend> ServiceCore::backend() const {
  std::lock_guard lock(mu_);
  return backend_;
}

bool ServiceCore::ready() const { return backend() != nullptr; }

HttpResult ServiceCore::query(std::string_view body) const {
  const auto b = backend();
  if (!b) return error_result(503, "not_ready", "the index is still loading");

  ordered_json req;
  try {
    req = ordered_json::parse(body);
  } catch (const std::exception&) {
    return error_result(400, "malformed_json", "request body is not valid JSON");
  }
  if (!req.is_object()) return error_result(400, "invalid_request", "request body must be a JSON object");

  const bool has_region = req.contains("region_name") && !req["region_name"].is_null();
  const bool has_rect = req.contains("rect") && !req["rect"].is_null();
  if (has_region == has_rect) {
    return error_result(400, "invalid_request", "give exactly one of region_name and rect");
  }

  std::optional<GeoRect> rect;
  if (has_region) {
    if (!req["region_name"].is_string()) return error_result(400, "invalid_request", "region_name must be a string");
    const auto name = req["region_name"].get<std::string>();
    for (const auto& r : regions_) {
      if (r.name == name) rect = r.rect;
    }
    if (!rect) return error_result(400, "unknown_region", fmt::format("no region named '{}'", name));
  } else {
    try {
      rect = parse_rect(req["rect"]);
    } catch (const GeoError& e) {
      return error_result(400, "invalid_rect", e.what());
    }
  }

  const auto t = req.find("text");
  if (t == req.end() || !t->is_string() || text::trim(t->get<std::string>()).empty()) {
    return error_result(400, "invalid_text", "text must be a non-empty string");
  }
  std::size_t k = 10;
  if (const auto kit = req.find("k"); kit != req.end() && !kit->is_null()) {
    if (!kit->is_number_integer() || kit->get<std::int64_t>() < 1 ||
        kit->get<std::int64_t>() > static_cast<std::int64_t>(config_.max_k)) {
      return error_result(400, "invalid_k", fmt::format("k must be an integer in [1, {}]", config_.max_k));
    }
    k = kit->get<std::size_t>();
  }

  const Query q(*rect, t->get<std::string>(), k);
  QueryAnswer answer;
  try {
    answer = answer_query(q, *b->index, *b->embedder, *b->chat, b->refine);
  } catch (const ProviderError& e) {
    return error_result(502, "provider_error", e.what());
  }
  const auto& corpus = b->index->corpus();

  ordered_json out;
  out["recommended"] = ordered_json::array();
  for (const auto& r : answer.recommended) {
    const auto* obj = corpus.find(r.id);
    ordered_json e;
    e["id"] = r.id;
    e["name"] = r.name;
    e["lat"] = obj->location.lat();
    e["lon"] = obj->location.lon();
    e["rank"] = r.rank;
    e["reason"] = r.reason;
    out["recommended"].push_back(std::move(e));
  }
  out["filtered_out"] = ordered_json::array();
  for (const auto& c : answer.filtered_out) {
    const auto* obj = corpus.find(c.id);
    ordered_json e;
    e["id"] = c.id;
    e["name"] = c.name;
    e["lat"] = obj->location.lat();
    e["lon"] = obj->location.lon();
    e["similarity"] = c.similarity;
    out["filtered_out"].push_back(std::move(e));
  }
  out["degraded"] = answer.degraded;
  out["timings_ms"] = {{"filter", answer.timings.filter_ms}, {"refine", answer.timings.refine_ms}};
  return json_result(200, out);
}

HttpResult ServiceCore::regions() const {
  ordered_json out = ordered_json::array();
  for (const auto& r : regions_) {
    ordered_json e;
    e["name"] = r.name;
    e["rect"] = rect_json(r.rect);
    out.push_back(std::move(e));
  }
  return json_result(200, out);
}

HttpResult ServiceCore::object(std::string_view id) const {
  const auto b = backend();
  if (!b) return error_result(503, "not_ready", "the index is still loading");
  const auto* obj = b->index->corpus().find(id);
  if (!obj) return error_result(404, "not_found", fmt::format("no object with id '{}'", id));
  return json_result(200, object_to_json(*obj, false));
}

HttpResult ServiceCore::health() const {
  const auto b = backend();
  ordered_json out;
  out["status"] = b ? "ok" : "starting";
  out["corpus_size"] = b ? b->index->corpus().size() : 0;
  out["index_ready"] = b != nullptr;
  return json_result(200, out);
}

HttpService::HttpService(ServiceCore& core) : core_(core), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  const std::string origin = core_.config().cors_origin;
  auto reply = [origin](httplib::Response& res, const HttpResult& r) {
    res.status = r.status;
    if (!origin.empty()) res.set_header("Access-Control-Allow-Origin", origin);
    res.set_content(r.body, "application/json");
  };

  srv.Post("/api/query", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, core_.query(req.body));
  });
  srv.Get("/api/regions", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, core_.regions()); });
  srv.Get("/api/health", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, core_.health()); });
  srv.Get(R"(/api/objects/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, core_.object(req.matches[1].str()));
  });
  srv.Options(R"(/api/.*)", [origin](const httplib::Request&, httplib::Response& res) {
    if (!origin.empty()) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
    res.status = 204;
  });

  srv.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "unknown error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    spdlog::error("request failed: {}", what);
    reply(res, {500, error_body("internal", "internal server error")});
  });
  srv.set_error_handler([reply](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty() && res.status == 404) reply(res, {404, error_body("not_found", "no such route")});
  });
  srv.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::info(R"({{"event":"access","method":"{}","path":"{}","status":{},"bytes":{}}})", req.method, req.path,
                 res.status, res.body.size());
  });

  if (!core_.config().static_dir.empty() && !srv.set_mount_point("/", core_.config().static_dir.string())) {
    spdlog::warn("static directory {} not found; not serving assets", core_.config().static_dir.string());
  }
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = server_->bind_to_any_port(host);
    if (p < 0) throw std::runtime_error(fmt::format("cannot bind {}", host));
    return p;
  }
  if (!server_->bind_to_port(host, port)) throw std::runtime_error(fmt::format("cannot bind {}:{}", host, port));
  return port;
}

void HttpService::listen() { server_->listen_after_bind(); }

void HttpService::wait_until_ready() const { server_->wait_until_ready(); }

void HttpService::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

bool HttpService::running() const { return server_->is_running(); }

}  // namespace semask
