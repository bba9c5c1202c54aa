#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "semask/geo.hpp"
#include "semask/object.hpp"
#include "semask/prompts.hpp"
#include "semask/providers.hpp"
#include "semask/retrieval.hpp"

namespace httplib {
class Server;
}

namespace semask {

struct Region {
  std::string name;
  GeoRect rect;
};

/// JSON array of {name, rect: {min_lat, max_lat, min_lon, max_lon}}. Rects
/// are validated and names must be unique; file order is kept.
std::vector<Region> load_regions(const std::filesystem::path& path);
std::vector<Region> regions_from_json(const ordered_json& j);

struct ServiceConfig {
  /// Access-Control-Allow-Origin value; empty disables CORS headers.
  std::string cors_origin = "http://localhost:5173";
  std::size_t max_k = 50;
  /// Served under / when set (built webapp assets).
  std::filesystem::path static_dir;
};

struct ProviderBundle {
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<ChatProvider> chat;
  bool offline = true;
};

/// "mock" gives the hashing embedder and mock chat. "remote" gives the
/// OpenAI-compatible providers, falling back to offline mode with a warning
/// when the key variable is unset.
ProviderBundle make_provider_bundle(std::string_view mode, const ProviderConfig& config, std::size_t embed_dim);

struct HttpResult {
  int status = 200;
  std::string body;
};

/// Request handling independent of the transport. Handlers are safe to
/// call concurrently; initialize() may run while requests are served.
class ServiceCore {
 public:
  explicit ServiceCore(std::vector<Region> regions, ServiceConfig config = {});

  void initialize(std::shared_ptr<const SearchIndex> index, std::shared_ptr<Embedder> embedder,
                  std::shared_ptr<ChatProvider> chat, PromptTemplate refine);
  bool ready() const;
  const ServiceConfig& config() const noexcept { return config_; }

  HttpResult query(std::string_view body) const;
  HttpResult regions() const;
  HttpResult object(std::string_view id) const;
  HttpResult health() const;

 private:
  struct Backend {
    std::shared_ptr<const SearchIndex> index;
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<ChatProvider> chat;
    PromptTemplate refine;
  };
  std::shared_ptr<const Backend> backend() const;

  std::vector<Region> regions_;
  ServiceConfig config_;
  mutable std::mutex mu_;
  std::shared_ptr<const Backend> backend_;
};

/// {"code": ..., "message": ...}
std::string error_body(std::string_view code, std::string_view message);

/// httplib front end for a ServiceCore.
class HttpService {
 public:
  explicit HttpService(ServiceCore& core);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws on failure.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  /// Blocks until listen() is accepting connections.
  void wait_until_ready() const;
  /// Stops accepting and waits for in-flight requests.
  void stop();
  bool running() const;

 private:
  ServiceCore& core_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace semask
