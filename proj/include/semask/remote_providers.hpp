#pragma once

#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <string>

#include <json.hpp>

#include "semask/providers.hpp"

namespace semask {

/// Counting semaphore with a runtime bound.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(std::size_t limit) : free_(limit) {}

  class Slot {
   public:
    explicit Slot(InFlightLimiter& l) : l_(l) { l_.acquire(); }
    ~Slot() { l_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    InFlightLimiter& l_;
  };

  void acquire();
  void release();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t free_;
};

/// Client for an OpenAI-compatible JSON-over-HTTP API.
///
///   POST {base_url}/chat/completions
///     {"model", "messages": [{"role", "content"}], "temperature"}
///     -> {"choices": [{"message": {"content": "..."}}]}
///   POST {base_url}/embeddings
///     {"model", "input", "dimensions"} -> {"data": [{"embedding": [...]}]}
///
/// Retries transport failures, 401/403, 429 and 5xx up to max_retries times
/// with exponential backoff, then throws the typed error of the last
/// attempt. Other 4xx fail immediately. The key is read from the environment
/// variable named in the config on every request and is never logged.
class OpenAiCompatibleClient {
 public:
  explicit OpenAiCompatibleClient(ProviderConfig config);

  nlohmann::json post(const std::string& path, const nlohmann::json& body);
  const ProviderConfig& config() const noexcept { return config_; }

 private:
  ProviderConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  InFlightLimiter limiter_;
};

class RemoteChatProvider final : public ChatProvider {
 public:
  explicit RemoteChatProvider(ProviderConfig config) : client_(std::move(config)) {}
  std::string chat(std::span<const ChatMessage> messages) override;

 private:
  OpenAiCompatibleClient client_;
};

class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(ProviderConfig config) : client_(std::move(config)) {}
  EmbeddingVector embed(std::string_view text) override;
  std::size_t dimension() const noexcept override { return client_.config().embed_dim; }

 private:
  OpenAiCompatibleClient client_;
};

}  // namespace semask
