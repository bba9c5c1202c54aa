#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semask/embedding.hpp"

namespace semask {

enum class Role { System, User };

std::string_view to_string(Role role) noexcept;

struct ChatMessage {
  Role role;
  std::string content;

  /// Throws std::invalid_argument on empty content.
  ChatMessage(Role r, std::string c);
};

// Typed provider failures. Remote clients raise these after retries are
// exhausted; callers that must degrade catch ProviderError.
class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class AuthError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};
class TimeoutError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};
class HttpError : public ProviderError {
 public:
  HttpError(int status, const std::string& what) : ProviderError(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};
class ResponseFormatError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/// Chat-completion provider. Implementations are safe for concurrent calls.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  /// Requires at least one message.
  virtual std::string chat(std::span<const ChatMessage> messages) = 0;

  std::string complete(std::string prompt);
};

/// Text-embedding provider. Output is unit-norm, or zero for blank text.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) = 0;
  virtual std::size_t dimension() const noexcept = 0;
};

struct ProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env_name = "SEMASK_API_KEY";
  std::string chat_model_name = "gpt-4o";
  std::string embed_model_name = "text-embedding-3-small";
  std::size_t embed_dim = 1536;
  double timeout_s = 60.0;
  int max_retries = 3;
  double temperature = 0.0;
  double backoff_initial_s = 0.5;
  std::size_t max_in_flight = 4;

  /// Throws std::invalid_argument when timeout_s <= 0 or max_retries < 0.
  void validate() const;

  /// Defaults overridden by SEMASK_BASE_URL, SEMASK_CHAT_MODEL,
  /// SEMASK_EMBED_MODEL and SEMASK_EMBED_DIM when set.
  static ProviderConfig from_env();

  /// True when the API key variable is set and non-empty.
  bool has_api_key() const;
};

/// Bag-of-tokens feature hashing: tokens are lowercased and split on
/// non-alphanumerics, hashed with FNV-1a 64, bucket = hash mod dim, sign = +1
/// when bit 63 is clear, else -1. Accumulated then L2-normalised.
EmbeddingVector deterministic_embed(std::string_view text, std::size_t dim);

/// Offline embedder backed by deterministic_embed. Requires dim >= 8.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 1536);
  EmbeddingVector embed(std::string_view text) override { return deterministic_embed(text, dim_); }
  std::size_t dimension() const noexcept override { return dim_; }

 private:
  std::size_t dim_;
};

}  // namespace semask
