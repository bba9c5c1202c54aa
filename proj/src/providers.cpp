#include "semask/providers.hpp"

#include <cstdlib>

#include <fmt/format.h>

#include "semask/text.hpp"

namespace semask {

std::string_view to_string(Role role) noexcept { return role == Role::System ? "system" : "user"; }

ChatMessage::ChatMessage(Role r, std::string c) : role(r), content(std::move(c)) {
  if (content.empty()) throw std::invalid_argument("chat message content is empty");
}

std::string ChatProvider::complete(std::string prompt) {
  const ChatMessage msg(Role::User, std::move(prompt));
  return chat(std::span<const ChatMessage>(&msg, 1));
}

void ProviderConfig::validate() const {
  if (!(timeout_s > 0.0)) throw std::invalid_argument("timeout_s must be > 0");
  if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  if (embed_dim < 1) throw std::invalid_argument("embed_dim must be >= 1");
  if (max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
}

ProviderConfig ProviderConfig::from_env() {
  ProviderConfig cfg;
  auto env = [](const char* name) -> const char* {
    const char* v = std::getenv(name);
    return (v && *v) ? v : nullptr;
  };
  if (const char* v = env("SEMASK_BASE_URL")) cfg.base_url = v;
  if (const char* v = env("SEMASK_CHAT_MODEL")) cfg.chat_model_name = v;
  if (const char* v = env("SEMASK_EMBED_MODEL")) cfg.embed_model_name = v;
  if (const char* v = env("SEMASK_EMBED_DIM")) {
    char* end = nullptr;
    const long d = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || d < 1) {
      throw std::invalid_argument(fmt::format("SEMASK_EMBED_DIM='{}' is not a positive integer", v));
    }
    cfg.embed_dim = static_cast<std::size_t>(d);
  }
  cfg.validate();
  return cfg;
}

bool ProviderConfig::has_api_key() const {
  const char* v = std::getenv(api_key_env_name.c_str());
  return v && *v;
}

EmbeddingVector deterministic_embed(std::string_view text, std::size_t dim) {
  if (dim < 8) throw std::invalid_argument("deterministic_embed requires dim >= 8");
  std::vector<float> acc(dim, 0.0f);
  for (const auto& tok : text::tokenize(text)) {
    const std::uint64_t h = text::fnv1a64(tok);
    const float sign = (h >> 63) ? -1.0f : 1.0f;
    acc[h % dim] += sign;
  }
  return EmbeddingVector::normalized(std::move(acc));
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
  if (dim < 8) throw std::invalid_argument("HashingEmbedder requires dim >= 8");
}

}  // namespace semask
