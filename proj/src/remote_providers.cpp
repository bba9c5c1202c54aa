#include "semask/remote_providers.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "semask/text.hpp"

namespace semask {

void InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return free_ > 0; });
  --free_;
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    ++free_;
  }
  cv_.notify_one();
}

OpenAiCompatibleClient::OpenAiCompatibleClient(ProviderConfig config)
    : config_(std::move(config)), limiter_(config_.max_in_flight) {
  config_.validate();
  const auto scheme = config_.base_url.find("://");
  if (scheme == std::string::npos) {
    throw std::invalid_argument("base_url must start with http:// or https://");
  }
  const auto slash = config_.base_url.find('/', scheme + 3);
  scheme_host_port_ = config_.base_url.substr(0, slash);
  path_prefix_ = slash == std::string::npos ? "" : config_.base_url.substr(slash);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

nlohmann::json OpenAiCompatibleClient::post(const std::string& path, const nlohmann::json& body) {
  const std::string payload = body.dump();
  const auto timeout = std::chrono::duration<double>(config_.timeout_s);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  const int attempts = config_.max_retries + 1;

  std::exception_ptr last;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      const double delay = config_.backoff_initial_s * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    const char* key = std::getenv(config_.api_key_env_name.c_str());
    httplib::Headers headers;
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);

    httplib::Result res;
    {
      InFlightLimiter::Slot slot(limiter_);
      httplib::Client cli(scheme_host_port_);
      cli.set_connection_timeout(timeout_us);
      cli.set_read_timeout(timeout_us);
      cli.set_write_timeout(timeout_us);
      res = cli.Post(path_prefix_ + path, headers, payload, "application/json");
    }

    try {
      if (!res) {
        const auto err = res.error();
        const std::string msg = "request to " + path + " failed: " + httplib::to_string(err);
        if (err == httplib::Error::Read || err == httplib::Error::Write ||
            err == httplib::Error::ConnectionTimeout) {
          throw TimeoutError(msg);
        }
        throw ProviderError(msg);
      }
      const int status = res->status;
      if (status == 401 || status == 403) {
        throw AuthError("authentication rejected by provider (HTTP " + std::to_string(status) + ")");
      }
      if (status == 429 || status >= 500) {
        throw HttpError(status, "provider returned HTTP " + std::to_string(status));
      }
      if (status < 200 || status >= 300) {
        // Not retryable.
        throw HttpError(status, "provider returned HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));
      }
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw ResponseFormatError(std::string("provider response is not JSON: ") + e.what());
      }
    } catch (const HttpError& e) {
      if (e.status() != 429 && e.status() < 500) throw;
      last = std::current_exception();
      spdlog::warn("provider call {} attempt {}/{} failed: {}", path, attempt + 1, attempts, e.what());
    } catch (const ResponseFormatError&) {
      throw;
    } catch (const ProviderError& e) {
      last = std::current_exception();
      spdlog::warn("provider call {} attempt {}/{} failed: {}", path, attempt + 1, attempts, e.what());
    }
  }
  std::rethrow_exception(last);
}

std::string RemoteChatProvider::chat(std::span<const ChatMessage> messages) {
  if (messages.empty()) throw std::invalid_argument("chat requires at least one message");
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  const auto& cfg = client_.config();
  const nlohmann::json body = {
      {"model", cfg.chat_model_name}, {"messages", std::move(msgs)}, {"temperature", cfg.temperature}};
  const auto resp = client_.post("/chat/completions", body);
  try {
    return resp.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ResponseFormatError(std::string("malformed chat completion: ") + e.what());
  }
}

EmbeddingVector RemoteEmbedder::embed(std::string_view input) {
  const auto& cfg = client_.config();
  if (text::trim(input).empty()) return EmbeddingVector::zeros(cfg.embed_dim);
  const nlohmann::json body = {
      {"model", cfg.embed_model_name}, {"input", std::string(input)}, {"dimensions", cfg.embed_dim}};
  const auto resp = client_.post("/embeddings", body);
  std::vector<float> values;
  try {
    values = resp.at("data").at(0).at("embedding").get<std::vector<float>>();
  } catch (const nlohmann::json::exception& e) {
    throw ResponseFormatError(std::string("malformed embedding response: ") + e.what());
  }
  if (values.size() != cfg.embed_dim) {
    throw ResponseFormatError("embedding has dimension " + std::to_string(values.size()) + ", expected " +
                              std::to_string(cfg.embed_dim));
  }
  return EmbeddingVector::normalized(std::move(values));
}

}  // namespace semask
