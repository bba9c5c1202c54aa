#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>

#include "semask/providers.hpp"

namespace semask {

/// The mock providers' function-word list (data/stopwords.txt, one per line).
class StopwordList {
 public:
  explicit StopwordList(std::unordered_set<std::string> words) : words_(std::move(words)) {}
  static StopwordList load(const std::filesystem::path& path);
  /// Loaded once from resource_path("data/stopwords.txt").
  static const StopwordList& shared();

  bool contains(std::string_view w) const { return words_.count(std::string(w)) != 0; }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Deterministic stand-in for the refinement model.
///
/// Reads the JSON array after the last "Information:" line and the text after
/// the last "Query:" line. Each candidate scores the number of distinct
/// non-stopword query tokens that occur among the tokens of its attribute
/// values (field names do not count). Candidates scoring >= 1 are emitted as a JSON object
/// name -> "matched N query terms", by descending score with ties in input
/// order. Returns "{}" when nothing matches or the block is unparseable.
std::string mock_refinement_chat(std::string_view prompt, const StopwordList& stopwords = StopwordList::shared());

/// Deterministic stand-in for tip summarisation.
///
/// Parses the tips list after "Now it is your turn:". Collects tokens of
/// length >= 3 that are neither stopwords nor all digits, and emits
/// "Reviewers mention w1, w2, ... and wn." with the (up to) 8 most frequent
/// words, ties broken by first appearance. Output is a single line.
std::string mock_summarize_chat(std::string_view prompt, const StopwordList& stopwords = StopwordList::shared());

/// Deterministic stand-in for test-query generation.
///
/// From the last "Information:" paragraph takes the first category and the
/// first 4 distinct content words of the quoted customer highlight
/// (stopwords, digits, short words and the words reviewers/mention/customers/
/// often/highlight skipped) and emits
/// "Looking for a <category> with w1, w2, w3 and w4. Any suggestions?".
std::string mock_generate_query_chat(std::string_view prompt,
                                     const StopwordList& stopwords = StopwordList::shared());

/// Routes each prompt to the matching mock by its shape: refinement prompts
/// (Information + Query), summarisation prompts ("Now it is your turn:") and
/// query-generation prompts (trailing "Question:"). Anything else gets "{}".
class MockChatProvider final : public ChatProvider {
 public:
  std::string chat(std::span<const ChatMessage> messages) override;
};

/// Returns the content of the last message.
class EchoChatProvider final : public ChatProvider {
 public:
  std::string chat(std::span<const ChatMessage> messages) override;
};

/// Always returns the same text.
class FixedChatProvider final : public ChatProvider {
 public:
  explicit FixedChatProvider(std::string reply) : reply_(std::move(reply)) {}
  std::string chat(std::span<const ChatMessage>) override { return reply_; }

 private:
  std::string reply_;
};

/// Always throws ProviderError.
class FailingChatProvider final : public ChatProvider {
 public:
  std::string chat(std::span<const ChatMessage>) override { throw ProviderError("chat provider unavailable"); }
};

/// Counts calls and forwards to an inner provider.
class CountingChatProvider final : public ChatProvider {
 public:
  explicit CountingChatProvider(ChatProvider& inner) : inner_(inner) {}
  std::string chat(std::span<const ChatMessage> messages) override {
    ++calls_;
    return inner_.chat(messages);
  }
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  ChatProvider& inner_;
  std::atomic<std::size_t> calls_{0};
};

/// Counts calls and forwards to an inner embedder.
class CountingEmbedder final : public Embedder {
 public:
  explicit CountingEmbedder(Embedder& inner) : inner_(inner) {}
  EmbeddingVector embed(std::string_view text) override {
    ++calls_;
    return inner_.embed(text);
  }
  std::size_t dimension() const noexcept override { return inner_.dimension(); }
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  Embedder& inner_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace semask
