#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semask {

/// A UTF-8 prompt template with `{name}` placeholders. Substitution is a
/// single left-to-right pass, so substituted text is never re-expanded.
class PromptTemplate {
 public:
  using Binding = std::pair<std::string_view, std::string_view>;

  explicit PromptTemplate(std::string text) : text_(std::move(text)) {}

  static PromptTemplate load(const std::filesystem::path& path);

  /// Throws std::invalid_argument if a bound placeholder does not occur.
  std::string render(std::initializer_list<Binding> bindings) const;

  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

/// The three prompts the pipeline sends to a chat model.
struct PromptSet {
  PromptTemplate summarize;       // {tips}
  PromptTemplate refine;          // {information}, {query}
  PromptTemplate generate_query;  // {information}

  /// Loads summarize.txt, refine.txt and generate_query.txt from `dir`
  /// (default: resource_root()/prompts).
  static PromptSet load(const std::filesystem::path& dir = {});
};

}  // namespace semask
