#include "semask/prompts.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "semask/resources.hpp"

namespace semask {

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) { return PromptTemplate(read_file(path)); }

std::string PromptTemplate::render(std::initializer_list<Binding> bindings) const {
  for (const auto& [name, value] : bindings) {
    if (text_.find(fmt::format("{{{}}}", name)) == std::string::npos) {
      throw std::invalid_argument(fmt::format("template has no placeholder '{{{}}}'", name));
    }
  }
  std::string out;
  out.reserve(text_.size());
  std::size_t pos = 0;
  while (pos < text_.size()) {
    const std::size_t open = text_.find('{', pos);
    if (open == std::string::npos) break;
    const std::size_t close = text_.find('}', open + 1);
    if (close == std::string::npos) break;
    const std::string_view key(text_.data() + open + 1, close - open - 1);
    const Binding* hit = nullptr;
    for (const auto& b : bindings) {
      if (b.first == key) hit = &b;
    }
    if (!hit) {
      out.append(text_, pos, open + 1 - pos);
      pos = open + 1;
      continue;
    }
    out.append(text_, pos, open - pos);
    out.append(hit->second);
    pos = close + 1;
  }
  out.append(text_, pos, std::string::npos);
  return out;
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
  const auto base = dir.empty() ? resource_path("prompts") : dir;
  return PromptSet{
      PromptTemplate::load(base / "summarize.txt"),
      PromptTemplate::load(base / "refine.txt"),
      PromptTemplate::load(base / "generate_query.txt"),
  };
}

}  // namespace semask
