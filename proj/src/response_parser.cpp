#include <json.hpp>

#include "semask/pyliteral.hpp"
#include "semask/retrieval.hpp"
#include "semask/text.hpp"

namespace semask {

namespace {

std::optional<std::vector<pyliteral::DictEntry>> read_dict(std::string_view block) {
  try {
    const auto j = ordered_json::parse(block);
    if (!j.is_object()) return std::nullopt;
    std::vector<pyliteral::DictEntry> out;
    for (const auto& [k, v] : j.items()) {
      out.emplace_back(k, v.is_string() ? v.get<std::string>()
                                        : v.dump(-1, ' ', false, ordered_json::error_handler_t::replace));
    }
    return out;
  } catch (const ordered_json::exception&) {
    return pyliteral::parse_dict(block);
  }
}

}  // namespace

std::optional<RefinementResult> parse_refinement_response(std::string_view text,
                                                          std::span<const Candidate> candidates) {
  const auto block = pyliteral::find_first_object(text);
  if (block.empty()) return std::nullopt;
  const auto entries = read_dict(block);
  if (!entries) return std::nullopt;

  std::vector<std::string> normalized;
  normalized.reserve(candidates.size());
  for (const auto& c : candidates) normalized.push_back(text::normalize_whitespace_lower(c.name));
  std::vector<bool> taken(candidates.size(), false);

  RefinementResult out;
  for (const auto& [name, reason] : *entries) {
    const auto key = text::normalize_whitespace_lower(name);
    bool matched = false;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!taken[i] && normalized[i] == key) {
        taken[i] = true;
        out.picks.emplace_back(candidates[i].id, reason);
        matched = true;
        break;
      }
    }
    if (!matched) out.unmatched_names.push_back(name);
  }
  return out;
}

}  // namespace semask
