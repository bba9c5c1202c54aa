#include "semask/mock_providers.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <vector>

#include <fmt/format.h>

#include "semask/object.hpp"
#include "semask/pyliteral.hpp"
#include "semask/resources.hpp"
#include "semask/text.hpp"

namespace semask {

namespace {

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Text following the last line that starts with `label`, up to the end of
// that line (or of the prompt when `to_end`).
std::optional<std::string_view> labelled(std::string_view prompt, std::string_view label, bool to_end) {
  std::size_t pos = std::string_view::npos;
  if (prompt.substr(0, label.size()) == label) pos = 0;
  const std::string needle = "\n" + std::string(label);
  if (auto p = prompt.rfind(needle); p != std::string_view::npos) pos = p + 1;
  if (pos == std::string_view::npos) return std::nullopt;
  std::string_view rest = prompt.substr(pos + label.size());
  if (!to_end) rest = rest.substr(0, rest.find('\n'));
  return rest;
}

std::string english_list(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += (i + 1 == words.size()) ? " and " : ", ";
    out += words[i];
  }
  return out;
}

}  // namespace

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::unordered_set<std::string> words;
  std::istringstream in(read_file(path));
  for (std::string line; std::getline(in, line);) {
    auto w = text::trim(line);
    if (!w.empty()) words.insert(text::normalize_whitespace_lower(w));
  }
  return StopwordList(std::move(words));
}

const StopwordList& StopwordList::shared() {
  static const StopwordList list = load(resource_path("data/stopwords.txt"));
  return list;
}

// Tokens of every string value, and of object keys below the top level
// (weekday names in hours). Top-level keys are field names, not content.
static void collect_value_tokens(const ordered_json& j, std::unordered_set<std::string>& bag, bool top = true) {
  if (j.is_string()) {
    for (auto& t : text::tokenize(j.get<std::string>())) bag.insert(std::move(t));
  } else if (j.is_number()) {
    for (auto& t : text::tokenize(j.dump())) bag.insert(std::move(t));
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (!top) {
        for (auto& t : text::tokenize(k)) bag.insert(std::move(t));
      }
      collect_value_tokens(v, bag, false);
    }
  } else if (j.is_array()) {
    for (const auto& v : j) collect_value_tokens(v, bag, false);
  }
}

std::string mock_refinement_chat(std::string_view prompt, const StopwordList& stopwords) {
  const auto info = labelled(prompt, "Information:", false);
  const auto query = labelled(prompt, "Query:", true);
  if (!info || !query) return "{}";

  ordered_json candidates;
  try {
    candidates = ordered_json::parse(*info);
  } catch (const std::exception&) {
    return "{}";
  }
  if (!candidates.is_array()) return "{}";

  std::vector<std::string> terms;
  for (auto& tok : text::tokenize(*query)) {
    if (stopwords.contains(tok)) continue;
    if (std::find(terms.begin(), terms.end(), tok) == terms.end()) terms.push_back(std::move(tok));
  }

  struct Scored {
    std::string name;
    std::size_t score;
  };
  std::vector<Scored> scored;
  for (const auto& c : candidates) {
    if (!c.is_object() || !c.contains("name") || !c["name"].is_string()) continue;
    std::unordered_set<std::string> bag;
    collect_value_tokens(c, bag);
    std::size_t score = 0;
    for (const auto& t : terms) score += bag.count(t);
    if (score >= 1) scored.push_back({c["name"].get<std::string>(), score});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });

  ordered_json out = ordered_json::object();
  for (const auto& s : scored) {
    if (!out.contains(s.name)) out[s.name] = fmt::format("matched {} query terms", s.score);
  }
  return out.dump();
}

std::string mock_summarize_chat(std::string_view prompt, const StopwordList& stopwords) {
  constexpr std::string_view kMarker = "Now it is your turn:";
  const auto pos = prompt.rfind(kMarker);
  if (pos == std::string_view::npos) return "Reviewers left no usable tips.";
  const auto tips = pyliteral::parse_string_list(text::trim(prompt.substr(pos + kMarker.size())));
  if (!tips) return "Reviewers left no usable tips.";

  std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // word -> (count, first index)
  std::size_t index = 0;
  for (const auto& tip : *tips) {
    for (auto& tok : text::tokenize(tip)) {
      if (tok.size() < 3 || all_digits(tok) || stopwords.contains(tok)) continue;
      auto [it, inserted] = stats.try_emplace(std::move(tok), 0, index);
      ++it->second.first;
      ++index;
    }
  }
  if (stats.empty()) return "Reviewers left short tips.";

  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> ranked(stats.begin(), stats.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.second.second < b.second.second;
  });
  std::vector<std::string> words;
  for (std::size_t i = 0; i < ranked.size() && i < 8; ++i) words.push_back(ranked[i].first);
  return "Reviewers mention " + english_list(words) + ".";
}

std::string mock_generate_query_chat(std::string_view prompt, const StopwordList& stopwords) {
  static const std::unordered_set<std::string> kMeta = {"reviewers", "mention", "customers", "often", "highlight"};
  const auto info = labelled(prompt, "Information:", false);
  if (!info) return "Looking for a good place nearby. Any suggestions?";

  std::string category;
  constexpr std::string_view kServes = "primarily serves the category of ";
  if (auto p = info->find(kServes); p != std::string_view::npos) {
    std::string_view rest = info->substr(p + kServes.size());
    rest = rest.substr(0, std::min({rest.find(", "), rest.find(". "), rest.size()}));
    if (!rest.empty() && rest.back() == '.') rest.remove_suffix(1);
    category = text::normalize_whitespace_lower(rest);
  }

  std::vector<std::string> words;
  constexpr std::string_view kHighlight = "Customers often highlight: '";
  if (auto p = info->find(kHighlight); p != std::string_view::npos) {
    std::string_view rest = info->substr(p + kHighlight.size());
    for (auto& tok : text::tokenize(rest)) {
      if (words.size() == 4) break;
      if (tok.size() < 3 || all_digits(tok) || stopwords.contains(tok) || kMeta.count(tok)) continue;
      if (std::find(words.begin(), words.end(), tok) == words.end()) words.push_back(std::move(tok));
    }
  }

  const std::string subject = category.empty() ? "place" : category;
  if (words.empty()) return fmt::format("Looking for a good {}. Any suggestions?", subject);
  return fmt::format("Looking for a {} with {}. Any suggestions?", subject, english_list(words));
}

std::string MockChatProvider::chat(std::span<const ChatMessage> messages) {
  if (messages.empty()) throw std::invalid_argument("chat requires at least one message");
  std::string prompt;
  for (const auto& m : messages) {
    if (!prompt.empty()) prompt += "\n\n";
    prompt += m.content;
  }
  const std::string trimmed = text::trim(prompt);
  if (trimmed.size() >= 9 && trimmed.compare(trimmed.size() - 9, 9, "Question:") == 0) {
    return mock_generate_query_chat(trimmed);
  }
  if (trimmed.find("Now it is your turn:") != std::string::npos) return mock_summarize_chat(trimmed);
  if (labelled(trimmed, "Information:", false) && labelled(trimmed, "Query:", true)) {
    return mock_refinement_chat(trimmed);
  }
  return "{}";
}

std::string EchoChatProvider::chat(std::span<const ChatMessage> messages) {
  if (messages.empty()) throw std::invalid_argument("chat requires at least one message");
  return messages.back().content;
}

}  // namespace semask
