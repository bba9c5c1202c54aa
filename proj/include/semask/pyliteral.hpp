#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semask::pyliteral {

/// 'text' with every internal single quote doubled.
std::string quote(std::string_view s);

/// ['a', 'b''s', 'c'] in the quoting of quote().
std::string render_string_list(const std::vector<std::string>& items);

/// Inverse of render_string_list. Returns nullopt on malformed input.
std::optional<std::vector<std::string>> parse_string_list(std::string_view s);

/// One key/value pair read from a dict literal. Non-string values are kept
/// as their source text.
using DictEntry = std::pair<std::string, std::string>;

/// Reads a Python-style dict literal: single- or double-quoted strings with
/// backslash escapes, bare numbers/True/False/None, nested containers kept
/// verbatim, trailing commas tolerated. Key order and duplicates are
/// preserved. Returns nullopt when `s` is not a single dict literal.
std::optional<std::vector<DictEntry>> parse_dict(std::string_view s);

/// Finds the first balanced top-level {...} block, skipping braces inside
/// quoted strings. Returns an empty view when none exists.
std::string_view find_first_object(std::string_view s);

}  // namespace semask::pyliteral
