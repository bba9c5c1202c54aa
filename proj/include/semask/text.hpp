#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace semask::text {

/// Lowercases ASCII letters and splits on every byte that is not an ASCII
/// letter or digit. Bytes >= 0x80 are kept inside tokens so UTF-8 words stay
/// whole.
std::vector<std::string> tokenize(std::string_view s);

std::string trim(std::string_view s);

/// ASCII lowercase, runs of whitespace collapsed to one space, trimmed.
std::string normalize_whitespace_lower(std::string_view s);

/// 64-bit FNV-1a over the bytes of `s`.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace semask::text
