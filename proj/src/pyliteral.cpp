#include "semask/pyliteral.hpp"

#include <cctype>
#include <cstdint>

namespace semask::pyliteral {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}

  bool eof() const { return i_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[i_]; }
  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool consume(char c) {
    if (peek() != c || eof()) return false;
    ++i_;
    return true;
  }

  // Quoted string with backslash escapes ('' is not special here).
  std::optional<std::string> quoted() {
    const char q = peek();
    if (q != '\'' && q != '"') return std::nullopt;
    ++i_;
    std::string out;
    while (!eof()) {
      const char c = s_[i_++];
      if (c == q) return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (eof()) return std::nullopt;
      const char e = s_[i_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case '\\': case '\'': case '"': case '/': out.push_back(e); break;
        case 'u': {
          std::uint32_t cp = 0;
          if (!hex4(cp)) return std::nullopt;
          if (cp >= 0xD800 && cp <= 0xDBFF && s_.substr(i_, 2) == "\\u") {
            const std::size_t save = i_;
            i_ += 2;
            std::uint32_t lo = 0;
            if (hex4(lo) && lo >= 0xDC00 && lo <= 0xDFFF) {
              cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
            } else {
              i_ = save;
            }
          }
          append_utf8(out, cp);
          break;
        }
        default:
          out.push_back('\\');
          out.push_back(e);
      }
    }
    return std::nullopt;
  }

  // Source text of a nested [...], {...} or (...) value.
  std::optional<std::string> container() {
    const std::size_t start = i_;
    int depth = 0;
    while (!eof()) {
      const char c = peek();
      if (c == '\'' || c == '"') {
        if (!quoted()) return std::nullopt;
        continue;
      }
      ++i_;
      if (c == '[' || c == '{' || c == '(') ++depth;
      if (c == ']' || c == '}' || c == ')') {
        if (--depth == 0) return std::string(s_.substr(start, i_ - start));
      }
    }
    return std::nullopt;
  }

  std::optional<std::string> bare() {
    const std::size_t start = i_;
    while (!eof()) {
      const char c = peek();
      if (c == ',' || c == '}' || c == ':' || std::isspace(static_cast<unsigned char>(c))) break;
      ++i_;
    }
    if (i_ == start) return std::nullopt;
    return std::string(s_.substr(start, i_ - start));
  }

  std::optional<std::string> value() {
    const char c = peek();
    if (c == '\'' || c == '"') return quoted();
    if (c == '[' || c == '{' || c == '(') return container();
    return bare();
  }

 private:
  bool hex4(std::uint32_t& out) {
    if (i_ + 4 > s_.size()) return false;
    out = 0;
    for (int k = 0; k < 4; ++k) {
      const char h = s_[i_++];
      out <<= 4;
      if (h >= '0' && h <= '9') out |= static_cast<std::uint32_t>(h - '0');
      else if (h >= 'a' && h <= 'f') out |= static_cast<std::uint32_t>(h - 'a' + 10);
      else if (h >= 'A' && h <= 'F') out |= static_cast<std::uint32_t>(h - 'A' + 10);
      else return false;
    }
    return true;
  }

  static void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

}  // namespace

std::string quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::string render_string_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += quote(items[i]);
  }
  out += "]";
  return out;
}

std::optional<std::vector<std::string>> parse_string_list(std::string_view s) {
  std::size_t i = 0;
  auto ws = [&] {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  ws();
  if (i >= s.size() || s[i] != '[') return std::nullopt;
  ++i;
  std::vector<std::string> out;
  ws();
  if (i < s.size() && s[i] == ']') {
    ++i;
    ws();
    return i == s.size() ? std::optional(out) : std::nullopt;
  }
  while (true) {
    ws();
    if (i >= s.size() || s[i] != '\'') return std::nullopt;
    ++i;
    std::string item;
    bool closed = false;
    while (i < s.size()) {
      if (s[i] == '\'') {
        if (i + 1 < s.size() && s[i + 1] == '\'') {
          item.push_back('\'');
          i += 2;
          continue;
        }
        ++i;
        closed = true;
        break;
      }
      item.push_back(s[i++]);
    }
    if (!closed) return std::nullopt;
    out.push_back(std::move(item));
    ws();
    if (i < s.size() && s[i] == ',') {
      ++i;
      continue;
    }
    if (i < s.size() && s[i] == ']') {
      ++i;
      break;
    }
    return std::nullopt;
  }
  ws();
  if (i != s.size()) return std::nullopt;
  return out;
}

std::optional<std::vector<DictEntry>> parse_dict(std::string_view s) {
  Reader r(s);
  r.skip_ws();
  if (!r.consume('{')) return std::nullopt;
  std::vector<DictEntry> out;
  while (true) {
    r.skip_ws();
    if (r.consume('}')) break;
    auto key = r.value();
    if (!key) return std::nullopt;
    r.skip_ws();
    if (!r.consume(':')) return std::nullopt;
    r.skip_ws();
    auto val = r.value();
    if (!val) return std::nullopt;
    out.emplace_back(std::move(*key), std::move(*val));
    r.skip_ws();
    if (r.consume(',')) continue;
    if (r.consume('}')) break;
    return std::nullopt;
  }
  r.skip_ws();
  if (!r.eof()) return std::nullopt;
  return out;
}

std::string_view find_first_object(std::string_view s) {
  for (std::size_t start = s.find('{'); start != std::string_view::npos; start = s.find('{', start + 1)) {
    int depth = 0;
    char quote_char = 0;
    for (std::size_t i = start; i < s.size(); ++i) {
      const char c = s[i];
      if (quote_char) {
        if (c == '\\') {
          ++i;
        } else if (c == quote_char) {
          quote_char = 0;
        }
        continue;
      }
      if (c == '"' || c == '\'') {
        quote_char = c;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) return s.substr(start, i - start + 1);
      }
    }
  }
  return {};
}

}  // namespace semask::pyliteral
