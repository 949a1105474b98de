#pragma once

// Minimal UTF-8 helpers. Decoding never throws: an invalid byte decodes as
// U+FFFD with length 1 so callers can copy the original byte through.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace mlmprep::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

struct Decoded {
  char32_t cp;
  std::size_t len;
  bool valid;
};

inline Decoded decode(std::string_view s, std::size_t pos) noexcept {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1, true};

  std::size_t need = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3, cp = b0 & 0x07, min = 0x10000;
  } else {
    return {kReplacement, 1, false};
  }
  if (pos + need >= s.size()) return {kReplacement, 1, false};
  for (std::size_t i = 1; i <= need; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {kReplacement, 1, false};
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return {kReplacement, 1, false};
  return {cp, need + 1, true};
}

inline bool is_valid(std::string_view s) noexcept {
  for (std::size_t i = 0; i < s.size();) {
    const auto d = decode(s, i);
    if (!d.valid) return false;
    i += d.len;
  }
  return true;
}

inline void append(std::string& out, char32_t cp) {
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

inline std::string encode(char32_t cp) {
  std::string s;
  append(s, cp);
  return s;
}

inline std::u32string to_u32(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto d = decode(s, i);
    out.push_back(d.cp);
    i += d.len;
  }
  return out;
}

inline bool is_line_break(char32_t cp) noexcept { return cp == U'\n'; }

// Space separators plus tab. NBSP is included: PDF extraction leaves a lot of them.
inline bool is_horizontal_space(char32_t cp) noexcept {
  switch (cp) {
    case U' ':
    case U'\t':
    case 0x00A0:
    case 0x1680:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Unicode Cc, minus the two characters the cleaner treats as whitespace.
inline bool is_control(char32_t cp) noexcept {
  if (cp == U'\n' || cp == U'\t') return false;
  return cp < 0x20 || (cp >= 0x7F && cp <= 0x9F);
}

inline bool is_space(char32_t cp) noexcept { return is_horizontal_space(cp) || is_line_break(cp); }

// Latin script coverage is all the bundled languages need.
inline bool is_upper(char32_t cp) noexcept {
  if (cp >= U'A' && cp <= U'Z') return true;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return true;
  if (cp == 0x178) return true;  // Ÿ
  // Latin Extended-A alternates case; the parity flips twice across the block.
  const bool even = (cp % 2) == 0;
  if (cp >= 0x100 && cp <= 0x137) return even;
  if (cp >= 0x139 && cp <= 0x148) return !even;
  if (cp >= 0x14A && cp <= 0x177) return even;
  if (cp >= 0x179 && cp <= 0x17E) return !even;
  return false;
}

inline bool is_letter(char32_t cp) noexcept {
  if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return true;
  if (cp == 0xAA || cp == 0xBA) return true;  // ª º
  if (cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7) return true;
  return false;
}

inline bool is_digit(char32_t cp) noexcept { return cp >= U'0' && cp <= U'9'; }

inline char32_t to_lower(char32_t cp) noexcept {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp == 0x178) return 0xFF;
  if (cp == 0x130) return U'i';
  if (cp >= 0x100 && cp <= 0x17E && is_upper(cp)) return cp + 1;
  return cp;
}

inline std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto d = decode(s, i);
    if (d.valid) {
      append(out, to_lower(d.cp));
    } else {
      out.push_back(s[i]);
    }
    i += d.len;
  }
  return out;
}

}  // namespace mlmprep::utf8
