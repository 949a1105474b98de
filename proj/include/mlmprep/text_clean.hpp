#pragma once

#include <string>
#include <string_view>

#include "mlmprep/utf8.hpp"

namespace mlmprep {

struct CleanPolicy {
  bool collapse_spaces = true;    // horizontal whitespace run -> one space
  bool collapse_newlines = true;  // whitespace run containing a line break -> one line break
  bool strip_control = true;      // drop Cc characters other than \n and \t
  bool trim_ends = true;
};

// Total on any input. Invalid UTF-8 bytes are copied through untouched.
//
// With the default policy the result is a fixed point: every whitespace run
// is a single ' ' or '\n', and no control characters remain, so a second
// pass changes nothing.
inline std::string clean_text(std::string_view text, const CleanPolicy& policy = {}) {
  // Pass 1: control stripping, so that "a \x01 b" becomes one whitespace run.
  std::string stripped;
  if (policy.strip_control) {
    stripped.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
      const auto d = utf8::decode(text, i);
      if (!(d.valid && utf8::is_control(d.cp))) stripped.append(text.substr(i, d.len));
      i += d.len;
    }
    text = stripped;
  }

  // Pass 2: whitespace runs.
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    auto d = utf8::decode(text, i);
    if (!(d.valid && utf8::is_space(d.cp))) {
      out.append(text.substr(i, d.len));
      i += d.len;
      continue;
    }
    const std::size_t run_begin = i;
    bool has_break = false;
    while (i < text.size()) {
      d = utf8::decode(text, i);
      if (!(d.valid && utf8::is_space(d.cp))) break;
      has_break = has_break || utf8::is_line_break(d.cp);
      i += d.len;
    }
    const std::string_view run = text.substr(run_begin, i - run_begin);
    if (has_break && policy.collapse_newlines) {
      out.push_back('\n');
    } else if (!has_break && policy.collapse_spaces) {
      out.push_back(' ');
    } else if (has_break && policy.collapse_spaces) {
      // Newlines stay as they are; the horizontal pieces between them collapse.
      bool in_space = false;
      for (std::size_t k = 0; k < run.size();) {
        const auto r = utf8::decode(run, k);
        if (utf8::is_line_break(r.cp)) {
          out.push_back('\n');
          in_space = false;
        } else if (!in_space) {
          out.push_back(' ');
          in_space = true;
        }
        k += r.len;
      }
    } else {
      out.append(run);
    }
  }

  if (policy.trim_ends) {
    std::size_t b = 0;
    while (b < out.size()) {
      const auto d = utf8::decode(out, b);
      if (!(d.valid && utf8::is_space(d.cp))) break;
      b += d.len;
    }
    // Trailing whitespace: walk back over UTF-8 sequences.
    std::size_t e = out.size();
    while (e > b) {
      std::size_t start = e - 1;
      while (start > b && (static_cast<unsigned char>(out[start]) & 0xC0) == 0x80) --start;
      const auto d = utf8::decode(out, start);
      if (!(d.valid && d.len == e - start && utf8::is_space(d.cp))) break;
      e = start;
    }
    out = out.substr(b, e - b);
  }
  return out;
}

}  // namespace mlmprep
