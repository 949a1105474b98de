#pragma once

// Sentence segmentation for cleaned Spanish legal text and greedy packing of
// sentences into token-budgeted chunks.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mlmprep/corpus.hpp"
#include "mlmprep/error.hpp"
#include "mlmprep/tokenizer.hpp"
#include "mlmprep/utf8.hpp"

namespace mlmprep {

// Abbreviations that end in a period but do not end a sentence. Matched
// case-insensitively against the whole whitespace-delimited word.
inline const std::unordered_set<std::string>& legal_abbreviations() {
  static const std::unordered_set<std::string> kSet = [] {
    std::unordered_set<std::string> s;
    for (const char* a : {"art.", "arts.", "núm.", "núms.", "n.º", "nº.", "sr.", "sra.", "sres.", "sras.",
                          "d.", "dña.", "dª.", "pág.", "págs.", "excmo.", "excma.", "excmos.", "excmas.",
                          "ilmo.", "ilma.", "ilmos.", "ilmas.", "dr.", "dra.", "apdo.", "apdos.", "cap.",
                          "tít.", "disp.", "vd.", "ud.", "uds.", "avda.", "c/.", "s.a.", "s.l.", "aprox.",
                          "p.ej.", "ee.uu.", "b.o.e.", "sec.", "párr.", "vid.", "cfr.", "op.", "cit."}) {
      s.insert(a);
    }
    return s;
  }();
  return kSet;
}

namespace detail {

inline bool is_terminal(char32_t cp) { return cp == U'.' || cp == U'!' || cp == U'?' || cp == U'…'; }

inline bool is_closing(char32_t cp) {
  return cp == U')' || cp == U']' || cp == U'»' || cp == U'"' || cp == U'”' || cp == U'’' || cp == U'\'';
}

inline bool is_opening(char32_t cp) {
  return cp == U'¿' || cp == U'¡' || cp == U'(' || cp == U'[' || cp == U'«' || cp == U'"' || cp == U'“' ||
         cp == U'‘' || cp == U'\'' || cp == U'—' || cp == U'–' || cp == U'-';
}

// Ordinals like "1.º" or "2.ª".
inline bool is_ordinal(std::string_view w) {
  std::size_t i = 0;
  while (i < w.size() && w[i] >= '0' && w[i] <= '9') ++i;
  if (i == 0) return false;
  const auto rest = w.substr(i);
  return rest == ".º" || rest == ".ª" || rest == "º" || rest == "ª" || rest == ".º." || rest == ".ª.";
}

inline bool is_abbreviation(std::string_view word) {
  while (!word.empty()) {
    const auto d = utf8::decode(word, 0);
    if (!(d.valid && is_opening(d.cp))) break;
    word.remove_prefix(d.len);
  }
  if (word.empty()) return false;
  if (is_ordinal(word)) return true;
  // Single-letter initials: "J. García".
  const auto first = utf8::decode(word, 0);
  if (first.valid && utf8::is_upper(first.cp) && word.size() == first.len + 1 && word.back() == '.') return true;
  return legal_abbreviations().count(utf8::to_lower(word)) > 0;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline void split_line(std::string_view line, std::vector<std::string>& out) {
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < line.size()) {
    const auto d = utf8::decode(line, i);
    if (!(d.valid && is_terminal(d.cp))) {
      i += d.len;
      continue;
    }
    // Terminal run (e.g. "?!" or "..."), then closing punctuation.
    std::size_t j = i + d.len;
    while (j < line.size()) {
      const auto n = utf8::decode(line, j);
      if (!(n.valid && (is_terminal(n.cp) || is_closing(n.cp)))) break;
      j += n.len;
    }
    const std::size_t punct_end = j;
    std::size_t k = j;
    while (k < line.size()) {
      const auto n = utf8::decode(line, k);
      if (!(n.valid && utf8::is_horizontal_space(n.cp))) break;
      k += n.len;
    }
    if (k == punct_end || k >= line.size()) {
      i = punct_end;
      continue;
    }
    const auto next = utf8::decode(line, k);
    const bool opens = next.valid && (utf8::is_upper(next.cp) || is_opening(next.cp));
    bool abbreviation = false;
    if (opens && d.cp == U'.') {
      std::size_t w = i;
      while (w > start && line[w - 1] != ' ' && line[w - 1] != '\t') --w;
      abbreviation = is_abbreviation(line.substr(w, i + 1 - w));
    }
    if (opens && !abbreviation) {
      const auto s = trim(line.substr(start, punct_end - start));
      if (!s.empty()) out.emplace_back(s);
      start = k;
    }
    i = punct_end;
  }
  const auto tail = trim(line.substr(start));
  if (!tail.empty()) out.emplace_back(tail);
}

}  // namespace detail

// Expects clean_text output. Line breaks always end a sentence.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    detail::split_line(text.substr(pos, end - pos), out);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

struct WordRange {
  std::size_t begin;  // token index, inclusive
  std::size_t end;    // exclusive

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const WordRange&, const WordRange&) = default;
};

struct Chunk {
  std::string doc_id;
  std::uint64_t seq = 0;
  std::string text;
  std::vector<TokenId> token_ids;
  std::vector<WordRange> word_boundaries;

  std::size_t token_count() const noexcept { return token_ids.size(); }
  friend bool operator==(const Chunk&, const Chunk&) = default;
};

// One range per word: a range starts at every word-start token, and at
// position 0 regardless of its flag.
template <class Flags>
std::vector<WordRange> word_ranges(const Flags& word_start) {
  std::vector<WordRange> out;
  const std::size_t n = std::size(word_start);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || word_start[i]) {
      if (!out.empty()) out.back().end = i;
      out.push_back({i, n});
    }
  }
  return out;
}

inline std::vector<WordRange> word_ranges_of(const std::vector<Token>& tokens) {
  std::vector<bool> flags;
  flags.reserve(tokens.size());
  for (const auto& t : tokens) flags.push_back(t.word_start);
  return word_ranges(flags);
}

struct PackOptions {
  std::size_t max_tokens = 512;
};

namespace detail {

inline std::vector<Token> tokenize_at(const Tokenizer& tok, std::string_view text, std::string_view doc_id,
                                      std::size_t sentence) {
  try {
    return tok.tokenize(text);
  } catch (const TokenizerFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw TokenizerFailure("doc '" + std::string(doc_id) + "' sentence " + std::to_string(sentence) + ": " +
                           e.what());
  }
}

inline bool same_tokens(const std::vector<Token>& a, const std::vector<Token>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](const Token& x, const Token& y) { return x.id == y.id && x.word_start == y.word_start; });
}

}  // namespace detail

// Greedy left-to-right packing within one document. The token count of a
// candidate chunk is always measured by tokenizing the candidate text as a
// whole. A sentence longer than the budget is cut at token boundaries into
// maximal pieces; the last piece stays open for further sentences only if
// its text re-tokenizes to the same tokens.
inline std::vector<Chunk> pack_chunks(std::string_view doc_id, const std::vector<std::string>& sentences,
                                      const Tokenizer& tokenizer, PackOptions options = {}) {
  const std::size_t reserved = tokenizer.reserved_special_count();
  if (options.max_tokens <= reserved) {
    throw InvalidConfig("max_tokens " + std::to_string(options.max_tokens) + " leaves no room after " +
                        std::to_string(reserved) + " reserved special tokens");
  }
  const std::size_t budget = options.max_tokens - reserved;

  std::vector<Chunk> out;
  std::string cur_text;
  std::vector<Token> cur_tokens;
  bool extendable = false;

  auto emit = [&](std::string text, const std::vector<Token>& tokens) {
    Chunk c;
    c.doc_id = std::string(doc_id);
    c.seq = out.size();
    c.text = std::move(text);
    c.token_ids.reserve(tokens.size());
    for (const auto& t : tokens) c.token_ids.push_back(t.id);
    c.word_boundaries = word_ranges_of(tokens);
    out.push_back(std::move(c));
  };
  auto flush = [&] {
    if (!cur_tokens.empty()) emit(std::move(cur_text), cur_tokens);
    cur_text.clear();
    cur_tokens.clear();
    extendable = false;
  };

  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const std::string& sentence = sentences[si];
    auto tokens = detail::tokenize_at(tokenizer, sentence, doc_id, si);
    if (tokens.empty()) continue;

    if (!cur_tokens.empty() && extendable) {
      std::string candidate = cur_text;
      candidate.push_back(' ');
      candidate.append(sentence);
      auto joined = detail::tokenize_at(tokenizer, candidate, doc_id, si);
      if (joined.size() <= budget) {
        cur_text = std::move(candidate);
        cur_tokens = std::move(joined);
        continue;
      }
    }
    flush();

    if (tokens.size() <= budget) {
      cur_text = sentence;
      cur_tokens = std::move(tokens);
      extendable = true;
      continue;
    }

    std::size_t first = 0;
    while (first < tokens.size()) {
      const std::size_t last = std::min(first + budget, tokens.size());
      const std::size_t b = tokens[first].begin;
      const std::size_t e = tokens[last - 1].end;
      std::vector<Token> piece(tokens.begin() + static_cast<std::ptrdiff_t>(first),
                               tokens.begin() + static_cast<std::ptrdiff_t>(last));
      for (auto& t : piece) t.begin -= b, t.end -= b;
      std::string piece_text = sentence.substr(b, e - b);
      if (last - first == budget) {
        emit(std::move(piece_text), piece);
      } else {
        extendable = detail::same_tokens(detail::tokenize_at(tokenizer, piece_text, doc_id, si), piece);
        cur_text = std::move(piece_text);
        cur_tokens = std::move(piece);
      }
      first = last;
    }
  }
  flush();
  return out;
}

inline std::vector<Chunk> chunk_document(const RawDocument& doc, const Tokenizer& tokenizer,
                                         PackOptions options = {}) {
  return pack_chunks(doc.id, split_sentences(doc.text), tokenizer, options);
}

inline Json to_json(const Chunk& c) {
  Json j;
  j["doc_id"] = c.doc_id;
  j["seq"] = c.seq;
  j["text"] = c.text;
  j["token_count"] = c.token_count();
  j["token_ids"] = c.token_ids;
  Json words = Json::array();
  for (const auto& w : c.word_boundaries) words.push_back({w.begin, w.end});
  j["word_boundaries"] = std::move(words);
  return j;
}

// Accepts records with or without token_ids; without them the text is
// re-tokenized.
inline Chunk parse_chunk(const Json& j, std::size_t line, const Tokenizer& tokenizer) {
  try {
    Chunk c;
    c.doc_id = j.at("doc_id").get<std::string>();
    c.seq = j.at("seq").get<std::uint64_t>();
    c.text = j.at("text").get<std::string>();
    if (j.contains("token_ids") && j.contains("word_boundaries")) {
      c.token_ids = j.at("token_ids").get<std::vector<TokenId>>();
      for (const auto& w : j.at("word_boundaries")) {
        c.word_boundaries.push_back({w.at(0).get<std::size_t>(), w.at(1).get<std::size_t>()});
      }
    } else {
      const auto tokens = tokenizer.tokenize(c.text);
      for (const auto& t : tokens) c.token_ids.push_back(t.id);
      c.word_boundaries = word_ranges_of(tokens);
    }
    if (j.contains("token_count") && j.at("token_count").get<std::size_t>() != c.token_count()) {
      throw MalformedRecord(line, "token_count does not match tokens");
    }
    std::size_t expect = 0;
    for (const auto& w : c.word_boundaries) {
      if (w.begin != expect || w.end <= w.begin) throw MalformedRecord(line, "word_boundaries do not partition tokens");
      expect = w.end;
    }
    if (expect != c.token_count()) throw MalformedRecord(line, "word_boundaries do not cover tokens");
    return c;
  } catch (const Json::exception& e) {
    throw MalformedRecord(line, e.what());
  }
}

}  // namespace mlmprep
