#pragma once

// Tokenizer contract used by the chunker and the masker, plus a small
// deterministic reference implementation (whitespace/punctuation
// pre-tokenization followed by greedy longest-match subword pieces).
// Production subword models plug in behind `Tokenizer`.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mlmprep/error.hpp"
#include "mlmprep/utf8.hpp"

namespace mlmprep {

using TokenId = std::int32_t;

struct Token {
  TokenId id;
  bool word_start;
  // Byte span in the tokenized text.
  std::size_t begin;
  std::size_t end;
};

class Tokenizer {
public:
  virtual ~Tokenizer() = default;

  // tokenize("") must return an empty list. Implementations must be safe for
  // concurrent const use.
  virtual std::vector<Token> tokenize(std::string_view text) const = 0;
  virtual std::size_t vocab_size() const = 0;
  virtual TokenId mask_token_id() const = 0;
  // Sorted ascending.
  virtual const std::vector<TokenId>& special_token_ids() const = 0;
  // Special tokens a trainer adds around each sequence; the chunker
  // subtracts this from its budget.
  virtual std::size_t reserved_special_count() const { return 0; }

  bool is_special(TokenId id) const {
    const auto& s = special_token_ids();
    return std::binary_search(s.begin(), s.end(), id);
  }
};

class Vocabulary {
public:
  Vocabulary() = default;

  explicit Vocabulary(std::vector<std::string> tokens) {
    for (auto& t : tokens) add(std::move(t));
  }

  TokenId add(std::string token) {
    if (auto it = index_.find(token); it != index_.end()) return it->second;
    const auto id = static_cast<TokenId>(tokens_.size());
    index_.emplace(token, id);
    tokens_.push_back(std::move(token));
    return id;
  }

  std::optional<TokenId> find(std::string_view token) const {
    // unordered_map<string> has no heterogeneous lookup in C++20 without a
    // transparent hash; the copy is cheap for word-sized keys.
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // One token per line, ids in line order; blank lines are skipped.
  static Vocabulary load(std::istream& in) {
    Vocabulary v;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      v.add(line);
    }
    return v;
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TokenizerFailure("cannot open vocabulary: " + path);
    return load(in);
  }

  void save(std::ostream& out) const {
    for (const auto& t : tokens_) out << t << '\n';
  }

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::string_view kContinuationPrefix = "##";

// Specials, every single character of the bundled alphabet (both as a word
// start and as a continuation piece), then frequent Spanish legal words.
inline Vocabulary default_vocabulary() {
  Vocabulary v;
  for (auto s : {kPadToken, kUnkToken, kClsToken, kSepToken, kMaskToken}) v.add(std::string(s));

  std::vector<char32_t> alphabet;
  for (char32_t c = 0x21; c <= 0x7E; ++c) alphabet.push_back(c);
  for (char32_t c = 0xA1; c <= 0xFF; ++c) {
    if (c != 0xAD) alphabet.push_back(c);
  }
  for (char32_t c : {U'–', U'—', U'‘', U'’', U'“', U'”', U'…', U'€', U'•'}) alphabet.push_back(c);
  for (char32_t c : alphabet) v.add(utf8::encode(c));
  for (char32_t c : alphabet) v.add(std::string(kContinuationPrefix) + utf8::encode(c));

  static constexpr const char* kWords[] = {
      "de", "la", "el", "en", "y", "a", "los", "las", "del", "que", "por", "con", "se", "para", "al", "su",
      "sus", "o", "lo", "una", "un", "es", "como", "no", "sobre", "este", "esta", "dicho", "dicha", "ley",
      "Ley", "real", "Real", "decreto", "Decreto", "orden", "Orden", "artículo", "Artículo", "apartado",
      "disposición", "Disposición", "adicional", "transitoria", "final", "derogatoria", "boletín", "Boletín",
      "oficial", "Oficial", "Estado", "estado", "Comunidad", "comunidad", "Autónoma", "autónoma",
      "Gobierno", "gobierno", "Ministerio", "ministerio", "resolución", "Resolución", "anuncio", "Anuncio",
      "tribunal", "Tribunal", "Supremo", "Constitucional", "sentencia", "Sentencia", "recurso", "Recurso",
      "procedimiento", "administrativo", "administración", "Administración", "pública", "público",
      "públicas", "públicos", "presente", "dispuesto", "establecido", "previsto", "conformidad",
      "acuerdo", "Acuerdo", "acuerda", "número", "núm", "art", "fecha", "año", "años", "plazo", "días",
      "mes", "meses", "euros", "contrato", "contratación", "servicio", "servicios", "personal", "general",
      "General", "Dirección", "dirección", "Secretaría", "secretaría", "Consejo", "consejo", "Cortes",
      "Congreso", "Senado", "Diputados", "sesión", "pleno", "Pleno", "Presidente", "presidente",
      "Presidenta", "señor", "señora", "Sr", "Sra", "D", "Dña", "Excmo", "Ilmo", "pág", "ser", "será",
      "serán", "podrá", "podrán", "deberá", "deberán", "mediante", "entre", "cuando", "desde", "hasta",
      "según", "así", "sin", "o", "ni", "también", "cual", "cuya", "cuyo", "dichos", "normativa", "norma",
      "normas", "reglamento", "Reglamento", "derecho", "derechos", "obligaciones", "publicación",
      "publica", "publicar", "vigor", "entrada", "efectos", "interesados", "solicitud", "solicitudes",
      "convocatoria", "bases", "funcionarios", "empleo", "local", "municipal", "Ayuntamiento",
      "ayuntamiento", "provincia", "Provincia", "Junta", "Generalitat", "Xunta", "Diputación",
      "Consejería", "consejería", "Juzgado", "juzgado", "Audiencia", "Nacional", "Constitución",
      "Española", "España", "español", "española", "Visto", "visto", "Vista", "vista", "quinto", "primero",
      "segundo", "tercero", "cuarto", "sexto", "Primero", "Segundo", "Tercero", "Cuarto", "Quinto",
      "capítulo", "Capítulo", "título", "Título", "sección", "Sección", "párrafo", "letra", "anexo",
      "Anexo", "texto", "refundido", "modificación", "modifica", "aprueba", "aprobación", "regula",
      "regulación", "materia", "caso", "casos", "forma", "parte", "partes", "persona", "personas",
      "cada", "todo", "toda", "todos", "todas", "otro", "otra", "otros", "otras", "mismo", "misma",
  };
  for (const char* w : kWords) v.add(w);
  return v;
}

class ReferenceTokenizer final : public Tokenizer {
public:
  explicit ReferenceTokenizer(Vocabulary vocab, std::size_t reserved_special = 0)
      : vocab_(std::move(vocab)), reserved_special_(reserved_special) {
    const auto unk = vocab_.find(kUnkToken);
    const auto mask = vocab_.find(kMaskToken);
    if (!unk || !mask) throw TokenizerFailure("vocabulary must contain [UNK] and [MASK]");
    unk_id_ = *unk;
    mask_id_ = *mask;
    // Bracketed tokens are special.
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      const auto& t = vocab_.tokens()[i];
      if (t.size() >= 3 && t.front() == '[' && t.back() == ']') specials_.push_back(static_cast<TokenId>(i));
    }
  }

  ReferenceTokenizer() : ReferenceTokenizer(default_vocabulary()) {}

  static ReferenceTokenizer from_file(const std::string& path, std::size_t reserved_special = 0) {
    return ReferenceTokenizer(Vocabulary::load(path), reserved_special);
  }

  std::vector<Token> tokenize(std::string_view text) const override {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
      const auto d = utf8::decode(text, i);
      if (d.valid && (utf8::is_space(d.cp) || utf8::is_control(d.cp))) {
        i += d.len;
        continue;
      }
      std::size_t end = i + d.len;
      if (is_word_char(d)) {
        while (end < text.size()) {
          const auto n = utf8::decode(text, end);
          if (!is_word_char(n)) break;
          end += n.len;
        }
      }
      encode_word(text, i, end, out);
      i = end;
    }
    return out;
  }

  std::size_t vocab_size() const override { return vocab_.size(); }
  TokenId mask_token_id() const override { return mask_id_; }
  TokenId unk_token_id() const { return unk_id_; }
  const std::vector<TokenId>& special_token_ids() const override { return specials_; }
  std::size_t reserved_special_count() const override { return reserved_special_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }

private:
  static constexpr std::size_t kMaxWordBytes = 200;

  static bool is_word_char(const utf8::Decoded& d) {
    return d.valid && (utf8::is_letter(d.cp) || utf8::is_digit(d.cp));
  }

  // Greedy longest match over code point boundaries; an unmatchable word
  // becomes a single [UNK].
  void encode_word(std::string_view text, std::size_t begin, std::size_t end, std::vector<Token>& out) const {
    const std::size_t mark = out.size();
    if (end - begin <= kMaxWordBytes) {
      std::vector<std::size_t> cuts;  // code point boundaries in (begin, end]
      for (std::size_t p = begin; p < end;) {
        p += utf8::decode(text, p).len;
        cuts.push_back(p);
      }
      std::size_t pos = begin;
      std::string key;
      while (pos < end) {
        bool matched = false;
        for (auto c = cuts.rbegin(); c != cuts.rend() && *c > pos; ++c) {
          key.clear();
          if (pos != begin) key.append(kContinuationPrefix);
          key.append(text.substr(pos, *c - pos));
          if (const auto id = vocab_.find(key)) {
            out.push_back({*id, pos == begin, pos, *c});
            pos = *c;
            matched = true;
            break;
          }
        }
        if (!matched) break;
      }
      if (pos == end) return;
    }
    out.resize(mark);
    out.push_back({unk_id_, true, begin, end});
  }

  Vocabulary vocab_;
  std::size_t reserved_special_;
  TokenId unk_id_ = 0;
  TokenId mask_id_ = 0;
  std::vector<TokenId> specials_;
};

}  // namespace mlmprep
