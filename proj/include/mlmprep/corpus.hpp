#pragma once

// Document model for pre-extracted legal texts and the streaming ingestion
// that feeds the rest of the pipeline.
//
// Wire format: one JSON object per line with the RawDocument field names.
// Only `id` and `text` are required; everything else may be absent or null.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mlmprep/error.hpp"
#include "mlmprep/rng.hpp"
#include "mlmprep/utf8.hpp"

namespace mlmprep {

using Json = nlohmann::ordered_json;

enum class DocKind { notice, rule, transcript, ruling, other };

inline std::string_view to_string(DocKind k) noexcept {
  switch (k) {
    case DocKind::notice: return "notice";
    case DocKind::rule: return "rule";
    case DocKind::transcript: return "transcript";
    case DocKind::ruling: return "ruling";
    case DocKind::other: break;
  }
  return "other";
}

// Bulletins label things inconsistently; anything unrecognised is `other`.
inline DocKind parse_doc_kind(std::string_view s) noexcept {
  if (s == "notice") return DocKind::notice;
  if (s == "rule") return DocKind::rule;
  if (s == "transcript") return DocKind::transcript;
  if (s == "ruling") return DocKind::ruling;
  return DocKind::other;
}

struct RawDocument {
  std::string id;
  std::string source;
  std::string region;
  DocKind doc_kind = DocKind::other;
  std::optional<std::string> language_hint;
  std::optional<std::string> published_date;
  std::string text;

  friend bool operator==(const RawDocument&, const RawDocument&) = default;
};

namespace detail {

inline bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int year = std::stoi(std::string(s.substr(0, 4)));
  const int month = std::stoi(std::string(s.substr(5, 2)));
  const int day = std::stoi(std::string(s.substr(8, 2)));
  if (month < 1 || month > 12 || day < 1) return false;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  const int max_day = kDays[month - 1] + (month == 2 && leap ? 1 : 0);
  return day <= max_day;
}

inline bool is_language_code(std::string_view s) {
  return s.size() == 2 && s[0] >= 'a' && s[0] <= 'z' && s[1] >= 'a' && s[1] <= 'z';
}

inline std::string optional_string(const Json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw MalformedRecord(line, std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

}  // namespace detail

inline Json to_json(const RawDocument& d) {
  Json j;
  j["id"] = d.id;
  j["source"] = d.source;
  j["region"] = d.region;
  j["doc_kind"] = std::string(to_string(d.doc_kind));
  j["language_hint"] = d.language_hint ? Json(*d.language_hint) : Json(nullptr);
  j["published_date"] = d.published_date ? Json(*d.published_date) : Json(nullptr);
  j["text"] = d.text;
  return j;
}

inline std::string to_json_line(const RawDocument& d) { return to_json(d).dump(); }

// Parses one record. `line` is 1-based and only used for error reporting.
inline RawDocument document_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw MalformedRecord(line, "record is not an object");

  RawDocument d;
  const auto id = j.find("id");
  if (id == j.end() || !id->is_string() || id->get_ref<const std::string&>().empty()) {
    throw MalformedRecord(line, "missing or empty 'id'");
  }
  d.id = id->get<std::string>();

  const auto text = j.find("text");
  if (text == j.end() || !text->is_string()) throw MalformedRecord(line, "missing 'text'");
  d.text = text->get<std::string>();
  if (!utf8::is_valid(d.text)) throw MalformedRecord(line, "'text' is not valid UTF-8");

  d.source = detail::optional_string(j, "source", line);
  d.region = detail::optional_string(j, "region", line);
  d.doc_kind = parse_doc_kind(detail::optional_string(j, "doc_kind", line));

  if (auto hint = detail::optional_string(j, "language_hint", line); !hint.empty()) {
    if (!detail::is_language_code(hint)) throw MalformedRecord(line, "bad 'language_hint': " + hint);
    d.language_hint = std::move(hint);
  }
  if (auto date = detail::optional_string(j, "published_date", line); !date.empty()) {
    if (!detail::is_iso_date(date)) throw MalformedRecord(line, "bad 'published_date': " + date);
    d.published_date = std::move(date);
  }
  return d;
}

inline RawDocument parse_document(std::string_view line_text, std::size_t line) {
  Json j;
  try {
    j = Json::parse(line_text);
  } catch (const Json::parse_error& e) {
    throw MalformedRecord(line, e.what());
  }
  return document_from_json(j, line);
}

// Reads non-empty lines with their 1-based line numbers. Handles CRLF input.
class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(&in) {}

  bool next(std::string& line) {
    while (std::getline(*in_, line)) {
      ++line_number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  }

  std::size_t line_number() const noexcept { return line_number_; }

private:
  std::istream* in_;
  std::size_t line_number_ = 0;
};

struct IngestOptions {
  // Strict: the first malformed line or duplicate id throws.
  // Lenient: such lines are skipped and counted.
  bool strict = false;
};

struct IngestReport {
  std::size_t lines = 0;
  std::size_t documents = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
  std::vector<std::size_t> malformed_lines;  // first kMaxRecorded only

  static constexpr std::size_t kMaxRecorded = 64;
};

// Single-pass document stream. Memory use is one line plus the set of seen
// ids, never the corpus.
class DocumentReader {
public:
  DocumentReader(std::istream& in, IngestOptions options = {}) : lines_(in), options_(options) {}

  std::optional<RawDocument> next() {
    std::string line;
    while (lines_.next(line)) {
      ++report_.lines;
      const auto n = lines_.line_number();
      RawDocument doc;
      try {
        doc = parse_document(line, n);
      } catch (const MalformedRecord&) {
        if (options_.strict) throw;
        ++report_.malformed;
        if (report_.malformed_lines.size() < IngestReport::kMaxRecorded) report_.malformed_lines.push_back(n);
        continue;
      }
      if (!seen_.insert(doc.id).second) {
        if (options_.strict) throw DuplicateId(doc.id);
        ++report_.duplicates;
        continue;
      }
      ++report_.documents;
      return doc;
    }
    return std::nullopt;
  }

  const IngestReport& report() const noexcept { return report_; }

private:
  LineReader lines_;
  IngestOptions options_;
  IngestReport report_;
  std::unordered_set<std::string> seen_;
};

inline std::vector<RawDocument> read_all(std::istream& in, IngestOptions options = {},
                                         IngestReport* report = nullptr) {
  DocumentReader reader(in, options);
  std::vector<RawDocument> docs;
  while (auto d = reader.next()) docs.push_back(std::move(*d));
  if (report) *report = reader.report();
  return docs;
}

struct CorpusStats {
  std::uint64_t document_count = 0;
  std::uint64_t total_bytes = 0;
  std::optional<std::uint64_t> total_tokens;
  std::map<std::string, std::uint64_t> per_region_counts;

  void add(const RawDocument& d) {
    ++document_count;
    total_bytes += d.text.size();
    ++per_region_counts[d.region];
  }

  void add(const RawDocument& d, std::uint64_t tokens) {
    add(d);
    total_tokens = total_tokens.value_or(0) + tokens;
  }

  // Associative and commutative, so shards can be merged in any order.
  CorpusStats& merge(const CorpusStats& o) {
    document_count += o.document_count;
    total_bytes += o.total_bytes;
    if (o.total_tokens) total_tokens = total_tokens.value_or(0) + *o.total_tokens;
    for (const auto& [region, count] : o.per_region_counts) per_region_counts[region] += count;
    return *this;
  }

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

template <class Range>
CorpusStats compute_stats(const Range& docs) {
  CorpusStats s;
  for (const RawDocument& d : docs) s.add(d);
  return s;
}

inline Json to_json(const CorpusStats& s) {
  Json j;
  j["document_count"] = s.document_count;
  j["total_bytes"] = s.total_bytes;
  j["total_tokens"] = s.total_tokens ? Json(*s.total_tokens) : Json(nullptr);
  j["per_region_counts"] = Json::object();
  for (const auto& [region, count] : s.per_region_counts) j["per_region_counts"][region] = count;
  return j;
}

// Algorithm R over item positions: after offering k >= n positions the
// reservoir is a uniform n-subset of [0, k).
class ReservoirSampler {
public:
  ReservoirSampler(std::size_t n, std::uint64_t seed) : n_(n), rng_(seed) { reservoir_.reserve(n); }

  void offer() {
    const std::size_t i = seen_++;
    if (i < n_) {
      reservoir_.push_back(i);
      return;
    }
    const auto j = rng_.below(i + 1);
    if (j < n_) reservoir_[j] = i;
  }

  std::size_t seen() const noexcept { return seen_; }

  std::vector<std::size_t> selected_sorted() const {
    auto out = reservoir_;
    std::sort(out.begin(), out.end());
    return out;
  }

private:
  std::size_t n_;
  Rng rng_;
  std::size_t seen_ = 0;
  std::vector<std::size_t> reservoir_;
};

struct ValidationSplit {
  std::vector<RawDocument> train;
  std::vector<RawDocument> validation;
};

// Both partitions keep input order.
inline ValidationSplit split_validation(std::vector<RawDocument> docs, std::size_t n, std::uint64_t seed) {
  if (n > docs.size()) {
    throw InsufficientDocuments("requested " + std::to_string(n) + " validation documents from " +
                                std::to_string(docs.size()));
  }
  ReservoirSampler sampler(n, seed);
  for (std::size_t i = 0; i < docs.size(); ++i) sampler.offer();
  const auto picked = sampler.selected_sorted();

  ValidationSplit out;
  out.validation.reserve(n);
  out.train.reserve(docs.size() - n);
  std::size_t p = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (p < picked.size() && picked[p] == i) {
      out.validation.push_back(std::move(docs[i]));
      ++p;
    } else {
      out.train.push_back(std::move(docs[i]));
    }
  }
  return out;
}

}  // namespace mlmprep
