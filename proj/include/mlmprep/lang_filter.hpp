#pragma once

// Language identification by character n-gram rank profiles and the
// Spanish-only corpus gate built on it.
//
// A profile is the list of the K most frequent 1..5-grams of a language,
// computed over lowercased words padded with '_'. A document is compared to
// every profile with the rank-order ("out-of-place") distance; the nearest
// profile wins.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mlmprep/corpus.hpp"
#include "mlmprep/error.hpp"
#include "mlmprep/utf8.hpp"

namespace mlmprep {

inline constexpr std::size_t kMaxProfileSize = 400;
inline constexpr std::size_t kMaxNgram = 5;

struct LanguageVerdict {
  std::string language;
  double confidence = 0.0;

  friend bool operator==(const LanguageVerdict&, const LanguageVerdict&) = default;
};

// Attached to documents that could not be identified (empty text).
inline LanguageVerdict empty_text_verdict() { return {"und", 0.0}; }

struct LanguageProfile {
  std::string language;
  std::vector<std::string> ngram_ranks;  // most frequent first, no duplicates
};

// Counts of every 1..5-gram of the text's letter runs. Digits and
// punctuation separate words; letters are lowercased.
inline std::unordered_map<std::string, std::uint64_t> count_ngrams(std::string_view text) {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::vector<std::string> chars;  // padded word, one UTF-8 string per code point
  auto flush_word = [&] {
    if (chars.size() <= 2) {
      chars.clear();
      return;
    }
    for (std::size_t n = 1; n <= kMaxNgram; ++n) {
      for (std::size_t i = 0; i + n <= chars.size(); ++i) {
        std::string g;
        for (std::size_t k = i; k < i + n; ++k) g += chars[k];
        if (g == "_") continue;
        ++counts[g];
      }
    }
    chars.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const auto d = utf8::decode(text, i);
    i += d.len;
    if (d.valid && utf8::is_letter(d.cp)) {
      if (chars.empty()) chars.emplace_back("_");
      chars.push_back(utf8::encode(utf8::to_lower(d.cp)));
    } else if (!chars.empty()) {
      chars.emplace_back("_");
      flush_word();
    }
  }
  if (!chars.empty()) {
    chars.emplace_back("_");
    flush_word();
  }
  return counts;
}

// Top-k n-grams by count; ties broken by byte order so ranks are deterministic.
inline std::vector<std::string> rank_ngrams(const std::unordered_map<std::string, std::uint64_t>& counts,
                                            std::size_t k) {
  std::vector<std::pair<std::string, std::uint64_t>> v(counts.begin(), counts.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (v.size() > k) v.resize(k);
  std::vector<std::string> out;
  out.reserve(v.size());
  for (auto& [g, _] : v) out.push_back(std::move(g));
  return out;
}

inline LanguageProfile build_profile(std::string language, std::string_view seed_text,
                                     std::size_t top_k = kMaxProfileSize) {
  if (top_k == 0 || top_k > kMaxProfileSize) throw InvalidConfig("profile size must be in [1, 400]");
  return {std::move(language), rank_ngrams(count_ngrams(seed_text), top_k)};
}

// Seed layout: one subdirectory per language code, holding *.txt files.
// Languages and files are read in sorted order.
inline std::vector<LanguageProfile> build_profiles_from_dir(const std::filesystem::path& root,
                                                            std::size_t top_k = kMaxProfileSize) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw InvalidConfig("seed directory not found: " + root.string());
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<LanguageProfile> out;
  for (const auto& dir : dirs) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string text;
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      text += ss.str();
      text += '\n';
    }
    if (!text.empty()) out.push_back(build_profile(dir.filename().string(), text, top_k));
  }
  return out;
}

inline Json to_json(const LanguageProfile& p) {
  Json j;
  j["language"] = p.language;
  j["ngram_ranks"] = p.ngram_ranks;
  return j;
}

inline LanguageProfile parse_profile(const Json& j, std::size_t line) {
  try {
    LanguageProfile p{j.at("language").get<std::string>(), j.at("ngram_ranks").get<std::vector<std::string>>()};
    if (p.ngram_ranks.size() > kMaxProfileSize) throw MalformedRecord(line, "profile longer than 400");
    std::vector<std::string> sorted = p.ngram_ranks;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw MalformedRecord(line, "duplicate n-gram in profile");
    }
    return p;
  } catch (const Json::exception& e) {
    throw MalformedRecord(line, e.what());
  }
}

inline void save_profiles(std::ostream& out, const std::vector<LanguageProfile>& profiles) {
  for (const auto& p : profiles) out << to_json(p).dump() << '\n';
}

inline std::vector<LanguageProfile> load_profiles(std::istream& in) {
  LineReader reader(in);
  std::vector<LanguageProfile> out;
  std::string line;
  while (reader.next(line)) {
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw MalformedRecord(reader.line_number(), e.what());
    }
    out.push_back(parse_profile(j, reader.line_number()));
  }
  return out;
}

inline std::vector<LanguageProfile> load_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open profiles: " + path);
  return load_profiles(in);
}

// Substitution point for other identifiers (e.g. an embedding model).
class LanguageIdentifier {
public:
  virtual ~LanguageIdentifier() = default;
  // Throws EmptyText for blank input.
  virtual LanguageVerdict identify(std::string_view text) const = 0;
};

struct RankDistance {
  std::string language;
  double distance;  // normalised to [0, 1]
  std::size_t ngrams;  // document n-grams compared
};

// Rank-order classifier.
//
// Confidence is the margin p1 - p2 between the two largest entries of
// softmax(-n * d / temperature), where d is the normalised distance (1 means
// no document n-gram appears in the profile) and n the number of document
// n-grams compared. n * d counts "missed n-gram equivalents", so evidence
// accumulates with text length much like a log-likelihood. Identical nearest
// distances give 0; a clear winner on a long text approaches 1.
class RankProfileIdentifier final : public LanguageIdentifier {
public:
  static constexpr double kDefaultTemperature = 1.0;

  explicit RankProfileIdentifier(std::vector<LanguageProfile> profiles,
                                 double temperature = kDefaultTemperature)
      : temperature_(temperature) {
    if (!(temperature > 0.0)) throw InvalidConfig("temperature must be > 0");
    if (profiles.size() < 2) throw NoProfiles("need profiles for at least two languages");
    for (auto& p : profiles) {
      Entry e;
      e.language = std::move(p.language);
      e.size = p.ngram_ranks.size();
      for (std::size_t r = 0; r < p.ngram_ranks.size(); ++r) e.rank.emplace(std::move(p.ngram_ranks[r]), r);
      entries_.push_back(std::move(e));
    }
  }

  std::vector<RankDistance> distances(std::string_view text) const {
    const auto doc = rank_ngrams(count_ngrams(text), kMaxProfileSize);
    if (doc.empty()) throw EmptyText("no letters to identify");
    std::vector<RankDistance> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) {
      const std::size_t penalty = std::max<std::size_t>(e.size, doc.size());
      std::uint64_t d = 0;
      for (std::size_t r = 0; r < doc.size(); ++r) {
        const auto it = e.rank.find(doc[r]);
        d += it == e.rank.end() ? penalty : (it->second > r ? it->second - r : r - it->second);
      }
      out.push_back({e.language, static_cast<double>(d) / static_cast<double>(doc.size() * penalty), doc.size()});
    }
    return out;
  }

  LanguageVerdict identify(std::string_view text) const override {
    auto ds = distances(text);
    // Nearest first; ties resolved by language code for determinism.
    std::sort(ds.begin(), ds.end(), [](const RankDistance& a, const RankDistance& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.language < b.language;
    });
    const double scale = static_cast<double>(ds[0].ngrams) / temperature_;
    const double best = ds[0].distance;
    double z = 0.0;
    for (const auto& d : ds) z += std::exp(-scale * (d.distance - best));
    const double p1 = 1.0 / z;
    const double p2 = std::exp(-scale * (ds[1].distance - best)) / z;
    return {ds[0].language, std::clamp(p1 - p2, 0.0, 1.0)};
  }

  std::vector<std::string> languages() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.language);
    return out;
  }

private:
  struct Entry {
    std::string language;
    std::size_t size = 0;
    std::unordered_map<std::string, std::size_t> rank;
  };
  std::vector<Entry> entries_;
  double temperature_;
};

inline LanguageVerdict identify_language(std::string_view text, const std::vector<LanguageProfile>& profiles) {
  if (profiles.empty()) throw NoProfiles("no language profiles");
  return RankProfileIdentifier(profiles).identify(text);
}

struct RejectedDocument {
  RawDocument doc;
  LanguageVerdict verdict;
};

struct FilterResult {
  std::vector<RawDocument> kept;
  std::vector<RejectedDocument> rejected;
};

// Kept iff the verdict is "es" with confidence strictly above the threshold.
inline bool passes_spanish_gate(const LanguageVerdict& v, double threshold) {
  return v.language == "es" && v.confidence > threshold;
}

inline LanguageVerdict verdict_for(const LanguageIdentifier& id, std::string_view text) {
  try {
    return id.identify(text);
  } catch (const EmptyText&) {
    return empty_text_verdict();
  }
}

inline FilterResult filter_spanish(std::vector<RawDocument> docs, const LanguageIdentifier& id,
                                   double threshold = 0.95) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidConfig("threshold must be in [0, 1]");
  FilterResult out;
  for (auto& d : docs) {
    auto v = verdict_for(id, d.text);
    if (passes_spanish_gate(v, threshold)) {
      out.kept.push_back(std::move(d));
    } else {
      out.rejected.push_back({std::move(d), std::move(v)});
    }
  }
  return out;
}

// Audit record: the document line with the verdict appended.
inline Json to_json(const RejectedDocument& r) {
  Json j = to_json(r.doc);
  j["verdict_language"] = r.verdict.language;
  j["verdict_confidence"] = r.verdict.confidence;
  return j;
}

}  // namespace mlmprep
