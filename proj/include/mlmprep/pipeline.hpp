#pragma once

// Manifest-driven end-to-end run: ingest -> [filter-lang] -> [clean] ->
// [chunk] -> [mask]. Every stage's stream is persisted next to a summary, and
// each stage is fully materialised before the next begins so that the
// summary counts are exact.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mlmprep/corpus.hpp"
#include "mlmprep/error.hpp"
#include "mlmprep/lang_filter.hpp"
#include "mlmprep/parallel.hpp"
#include "mlmprep/sentence_chunker.hpp"
#include "mlmprep/text_clean.hpp"
#include "mlmprep/tokenizer.hpp"
#include "mlmprep/wwm_masker.hpp"

namespace mlmprep {

enum class Stage { filter_lang, clean, chunk, mask };

inline std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::filter_lang: return "filter-lang";
    case Stage::clean: return "clean";
    case Stage::chunk: return "chunk";
    case Stage::mask: return "mask";
  }
  return "?";
}

inline Stage parse_stage(std::string_view s) {
  if (s == "filter-lang") return Stage::filter_lang;
  if (s == "clean") return Stage::clean;
  if (s == "chunk") return Stage::chunk;
  if (s == "mask") return Stage::mask;
  throw ManifestError("unknown stage: " + std::string(s));
}

struct PipelineManifest {
  std::filesystem::path input_path;
  std::filesystem::path output_dir;
  std::vector<Stage> stages;
  std::uint64_t seed = 0;
  bool strict = false;
  unsigned jobs = 1;

  double threshold = 0.95;
  std::optional<std::filesystem::path> profiles_path;
  std::optional<std::filesystem::path> seeds_dir;  // build profiles on the fly instead
  CleanPolicy clean;
  std::size_t max_tokens = 512;
  std::optional<std::filesystem::path> tokenizer_path;
  MaskingConfig mask;

  bool has(Stage s) const { return std::find(stages.begin(), stages.end(), s) != stages.end(); }

  std::ptrdiff_t position(Stage s) const {
    const auto it = std::find(stages.begin(), stages.end(), s);
    return it == stages.end() ? -1 : it - stages.begin();
  }

  // Dependencies: chunk needs clean before it, mask needs chunk before it,
  // and the language gate works on documents so it must precede chunk.
  void validate() const {
    for (std::size_t i = 0; i < stages.size(); ++i) {
      for (std::size_t k = i + 1; k < stages.size(); ++k) {
        if (stages[i] == stages[k]) throw ManifestError("stage listed twice: " + std::string(to_string(stages[i])));
      }
    }
    if (has(Stage::chunk) && !(has(Stage::clean) && position(Stage::clean) < position(Stage::chunk))) {
      throw ManifestError("'chunk' requires 'clean' earlier in the stage list");
    }
    if (has(Stage::mask) && !(has(Stage::chunk) && position(Stage::chunk) < position(Stage::mask))) {
      throw ManifestError("'mask' requires 'chunk' earlier in the stage list");
    }
    if (has(Stage::filter_lang) && has(Stage::chunk) && position(Stage::filter_lang) > position(Stage::chunk)) {
      throw ManifestError("'filter-lang' must run before 'chunk'");
    }
    if (has(Stage::filter_lang) && !profiles_path && !seeds_dir) {
      throw ManifestError("'filter-lang' needs filter_lang.profiles or filter_lang.seeds");
    }
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ManifestError("threshold must be in [0, 1]");
    mask.validate();
  }
};

namespace detail {

template <class T>
T manifest_get(const Json& obj, const char* key, T fallback) {
  if (!obj.is_object()) return fallback;
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw ManifestError(std::string("manifest field '") + key + "' has the wrong type");
  }
}

inline std::optional<std::filesystem::path> manifest_path(const Json& obj, const char* key,
                                                          const std::filesystem::path& base) {
  const auto s = manifest_get<std::string>(obj, key, "");
  if (s.empty()) return std::nullopt;
  std::filesystem::path p(s);
  return p.is_absolute() ? p : base / p;
}

}  // namespace detail

// Relative paths resolve against `base_dir` (normally the manifest's folder).
inline PipelineManifest parse_manifest(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ManifestError("manifest must be a JSON object");
  PipelineManifest m;
  const auto input = detail::manifest_path(j, "input_path", base_dir);
  const auto output = detail::manifest_path(j, "output_dir", base_dir);
  if (!input) throw ManifestError("manifest needs input_path");
  if (!output) throw ManifestError("manifest needs output_dir");
  m.input_path = *input;
  m.output_dir = *output;
  for (const auto& s : detail::manifest_get<std::vector<std::string>>(j, "stages", {})) {
    m.stages.push_back(parse_stage(s));
  }
  m.seed = detail::manifest_get<std::uint64_t>(j, "seed", 0);
  m.strict = detail::manifest_get<bool>(j, "strict", false);
  m.jobs = detail::manifest_get<unsigned>(j, "jobs", 1);

  const Json empty = Json::object();
  const Json& fl = j.contains("filter_lang") ? j["filter_lang"] : empty;
  m.threshold = detail::manifest_get<double>(fl, "threshold", 0.95);
  m.profiles_path = detail::manifest_path(fl, "profiles", base_dir);
  m.seeds_dir = detail::manifest_path(fl, "seeds", base_dir);

  const Json& cl = j.contains("clean") ? j["clean"] : empty;
  m.clean.collapse_spaces = detail::manifest_get<bool>(cl, "collapse_spaces", true);
  m.clean.collapse_newlines = detail::manifest_get<bool>(cl, "collapse_newlines", true);
  m.clean.strip_control = detail::manifest_get<bool>(cl, "strip_control", true);
  m.clean.trim_ends = detail::manifest_get<bool>(cl, "trim_ends", true);

  const Json& ch = j.contains("chunk") ? j["chunk"] : empty;
  m.max_tokens = detail::manifest_get<std::size_t>(ch, "max_tokens", 512);
  m.tokenizer_path = detail::manifest_path(ch, "tokenizer", base_dir);

  const Json& mk = j.contains("mask") ? j["mask"] : empty;
  m.mask.mask_rate = detail::manifest_get<double>(mk, "mask_rate", 0.15);
  m.mask.p_mask = detail::manifest_get<double>(mk, "p_mask", 0.80);
  m.mask.p_random = detail::manifest_get<double>(mk, "p_random", 0.10);
  m.mask.p_keep = detail::manifest_get<double>(mk, "p_keep", 0.10);
  m.mask.seed = m.seed;
  return m;
}

inline PipelineManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest: " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
  }
  return parse_manifest(j, path.parent_path());
}

// ---- stage bodies, shared with the standalone CLI subcommands ----

inline std::vector<RawDocument> clean_documents(std::vector<RawDocument> docs, const CleanPolicy& policy,
                                                unsigned jobs = 1) {
  auto texts = parallel_map(docs, jobs, [&](const RawDocument& d) { return clean_text(d.text, policy); });
  for (std::size_t i = 0; i < docs.size(); ++i) docs[i].text = std::move(texts[i]);
  return docs;
}

inline FilterResult filter_documents(std::vector<RawDocument> docs, const LanguageIdentifier& id,
                                     double threshold, unsigned jobs = 1) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidConfig("threshold must be in [0, 1]");
  const auto verdicts = parallel_map(docs, jobs, [&](const RawDocument& d) { return verdict_for(id, d.text); });
  FilterResult out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (passes_spanish_gate(verdicts[i], threshold)) {
      out.kept.push_back(std::move(docs[i]));
    } else {
      out.rejected.push_back({std::move(docs[i]), verdicts[i]});
    }
  }
  return out;
}

struct StageError {
  std::string stage;
  std::string item;
  std::string message;
};

struct ChunkOutcome {
  std::vector<Chunk> chunks;
  std::size_t documents_chunked = 0;
  std::size_t documents_without_chunks = 0;
  std::vector<StageError> errors;
};

// Lenient mode records a failing document and moves on; strict rethrows.
inline ChunkOutcome chunk_documents(const std::vector<RawDocument>& docs, const Tokenizer& tokenizer,
                                    PackOptions options, unsigned jobs = 1, bool strict = false) {
  struct PerDoc {
    std::vector<Chunk> chunks;
    std::optional<std::string> error;
  };
  auto per_doc = parallel_map(docs, jobs, [&](const RawDocument& d) {
    PerDoc r;
    try {
      r.chunks = chunk_document(d, tokenizer, options);
    } catch (const TokenizerFailure& e) {
      if (strict) throw;
      r.error = e.what();
    }
    return r;
  });
  ChunkOutcome out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto& r = per_doc[i];
    if (r.error) out.errors.push_back({"chunk", docs[i].id, *r.error});
    if (r.chunks.empty()) {
      ++out.documents_without_chunks;
      continue;
    }
    ++out.documents_chunked;
    for (auto& c : r.chunks) out.chunks.push_back(std::move(c));
  }
  return out;
}

inline std::vector<MlmExample> mask_chunks(const std::vector<Chunk>& chunks, const MaskingConfig& config,
                                           const Tokenizer& tokenizer, unsigned jobs = 1) {
  config.validate();
  return parallel_map(chunks, jobs, [&](const Chunk& c) { return mask_chunk(c, config, tokenizer); });
}

inline std::unique_ptr<ReferenceTokenizer> make_tokenizer(const std::optional<std::filesystem::path>& path) {
  if (path) return std::make_unique<ReferenceTokenizer>(ReferenceTokenizer::from_file(path->string()));
  return std::make_unique<ReferenceTokenizer>();
}

struct StageSummary {
  Stage stage = Stage::clean;
  std::size_t input = 0;
  std::size_t output = 0;
  std::size_t rejected = 0;
  std::string input_unit;
  std::string output_unit;
  std::string output_file;
};

struct RunSummary {
  IngestReport ingest;
  CorpusStats stats_before;
  CorpusStats stats_after;
  std::vector<StageSummary> stages;
  std::vector<StageError> errors;
  std::string final_output;
};

inline Json to_json(const RunSummary& s) {
  Json j;
  j["ingest"] = {{"lines", s.ingest.lines},
                 {"documents", s.ingest.documents},
                 {"malformed", s.ingest.malformed},
                 {"duplicates", s.ingest.duplicates},
                 {"malformed_lines", s.ingest.malformed_lines}};
  j["stats_before"] = to_json(s.stats_before);
  j["stats_after"] = to_json(s.stats_after);
  Json stages = Json::array();
  for (const auto& st : s.stages) {
    Json e;
    e["stage"] = std::string(to_string(st.stage));
    e["input"] = st.input;
    e["output"] = st.output;
    e["rejected"] = st.rejected;
    e["input_unit"] = st.input_unit;
    e["output_unit"] = st.output_unit;
    e["output_file"] = st.output_file;
    stages.push_back(std::move(e));
  }
  j["stages"] = std::move(stages);
  Json errors = Json::array();
  for (const auto& e : s.errors) errors.push_back({{"stage", e.stage}, {"item", e.item}, {"message", e.message}});
  j["errors"] = std::move(errors);
  j["final_output"] = s.final_output;
  return j;
}

namespace detail {

template <class Range>
void write_jsonl(const std::filesystem::path& path, const Range& items) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& item : items) out << to_json(item).dump() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

// Prefixes errors with the stage that raised them.
template <class F>
auto in_stage(std::string_view stage, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw Error(std::string(stage) + ": " + e.what());
  }
}

}  // namespace detail

// Re-running with the same manifest and inputs rewrites byte-identical files.
inline RunSummary run_pipeline(const PipelineManifest& m) {
  m.validate();
  namespace fs = std::filesystem;
  fs::create_directories(m.output_dir);

  RunSummary summary;
  std::vector<RawDocument> docs = detail::in_stage("ingest", [&] {
    std::ifstream in(m.input_path, std::ios::binary);
    if (!in) throw Error("cannot open input: " + m.input_path.string());
    return read_all(in, IngestOptions{m.strict}, &summary.ingest);
  });
  summary.stats_before = compute_stats(docs);
  detail::write_jsonl(m.output_dir / "00-ingest.jsonl", docs);
  summary.final_output = "00-ingest.jsonl";

  std::unique_ptr<ReferenceTokenizer> tokenizer;
  std::vector<Chunk> chunks;
  bool stats_taken = false;

  for (std::size_t i = 0; i < m.stages.size(); ++i) {
    const Stage stage = m.stages[i];
    const std::string name(to_string(stage));
    char prefix[8];
    std::snprintf(prefix, sizeof prefix, "%02zu-", i + 1);
    const std::string file = prefix + name + ".jsonl";
    StageSummary st;
    st.stage = stage;
    st.output_file = file;

    switch (stage) {
      case Stage::filter_lang: {
        auto result = detail::in_stage(name, [&] {
          const auto profiles = m.profiles_path ? load_profiles(m.profiles_path->string())
                                                : build_profiles_from_dir(*m.seeds_dir);
          const RankProfileIdentifier identifier(profiles);
          return filter_documents(std::move(docs), identifier, m.threshold, m.jobs);
        });
        st.input = result.kept.size() + result.rejected.size();
        st.output = result.kept.size();
        st.rejected = result.rejected.size();
        st.input_unit = st.output_unit = "documents";
        detail::write_jsonl(m.output_dir / (std::string(prefix) + name + ".rejected.jsonl"), result.rejected);
        docs = std::move(result.kept);
        detail::write_jsonl(m.output_dir / file, docs);
        break;
      }
      case Stage::clean: {
        st.input = docs.size();
        docs = detail::in_stage(name, [&] { return clean_documents(std::move(docs), m.clean, m.jobs); });
        st.output = docs.size();
        st.input_unit = st.output_unit = "documents";
        detail::write_jsonl(m.output_dir / file, docs);
        break;
      }
      case Stage::chunk: {
        summary.stats_after = compute_stats(docs);
        stats_taken = true;
        auto outcome = detail::in_stage(name, [&] {
          tokenizer = make_tokenizer(m.tokenizer_path);
          return chunk_documents(docs, *tokenizer, PackOptions{m.max_tokens}, m.jobs, m.strict);
        });
        st.input = docs.size();
        st.output = outcome.chunks.size();
        st.rejected = outcome.documents_without_chunks;
        st.input_unit = "documents";
        st.output_unit = "chunks";
        for (auto& e : outcome.errors) summary.errors.push_back(std::move(e));
        chunks = std::move(outcome.chunks);
        detail::write_jsonl(m.output_dir / file, chunks);
        break;
      }
      case Stage::mask: {
        auto examples = detail::in_stage(name, [&] { return mask_chunks(chunks, m.mask, *tokenizer, m.jobs); });
        st.input = chunks.size();
        st.output = examples.size();
        st.input_unit = "chunks";
        st.output_unit = "examples";
        detail::write_jsonl(m.output_dir / file, examples);
        break;
      }
    }
    summary.final_output = file;
    summary.stages.push_back(std::move(st));
  }
  if (!stats_taken) summary.stats_after = compute_stats(docs);

  std::ofstream out(m.output_dir / "summary.json", std::ios::binary | std::ios::trunc);
  out << to_json(summary).dump(2) << '\n';
  return summary;
}

}  // namespace mlmprep
