// mlmprep: corpus preparation and benchmark scoring for domain-adaptive MLM
// pretraining.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlmprep/mlmprep.hpp"

namespace fs = std::filesystem;
using namespace mlmprep;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr std::size_t kBatch = 4096;

struct Globals {
  std::uint64_t seed = 0;
  bool strict = false;
  unsigned jobs = 1;
};

// "-" means stdin/stdout.
class Input {
public:
  explicit Input(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
      if (!*file_) throw Error("cannot open " + path);
    }
  }
  std::istream& get() { return file_ ? *file_ : std::cin; }

private:
  std::unique_ptr<std::ifstream> file_;
};

class Output {
public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw Error("cannot write " + path);
    }
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

std::string data_path(const char* rel) { return (fs::path(MLMPREP_DATA_DIR) / rel).string(); }

template <class T>
void write_lines(std::ostream& out, const std::vector<T>& items) {
  for (const auto& x : items) out << to_json(x).dump() << '\n';
}

// Reads documents in batches so memory stays bounded, handing each batch to f.
template <class F>
IngestReport for_each_batch(std::istream& in, bool strict, F f) {
  DocumentReader reader(in, IngestOptions{strict});
  std::vector<RawDocument> batch;
  while (auto d = reader.next()) {
    batch.push_back(std::move(*d));
    if (batch.size() == kBatch) {
      f(std::move(batch));
      batch.clear();
    }
  }
  if (!batch.empty()) f(std::move(batch));
  return reader.report();
}

void report_ingest(const char* cmd, const IngestReport& r) {
  std::cerr << cmd << ": " << r.documents << " documents, " << r.malformed << " malformed, " << r.duplicates
            << " duplicate ids\n";
  for (auto line : r.malformed_lines) std::cerr << "  malformed line " << line << '\n';
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus preparation for whole-word-masked LM pretraining, plus benchmark scoring"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_flag("--strict", g.strict, "Abort on the first malformed record or duplicate id");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();

  std::string input = "-";
  std::string output = "-";
  auto add_io = [&](CLI::App* sub) {
    sub->add_option("-i,--input", input, "Input file ('-' for stdin)")->capture_default_str();
    sub->add_option("-o,--output", output, "Output file ('-' for stdout)")->capture_default_str();
  };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate and normalise line-delimited documents");
  add_io(ingest);

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus statistics as one JSON record");
  add_io(stats);
  bool count_tokens = false;
  std::string tokenizer_path;
  stats->add_flag("--count-tokens", count_tokens, "Also count tokens");
  stats->add_option("--tokenizer", tokenizer_path, "Vocabulary file (default: built-in)");

  // build-profiles
  auto* build_profiles = app.add_subcommand("build-profiles", "Build language profiles from seed text directories");
  std::string seeds_dir = data_path("lang_seeds");
  std::size_t top_k = kMaxProfileSize;
  build_profiles->add_option("--seeds", seeds_dir, "Directory with one subdirectory of .txt files per language")
      ->capture_default_str();
  build_profiles->add_option("--top-k", top_k, "N-grams per profile")->check(CLI::Range(1, 400))->capture_default_str();
  build_profiles->add_option("-o,--output", output, "Output file ('-' for stdout)")->capture_default_str();

  // filter-lang
  auto* filter_lang = app.add_subcommand("filter-lang", "Keep documents identified as Spanish above a threshold");
  add_io(filter_lang);
  std::string profiles_path = data_path("profiles.jsonl");
  double threshold = 0.95;
  std::string rejected_path;
  filter_lang->add_option("--profiles", profiles_path, "Language profiles")->capture_default_str();
  filter_lang->add_option("--threshold", threshold, "Confidence must exceed this")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  filter_lang->add_option("--rejected", rejected_path, "Write rejected documents with verdicts here");

  // clean
  auto* clean = app.add_subcommand("clean", "Normalise whitespace and strip control characters");
  add_io(clean);
  CleanPolicy policy;
  bool no_spaces = false, no_newlines = false, no_control = false, no_trim = false;
  clean->add_flag("--no-collapse-spaces", no_spaces);
  clean->add_flag("--no-collapse-newlines", no_newlines);
  clean->add_flag("--no-strip-control", no_control);
  clean->add_flag("--no-trim", no_trim);

  // chunk
  auto* chunk = app.add_subcommand("chunk", "Split into sentences and pack into token-budgeted chunks");
  add_io(chunk);
  std::size_t max_tokens = 512;
  chunk->add_option("--max-tokens", max_tokens, "Token budget per chunk")->capture_default_str();
  chunk->add_option("--tokenizer", tokenizer_path, "Vocabulary file (default: built-in)");

  // mask
  auto* mask = app.add_subcommand("mask", "Whole-word masking of chunk records");
  add_io(mask);
  MaskingConfig mcfg;
  mask->add_option("--tokenizer", tokenizer_path, "Vocabulary file (default: built-in)");
  mask->add_option("--mask-rate", mcfg.mask_rate)->capture_default_str();
  mask->add_option("--p-mask", mcfg.p_mask)->capture_default_str();
  mask->add_option("--p-random", mcfg.p_random)->capture_default_str();
  mask->add_option("--p-keep", mcfg.p_keep)->capture_default_str();

  // split-validation
  auto* split = app.add_subcommand("split-validation", "Hold out a uniform random validation subset");
  std::string split_input;
  std::size_t n_validation = 100000;
  std::string train_path, validation_path;
  split->add_option("-i,--input", split_input, "Input file (read twice, so not stdin)")->required();
  split->add_option("-n,--count", n_validation, "Validation documents")->capture_default_str();
  split->add_option("--train", train_path, "Train output")->required();
  split->add_option("--validation", validation_path, "Validation output")->required();

  // lr-curve
  auto* lr_curve = app.add_subcommand("lr-curve", "Warmup + cosine learning-rate schedule as CSV");
  TrainConfig tcfg;
  std::uint64_t resolution = 101;
  lr_curve->add_option("--total-steps", tcfg.total_steps)->required();
  lr_curve->add_option("--resolution", resolution)->capture_default_str();
  lr_curve->add_option("--lr-peak", tcfg.lr_peak)->capture_default_str();
  lr_curve->add_option("--warmup-frac", tcfg.warmup_frac)->capture_default_str();
  lr_curve->add_option("-o,--output", output, "Output file ('-' for stdout)")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Score prediction files or learning curves");
  std::string curves_path, predictions_path, labels_path, dataset = "dataset", sort_by = "none", format = "table";
  std::string averaging = "micro";
  auto* curves_opt = eval->add_option("--curves", curves_path, "CSV of model,epoch,f1");
  auto* preds_opt = eval->add_option("--predictions", predictions_path, "Line-delimited prediction records");
  curves_opt->excludes(preds_opt);
  eval->add_option("--dataset", dataset)->capture_default_str();
  eval->add_option("--sort-by", sort_by)->check(CLI::IsMember({"none", "max_f1", "auc"}))->capture_default_str();
  eval->add_option("--format", format)->check(CLI::IsMember({"table", "csv"}))->capture_default_str();
  eval->add_option("--averaging", averaging)->check(CLI::IsMember({"micro", "macro"}))->capture_default_str();
  eval->add_option("--labels", labels_path, "Label universe, one label per line");
  eval->add_option("-o,--output", output, "Output file ('-' for stdout)")->capture_default_str();

  // run
  auto* run = app.add_subcommand("run", "Run a pipeline manifest end to end");
  std::string manifest_path;
  run->add_option("--manifest", manifest_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest) {
      Input in(input);
      Output out(output);
      const auto r = for_each_batch(in.get(), g.strict, [&](std::vector<RawDocument> b) { write_lines(out.get(), b); });
      report_ingest("ingest", r);
    } else if (*stats) {
      Input in(input);
      Output out(output);
      std::unique_ptr<ReferenceTokenizer> tok;
      if (count_tokens) tok = make_tokenizer(tokenizer_path.empty() ? std::nullopt : std::optional<fs::path>(tokenizer_path));
      CorpusStats s;
      const auto r = for_each_batch(in.get(), g.strict, [&](std::vector<RawDocument> b) {
        if (!tok) {
          s.merge(compute_stats(b));
          return;
        }
        const auto counts = parallel_map(b, g.jobs, [&](const RawDocument& d) { return tok->tokenize(d.text).size(); });
        for (std::size_t i = 0; i < b.size(); ++i) s.add(b[i], counts[i]);
      });
      if (tok && !s.total_tokens) s.total_tokens = 0;
      out.get() << to_json(s).dump() << '\n';
      report_ingest("stats", r);
    } else if (*build_profiles) {
      Output out(output);
      const auto profiles = build_profiles_from_dir(seeds_dir, top_k);
      if (profiles.size() < 2) throw NoProfiles("seed directory yielded fewer than two languages");
      save_profiles(out.get(), profiles);
      std::cerr << "build-profiles: " << profiles.size() << " languages\n";
    } else if (*filter_lang) {
      Input in(input);
      Output out(output);
      std::unique_ptr<Output> rejected;
      if (!rejected_path.empty()) rejected = std::make_unique<Output>(rejected_path);
      const RankProfileIdentifier identifier(load_profiles(profiles_path));
      std::size_t kept = 0, dropped = 0;
      const auto r = for_each_batch(in.get(), g.strict, [&](std::vector<RawDocument> b) {
        auto res = filter_documents(std::move(b), identifier, threshold, g.jobs);
        kept += res.kept.size();
        dropped += res.rejected.size();
        write_lines(out.get(), res.kept);
        if (rejected) write_lines(rejected->get(), res.rejected);
      });
      report_ingest("filter-lang", r);
      std::cerr << "filter-lang: kept " << kept << ", rejected " << dropped << '\n';
    } else if (*clean) {
      policy.collapse_spaces = !no_spaces;
      policy.collapse_newlines = !no_newlines;
      policy.strip_control = !no_control;
      policy.trim_ends = !no_trim;
      Input in(input);
      Output out(output);
      const auto r = for_each_batch(in.get(), g.strict, [&](std::vector<RawDocument> b) {
        write_lines(out.get(), clean_documents(std::move(b), policy, g.jobs));
      });
      report_ingest("clean", r);
    } else if (*chunk) {
      Input in(input);
      Output out(output);
      const auto tok = make_tokenizer(tokenizer_path.empty() ? std::nullopt : std::optional<fs::path>(tokenizer_path));
      std::size_t n_chunks = 0, empty_docs = 0;
      const auto r = for_each_batch(in.get(), g.strict, [&](std::vector<RawDocument> b) {
        auto res = chunk_documents(b, *tok, PackOptions{max_tokens}, g.jobs, g.strict);
        for (const auto& e : res.errors) std::cerr << "chunk: " << e.item << ": " << e.message << '\n';
        n_chunks += res.chunks.size();
        empty_docs += res.documents_without_chunks;
        write_lines(out.get(), res.chunks);
      });
      report_ingest("chunk", r);
      std::cerr << "chunk: " << n_chunks << " chunks, " << empty_docs << " documents without chunks\n";
    } else if (*mask) {
      mcfg.seed = g.seed;
      mcfg.validate();
      Input in(input);
      Output out(output);
      const auto tok = make_tokenizer(tokenizer_path.empty() ? std::nullopt : std::optional<fs::path>(tokenizer_path));
      LineReader lines(in.get());
      std::vector<Chunk> batch;
      auto flush = [&] {
        write_lines(out.get(), mask_chunks(batch, mcfg, *tok, g.jobs));
        batch.clear();
      };
      std::string line;
      while (lines.next(line)) {
        Json j;
        try {
          j = Json::parse(line);
        } catch (const Json::parse_error& e) {
          throw MalformedRecord(lines.line_number(), e.what());
        }
        batch.push_back(parse_chunk(j, lines.line_number(), *tok));
        if (batch.size() == kBatch) flush();
      }
      if (!batch.empty()) flush();
    } else if (*split) {
      // Pass 1 samples positions, pass 2 routes records; both keep input order.
      ReservoirSampler sampler(n_validation, g.seed);
      {
        Input in(split_input);
        DocumentReader reader(in.get(), IngestOptions{g.strict});
        while (reader.next()) sampler.offer();
        report_ingest("split-validation", reader.report());
      }
      if (n_validation > sampler.seen()) {
        throw InsufficientDocuments("requested " + std::to_string(n_validation) + " validation documents from " +
                                    std::to_string(sampler.seen()));
      }
      const auto picked = sampler.selected_sorted();
      Input in(split_input);
      Output train(train_path), validation(validation_path);
      DocumentReader reader(in.get(), IngestOptions{g.strict});
      std::size_t i = 0, p = 0;
      while (auto d = reader.next()) {
        const bool val = p < picked.size() && picked[p] == i;
        (val ? validation : train).get() << to_json_line(*d) << '\n';
        p += val ? 1 : 0;
        ++i;
      }
      std::cerr << "split-validation: " << (i - picked.size()) << " train, " << picked.size() << " validation\n";
    } else if (*lr_curve) {
      tcfg.validate();
      Output out(output);
      out.get() << "step,lr\n";
      for (const auto& s : emit_schedule(tcfg, resolution)) out.get() << s.step << ',' << shortest(s.lr) << '\n';
    } else if (*eval) {
      Output out(output);
      if (!curves_path.empty()) {
        Input in(curves_path);
        auto report = build_report(read_curves_csv(in.get()), dataset);
        report.sort_by(sort_by == "max_f1" ? SortKey::max_f1 : sort_by == "auc" ? SortKey::auc : SortKey::none);
        if (format == "csv") {
          write_report_csv(out.get(), report);
        } else {
          write_report_table(out.get(), report);
        }
      } else if (!predictions_path.empty()) {
        Input in(predictions_path);
        const auto preds = read_predictions(in.get());
        std::optional<LabelSet> universe;
        if (!labels_path.empty()) {
          Input lin(labels_path);
          universe.emplace();
          LineReader lr(lin.get());
          std::string l;
          while (lr.next(l)) universe->insert(l);
        }
        const double f1 = f1_scores(preds, averaging == "macro" ? Averaging::macro : Averaging::micro,
                                    universe ? &*universe : nullptr);
        out.get() << averaging << "_f1," << format_fixed(f1, 6) << '\n';
      } else {
        std::cerr << "eval: one of --curves or --predictions is required\n";
        return kExitUsage;
      }
    } else if (*run) {
      auto manifest = load_manifest(manifest_path);
      if (app.count("--jobs") > 0) manifest.jobs = g.jobs;
      if (app.count("--strict") > 0) manifest.strict = true;
      if (!manifest.profiles_path && !manifest.seeds_dir) manifest.profiles_path = data_path("profiles.jsonl");
      const auto summary = run_pipeline(manifest);
      for (const auto& st : summary.stages) {
        std::cerr << to_string(st.stage) << ": " << st.input << " " << st.input_unit << " -> " << st.output << " "
                  << st.output_unit << " (" << st.rejected << " rejected)\n";
      }
      for (const auto& e : summary.errors) std::cerr << e.stage << ": " << e.item << ": " << e.message << '\n';
    }
  } catch (const ManifestError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
