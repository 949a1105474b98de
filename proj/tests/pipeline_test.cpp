#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace mlmprep;
using testutil::TempDir;

namespace {

PipelineManifest full_manifest(const std::filesystem::path& out) {
  PipelineManifest m;
  m.input_path = testutil::fixture("bilingual_10.jsonl");
  m.output_dir = out;
  m.stages = {Stage::filter_lang, Stage::clean, Stage::chunk, Stage::mask};
  m.profiles_path = std::filesystem::path(MLMPREP_DATA_DIR) / "profiles.jsonl";
  m.seed = 2024;
  m.mask.seed = 2024;
  return m;
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

}  // namespace

TEST(Manifest, ParsesAndResolvesRelativePaths) {
  const auto j = Json::parse(R"({
    "input_path": "in/docs.jsonl", "output_dir": "/tmp/out", "stages": ["clean", "chunk", "mask"],
    "seed": 9, "jobs": 3, "chunk": {"max_tokens": 128}, "mask": {"mask_rate": 0.2},
    "clean": {"collapse_newlines": false}})");
  const auto m = parse_manifest(j, "/base");
  EXPECT_EQ(m.input_path, std::filesystem::path("/base/in/docs.jsonl"));
  EXPECT_EQ(m.output_dir, std::filesystem::path("/tmp/out"));
  EXPECT_EQ(m.stages, (std::vector<Stage>{Stage::clean, Stage::chunk, Stage::mask}));
  EXPECT_EQ(m.seed, 9u);
  EXPECT_EQ(m.mask.seed, 9u);
  EXPECT_EQ(m.jobs, 3u);
  EXPECT_EQ(m.max_tokens, 128u);
  EXPECT_EQ(m.mask.mask_rate, 0.2);
  EXPECT_FALSE(m.clean.collapse_newlines);
  EXPECT_TRUE(m.clean.collapse_spaces);
  EXPECT_NO_THROW(m.validate());
}

TEST(Manifest, Errors) {
  EXPECT_THROW(parse_manifest(Json::parse(R"({"output_dir":"o"})"), "."), ManifestError);
  EXPECT_THROW(parse_manifest(Json::parse(R"({"input_path":"i","output_dir":"o","stages":["dedupe"]})"), "."),
               ManifestError);
  EXPECT_THROW(parse_manifest(Json::parse(R"({"input_path":"i","output_dir":"o","seed":"x"})"), "."), ManifestError);
  EXPECT_THROW(load_manifest("/nonexistent/manifest.json"), ManifestError);
}

TEST(Manifest, StageOrderValidation) {
  PipelineManifest m;
  m.profiles_path = "p";
  auto check = [&](std::vector<Stage> s) {
    m.stages = std::move(s);
    m.validate();
  };
  EXPECT_NO_THROW(check({}));
  EXPECT_NO_THROW(check({Stage::clean}));
  EXPECT_NO_THROW(check({Stage::clean, Stage::filter_lang, Stage::chunk}));
  EXPECT_THROW(check({Stage::chunk}), ManifestError);
  EXPECT_THROW(check({Stage::chunk, Stage::clean}), ManifestError);
  EXPECT_THROW(check({Stage::clean, Stage::mask}), ManifestError);
  EXPECT_THROW(check({Stage::clean, Stage::mask, Stage::chunk}), ManifestError);
  EXPECT_THROW(check({Stage::clean, Stage::chunk, Stage::filter_lang}), ManifestError);
  EXPECT_THROW(check({Stage::clean, Stage::clean}), ManifestError);
  m.profiles_path.reset();
  EXPECT_THROW(check({Stage::filter_lang}), ManifestError);
}

TEST(Pipeline, ZeroStagesIsIdentity) {
  TempDir dir("zero");
  PipelineManifest m;
  m.input_path = testutil::fixture("bilingual_10.jsonl");
  m.output_dir = dir.path();
  const auto s = run_pipeline(m);
  EXPECT_EQ(s.final_output, "00-ingest.jsonl");
  EXPECT_EQ(s.stats_before, s.stats_after);
  EXPECT_EQ(s.stats_before.document_count, 10u);
  std::ifstream original(m.input_path);
  std::ifstream copied(dir / "00-ingest.jsonl");
  EXPECT_EQ(read_all(copied), read_all(original));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
}

TEST(Pipeline, FullRunOnBilingualFixture) {
  TempDir dir("full");
  const auto m = full_manifest(dir.path());
  const auto s = run_pipeline(m);
  ASSERT_EQ(s.stages.size(), 4u);

  const auto& gate = s.stages[0];
  EXPECT_EQ(gate.input, 10u);
  EXPECT_EQ(gate.output, 6u);
  EXPECT_EQ(gate.rejected, 4u);
  EXPECT_EQ(lines_of(dir / "01-filter-lang.rejected.jsonl").size(), gate.rejected);
  for (const auto& l : lines_of(dir / "01-filter-lang.rejected.jsonl")) {
    const auto j = Json::parse(l);
    EXPECT_NE(j["verdict_language"], "es");
  }

  const auto& chunk = s.stages[2];
  EXPECT_EQ(chunk.input, 6u);
  EXPECT_GT(chunk.output, 6u);  // the long regional law needs several chunks
  const ReferenceTokenizer tok;
  for (const auto& l : lines_of(dir / "03-chunk.jsonl")) {
    const auto c = parse_chunk(Json::parse(l), 1, tok);
    EXPECT_LE(c.token_count(), 512u);
  }
  EXPECT_EQ(s.stages[3].output, chunk.output);
  EXPECT_EQ(lines_of(dir / "04-mask.jsonl").size(), chunk.output);
  EXPECT_EQ(s.final_output, "04-mask.jsonl");
  EXPECT_EQ(s.stats_after.document_count, 6u);
  EXPECT_LT(s.stats_after.total_bytes, s.stats_before.total_bytes);
  EXPECT_TRUE(s.errors.empty());

  // Conservation for every stage.
  for (const auto& st : s.stages) {
    if (st.input_unit == st.output_unit) {
      EXPECT_EQ(st.input, st.output + st.rejected) << to_string(st.stage);
    }
  }
}

TEST(Pipeline, RerunIsByteIdenticalAndJobsIndependent) {
  TempDir a("a");
  TempDir b("b");
  auto ma = full_manifest(a.path());
  auto mb = full_manifest(b.path());
  mb.jobs = 3;
  run_pipeline(ma);
  run_pipeline(mb);
  for (const char* f : {"00-ingest.jsonl", "01-filter-lang.jsonl", "01-filter-lang.rejected.jsonl", "02-clean.jsonl",
                        "03-chunk.jsonl", "04-mask.jsonl", "summary.json"}) {
    EXPECT_EQ(testutil::slurp(a / f), testutil::slurp(b / f)) << f;
  }
}

TEST(Pipeline, SeedChangesMasksOnly) {
  TempDir a("s1");
  TempDir b("s2");
  auto ma = full_manifest(a.path());
  auto mb = full_manifest(b.path());
  mb.seed = mb.mask.seed = 7;
  run_pipeline(ma);
  run_pipeline(mb);
  EXPECT_EQ(testutil::slurp(a / "03-chunk.jsonl"), testutil::slurp(b / "03-chunk.jsonl"));
  EXPECT_NE(testutil::slurp(a / "04-mask.jsonl"), testutil::slurp(b / "04-mask.jsonl"));
}

TEST(Pipeline, MissingInputNamesStage) {
  TempDir dir("missing");
  PipelineManifest m;
  m.input_path = dir / "nope.jsonl";
  m.output_dir = dir.path();
  try {
    run_pipeline(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("ingest:", 0), 0u) << e.what();
  }
}

TEST(Pipeline, SeedsDirectoryInsteadOfProfiles) {
  TempDir dir("seeds");
  auto m = full_manifest(dir.path());
  m.profiles_path.reset();
  m.seeds_dir = std::filesystem::path(MLMPREP_DATA_DIR) / "lang_seeds";
  EXPECT_EQ(run_pipeline(m).stages[0].output, 6u);
}

TEST(Parallel, PreservesOrderAndPropagates) {
  std::vector<int> v(1000);
  for (int i = 0; i < 1000; ++i) v[static_cast<std::size_t>(i)] = i;
  const auto sq = parallel_map(v, 4, [](int x) { return x * x; });
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sq[static_cast<std::size_t>(i)], i * i);
  EXPECT_THROW(parallel_map(v, 4,
                            [](int x) {
                              if (x == 500) throw InvalidConfig("boom");
                              return x;
                            }),
               InvalidConfig);
}
