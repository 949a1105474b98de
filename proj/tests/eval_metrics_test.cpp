#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "test_util.hpp"

using namespace mlmprep;

namespace {

LearningCurve curve(std::string name, std::vector<CurvePoint> pts) { return {std::move(name), std::move(pts)}; }

PredictionRecord rec(std::string id, LabelSet gold, LabelSet pred) {
  return {std::move(id), std::move(gold), std::move(pred)};
}

std::vector<LearningCurve> table2_curves() {
  std::ifstream in(testutil::fixture("table2_curves.csv"));
  return read_curves_csv(in);
}

}  // namespace

TEST(F1, HandTalliedFixture) {
  // TP=3 (a, a, b), FP=1 (a in record 3), FN=1 (b in record 2).
  const std::vector<PredictionRecord> p{rec("1", {"a"}, {"a"}), rec("2", {"a", "b"}, {"a"}),
                                        rec("3", {"b"}, {"a", "b"})};
  const LabelSet universe{"a", "b"};
  EXPECT_EQ(f1_scores(p, Averaging::micro, &universe), 0.75);
  // a: TP 2, FP 1, FN 0 -> 4/5; b: TP 1, FP 0, FN 1 -> 2/3.
  EXPECT_DOUBLE_EQ(f1_scores(p, Averaging::macro, &universe), (0.8 + 2.0 / 3.0) / 2);
}

TEST(F1, PerfectAndDisjoint) {
  const std::vector<PredictionRecord> perfect{rec("1", {"a"}, {"a"}), rec("2", {"b", "c"}, {"b", "c"})};
  EXPECT_EQ(f1_scores(perfect, Averaging::micro), 1.0);
  EXPECT_EQ(f1_scores(perfect, Averaging::macro), 1.0);
  const std::vector<PredictionRecord> wrong{rec("1", {"a"}, {"b"}), rec("2", {"b"}, {"a"})};
  EXPECT_EQ(f1_scores(wrong, Averaging::micro), 0.0);
  EXPECT_EQ(f1_scores(wrong, Averaging::macro), 0.0);
}

TEST(F1, MacroCountsUnusedLabelsAsZero) {
  const std::vector<PredictionRecord> p{rec("1", {"a"}, {"a"})};
  const LabelSet universe{"a", "b"};
  EXPECT_EQ(f1_scores(p, Averaging::macro, &universe), 0.5);
  EXPECT_EQ(f1_scores(p, Averaging::micro, &universe), 1.0);
}

TEST(F1, Errors) {
  EXPECT_THROW(f1_scores({}, Averaging::micro), EmptyPredictions);
  const LabelSet universe{"a"};
  EXPECT_THROW(f1_scores({rec("1", {"a"}, {"z"})}, Averaging::micro, &universe), UnknownLabel);
  EXPECT_THROW(f1_scores({rec("1", {"z"}, {"a"})}, Averaging::macro, &universe), UnknownLabel);
}

TEST(F1, EmptyLabelSetsEverywhere) {
  EXPECT_EQ(f1_scores({rec("1", {}, {})}, Averaging::micro), 0.0);
}

TEST(F1Property, MicroEqualsAccuracyForSingleLabel) {
  std::mt19937_64 g(13);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<PredictionRecord> p;
    std::size_t correct = 0;
    for (int i = 0; i < 500; ++i) {
      const auto gold = std::to_string(g() % 6);
      const auto pred = g() % 3 == 0 ? gold : std::to_string(g() % 6);
      correct += gold == pred;
      p.push_back(rec(std::to_string(i), {gold}, {pred}));
    }
    // FP = FN = n - c, so F1 = 2c / 2n: the same real as c / n, hence the
    // same correctly rounded double.
    EXPECT_EQ(f1_scores(p, Averaging::micro), static_cast<double>(correct) / 500.0);
  }
}

TEST(Predictions, ParseAndRead) {
  std::istringstream in(
      "{\"example_id\":\"e1\",\"gold\":[\"a\"],\"predicted\":[\"a\",\"b\"]}\n"
      "{\"example_id\":2,\"gold\":[3],\"predicted\":[]}\n");
  const auto p = read_predictions(in);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].predicted, (LabelSet{"a", "b"}));
  EXPECT_EQ(p[1].example_id, "2");
  EXPECT_EQ(p[1].gold, LabelSet{"3"});
  EXPECT_THROW(parse_prediction("{\"example_id\":\"x\",\"gold\":[1.5],\"predicted\":[]}", 4), MalformedRecord);
}

TEST(MaxF1, Examples) {
  EXPECT_EQ(max_f1(curve("c", {{0, 0.5}, {2, 0.5}})), 0.5);
  EXPECT_EQ(max_f1(curve("c", {{1, 0.4}, {2, 0.8}, {3, 0.7}})), 0.8);
  EXPECT_EQ(max_f1(curve("c", {{1, 0.3}})), 0.3);
}

TEST(Auc, Examples) {
  EXPECT_EQ(curve_auc(curve("c", {{0, 0.5}, {2, 0.5}})), 1.0);
  EXPECT_DOUBLE_EQ(curve_auc(curve("c", {{1, 0.4}, {2, 0.8}})), 0.6);
  EXPECT_EQ(curve_auc(curve("c", {{0, 0}, {1, 1}, {2, 0}})), 1.0);
  EXPECT_THROW(curve_auc(curve("c", {{1, 0.4}})), InsufficientPoints);
  EXPECT_THROW(curve_auc(curve("c", {})), InsufficientPoints);
}

TEST(Auc, InvalidCurves) {
  EXPECT_THROW(curve_auc(curve("c", {{1, 0.4}, {1, 0.5}})), InvalidConfig);
  EXPECT_THROW(curve_auc(curve("c", {{2, 0.4}, {1, 0.5}})), InvalidConfig);
  EXPECT_THROW(curve_auc(curve("c", {{0, 0.4}, {1, 1.5}})), InvalidConfig);
}

TEST(AucProperty, LinearityShiftAdditivityDominance) {
  std::mt19937_64 g(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<CurvePoint> pts;
    double e = u(g) * 3;
    const std::size_t n = 2 + g() % 9;
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back({e, u(g)});
      e += 0.05 + u(g) * 2;
    }
    const double a = curve_auc(curve("c", pts));
    EXPECT_GE(a, 0.0);

    auto scaled = pts;
    for (auto& p : scaled) p.f1 *= 0.5;
    EXPECT_NEAR(curve_auc(curve("c", scaled)), 0.5 * a, 1e-12);

    auto shifted = pts;
    for (auto& p : shifted) p.epoch += 7.25;
    EXPECT_NEAR(curve_auc(curve("c", shifted)), a, 1e-12);

    if (n >= 3) {
      const std::size_t k = 1 + g() % (n - 2);
      const std::vector<CurvePoint> left(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(k) + 1);
      const std::vector<CurvePoint> right(pts.begin() + static_cast<std::ptrdiff_t>(k), pts.end());
      EXPECT_NEAR(curve_auc(curve("l", left)) + curve_auc(curve("r", right)), a, 1e-12);
    }

    auto higher = pts;
    for (auto& p : higher) p.f1 = std::min(1.0, p.f1 + u(g) * 0.1);
    EXPECT_GE(curve_auc(curve("h", higher)), a);
  }
}

TEST(Report, Singleton) {
  const auto r = build_report({curve("m", {{0, 0.5}, {2, 0.5}})}, "ds");
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].max_f1, 0.5);
  EXPECT_EQ(r.rows[0].auc, 1.0);
  EXPECT_TRUE(r.rows[0].best_max_f1);
  EXPECT_TRUE(r.rows[0].best_auc);
}

TEST(Report, DominanceAndDuplicates) {
  const auto r = build_report({curve("B", {{0, 0.2}, {1, 0.4}}), curve("A", {{0, 0.3}, {1, 0.5}})}, "ds");
  EXPECT_FALSE(r.find("B")->best_max_f1);
  EXPECT_TRUE(r.find("A")->best_max_f1);
  EXPECT_TRUE(r.find("A")->best_auc);
  EXPECT_EQ(r.find("C"), nullptr);
  EXPECT_THROW(build_report({curve("A", {{0, 0.1}, {1, 0.2}}), curve("A", {{0, 0.1}, {1, 0.2}})}, "ds"),
               DuplicateModelName);
}

TEST(Report, TiesAllFlagged) {
  const auto r = build_report({curve("x", {{0, 0.5}, {1, 0.5}}), curve("y", {{0, 0.5}, {1, 0.5}})}, "ds");
  EXPECT_TRUE(r.rows[0].best_auc && r.rows[1].best_auc);
}

TEST(Report, Table2Fixture) {
  auto r = build_report(table2_curves(), "Private multiclass");
  ASSERT_EQ(r.rows.size(), 4u);
  const auto* mel = r.find("MEL");
  ASSERT_NE(mel, nullptr);
  EXPECT_EQ(format_fixed(mel->max_f1, 4), "0.9260");
  EXPECT_EQ(format_fixed(mel->auc, 4), "8.0510");
  EXPECT_TRUE(mel->best_max_f1);
  EXPECT_TRUE(mel->best_auc);
  EXPECT_EQ(format_fixed(r.find("RoBERTalex")->auc, 4), "5.8929");
  EXPECT_EQ(format_fixed(r.find("XLM-RoBERTa-Large")->max_f1, 4), "0.9103");
  EXPECT_EQ(format_fixed(r.find("Legal-XLM-RoBERTa-Large")->auc, 4), "7.8487");

  r.sort_by(SortKey::auc);
  EXPECT_EQ(r.rows.front().model_name, "MEL");
  EXPECT_EQ(r.rows.back().model_name, "RoBERTalex");
  r.sort_by(SortKey::max_f1);
  EXPECT_EQ(r.rows[1].model_name, "XLM-RoBERTa-Large");
}

TEST(Report, CsvAndTable) {
  auto r = build_report(table2_curves(), "multiclass");
  std::ostringstream csv;
  write_report_csv(csv, r);
  EXPECT_NE(csv.str().find("multiclass,MEL,0.9260,8.0510,1,1,0.0000,10.0000\n"), std::string::npos);
  EXPECT_EQ(csv.str().rfind("dataset,model,max_f1,auc,best_max_f1,best_auc,auc_from,auc_to\n", 0), 0u);

  std::ostringstream table;
  write_report_table(table, r);
  EXPECT_NE(table.str().find("0.9260*"), std::string::npos);
  EXPECT_NE(table.str().find("8.0510*"), std::string::npos);
  EXPECT_EQ(table.str().find("0.7007*"), std::string::npos);
}

TEST(Curves, CsvParsing) {
  std::istringstream in("model,epoch,f1\nA,0,0.1\nB, x,0,0.2\nA,1,0.3\nB, x,1,0.4\n");
  const auto c = read_curves_csv(in);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].model_name, "A");
  EXPECT_EQ(c[1].model_name, "B, x");
  EXPECT_EQ(c[1].points.size(), 2u);

  std::istringstream bad("A,0,0.1\nA,zero,0.2\n");
  EXPECT_THROW(read_curves_csv(bad), MalformedRecord);
  std::istringstream unsorted("A,1,0.1\nA,0,0.2\n");
  EXPECT_THROW(read_curves_csv(unsorted), InvalidConfig);
}
