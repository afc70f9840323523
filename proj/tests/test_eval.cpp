#include "unithood/eval.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace unithood;
using namespace unithood::eval;

namespace {

GoldSet gold3() {
  return {{"k1\t\t", true}, {"k2\t\t", true}, {"k3\t\t", false}};
}

std::vector<std::pair<std::string, bool>> decisions3() {
  return {{"k1\t\t", true}, {"k2\t\t", false}, {"k3\t\t", true}};
}

}  // namespace

TEST(PairKey, CanonicalizesCaseAndWhitespace) {
  EXPECT_EQ(pair_key("E.  Coli", "", "Food   Poisoning"),
            pair_key("e. coli", "", "food poisoning"));
  EXPECT_EQ(pair_key(" National Institute ", "OF", "Allergy"),
            "national institute\tof\tallergy");
  EXPECT_NE(pair_key("a b", "", "c"), pair_key("a", "", "b c"));
}

TEST(LoadGold, ReadsRecordsAndRejectsDuplicates) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "unithood_gold_test.jsonl";
  {
    std::ofstream out(path);
    out << R"({"ax":"E. coli","b":"","ay":"food poisoning","merge":true})" << "\n";
    out << R"({"ax":"risk","b":"of","ay":"outbreak","merge":false})" << "\n";
  }
  const auto gold = load_gold(path);
  EXPECT_EQ(gold.size(), 2u);
  EXPECT_TRUE(gold.at(pair_key("e. coli", "", "food poisoning")));
  EXPECT_FALSE(gold.at(pair_key("risk", "of", "outbreak")));
  {
    std::ofstream out(path, std::ios::app);
    out << R"({"ax":"E. Coli","b":"","ay":"Food Poisoning","merge":false})" << "\n";
  }
  EXPECT_THROW(load_gold(path), ParseError);
  std::filesystem::remove(path);
}

// ---------------------------------------------------------------------------
// Contingency tables

TEST(BuildContingency, EmptyDecisionList) {
  const auto t = build_contingency({}, gold3());
  EXPECT_EQ(t.tp + t.fp + t.fn + t.tn, 0u);
}

TEST(BuildContingency, HandTally) {
  const auto t = build_contingency(decisions3(), gold3());
  EXPECT_EQ(t.tp, 1u);
  EXPECT_EQ(t.fn, 1u);
  EXPECT_EQ(t.fp, 1u);
  EXPECT_EQ(t.tn, 0u);
}

TEST(BuildContingency, AllCorrect) {
  const GoldSet gold = {{"a", true}, {"b", true}, {"c", false}, {"d", false}};
  const std::vector<std::pair<std::string, bool>> decisions = {
      {"a", true}, {"b", true}, {"c", false}, {"d", false}};
  const auto t = build_contingency(decisions, gold);
  EXPECT_EQ(t.tp, 2u);
  EXPECT_EQ(t.tn, 2u);
  EXPECT_EQ(t.fp, 0u);
  EXPECT_EQ(t.fn, 0u);
}

TEST(BuildContingency, UnknownKeysListed) {
  try {
    build_contingency({{"k1\t\t", true}, {"mystery", true}, {"other", false}}, gold3());
    FAIL() << "expected MissingGoldError";
  } catch (const MissingGoldError& e) {
    EXPECT_EQ(e.offenders(), (std::vector<std::string>{"mystery", "other"}));
  }
}

TEST(BuildContingency, OrderInvariant) {
  std::mt19937 rng(21);
  GoldSet gold;
  std::vector<std::pair<std::string, bool>> decisions;
  for (int i = 0; i < 60; ++i) {
    const std::string key = "k" + std::to_string(i);
    gold[key] = (rng() % 2) == 0;
    decisions.emplace_back(key, (rng() % 2) == 0);
  }
  const auto before = build_contingency(decisions, gold);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(decisions.begin(), decisions.end(), rng);
    const auto after = build_contingency(decisions, gold);
    EXPECT_EQ(before.tp, after.tp);
    EXPECT_EQ(before.fp, after.fp);
    EXPECT_EQ(before.fn, after.fn);
    EXPECT_EQ(before.tn, after.tn);
  }
}

// ---------------------------------------------------------------------------
// Metrics

TEST(ComputeMetrics, HandArithmetic) {
  const auto m = compute_metrics({2, 0, 1, 3});
  EXPECT_DOUBLE_EQ(*m.precision, 1.0);
  EXPECT_DOUBLE_EQ(*m.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*m.accuracy, 5.0 / 6.0);
}

TEST(ComputeMetrics, UndefinedMarkers) {
  const auto no_positives = compute_metrics({0, 0, 2, 3});
  EXPECT_FALSE(no_positives.precision.has_value());
  EXPECT_TRUE(no_positives.recall.has_value());

  const auto no_gold_positives = compute_metrics({0, 2, 0, 3});
  EXPECT_FALSE(no_gold_positives.recall.has_value());

  const auto empty = compute_metrics({0, 0, 0, 0});
  EXPECT_FALSE(empty.precision.has_value());
  EXPECT_FALSE(empty.recall.has_value());
  EXPECT_FALSE(empty.accuracy.has_value());
}

// The published results (100% precision, recall 0.95833, accuracy 0.97260 to
// five decimals, on 1,825 pairs) pin down exactly one integer table.
// Re-derive it by exhaustive search before trusting the frozen fixture.
TEST(ComputeMetrics, ReconstructedTableIsUniqueOn1825Pairs) {
  const std::uint64_t total = 1825;
  // Precision 1.0 exactly requires fp = 0 (any fp >= 1 caps precision at
  // 1824/1825), so only fp = 0 tables need enumeration.
  std::vector<ContingencyTable> solutions;
  for (std::uint64_t tp = 1; tp <= total; ++tp) {
    for (std::uint64_t fn = 0; tp + fn <= total; ++fn) {
      const std::uint64_t tn = total - tp - fn;
      const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
      const double accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
      if (std::abs(recall - 0.95833) > 5e-6) continue;
      if (std::abs(accuracy - 0.97260) > 5e-6) continue;
      solutions.push_back({tp, 0, fn, tn});
    }
  }
  ASSERT_EQ(solutions.size(), 1u);
  EXPECT_EQ(solutions[0].tp, 1150u);
  EXPECT_EQ(solutions[0].fp, 0u);
  EXPECT_EQ(solutions[0].fn, 50u);
  EXPECT_EQ(solutions[0].tn, 625u);

  const auto m = compute_metrics(solutions[0]);
  EXPECT_DOUBLE_EQ(*m.precision, 1.0);
  EXPECT_NEAR(*m.recall, 0.95833, 5e-6);
  EXPECT_NEAR(*m.accuracy, 0.97260, 5e-6);
}

// ---------------------------------------------------------------------------
// Threshold sweeps

TEST(ThresholdSweep, GridBelowEveryScoreMergesEverything) {
  const GoldSet gold = {{"k1", true}, {"k2", false}, {"k3", true}};
  const std::vector<std::pair<std::string, Score>> scored = {
      {"k1", Score(1.0)}, {"k2", Score(-2.0)}, {"k3", Score(0.5)}};
  const auto points = threshold_sweep(scored, gold, {-100.0});
  ASSERT_EQ(points.size(), 1u);
  EXPECT_EQ(points[0].table.merged(), 3u);
  EXPECT_DOUBLE_EQ(*points[0].metrics.recall, 1.0);
}

TEST(ThresholdSweep, GridAboveEveryScoreMergesNothing) {
  const GoldSet gold = {{"k1", true}, {"k2", false}};
  const std::vector<std::pair<std::string, Score>> scored = {
      {"k1", Score(1.0)}, {"k2", Score(-2.0)}};
  const auto points = threshold_sweep(scored, gold, {100.0});
  ASSERT_EQ(points.size(), 1u);
  EXPECT_EQ(points[0].table.tp, 0u);
  EXPECT_EQ(points[0].table.fp, 0u);
  EXPECT_FALSE(points[0].metrics.precision.has_value());
}

TEST(ThresholdSweep, HandTally) {
  const GoldSet gold = {{"k1", true}, {"k2", false}};
  const std::vector<std::pair<std::string, Score>> scored = {
      {"k1", Score(2.0)}, {"k2", Score(-1.0)}};
  const auto points = threshold_sweep(scored, gold, {0.0});
  ASSERT_EQ(points.size(), 1u);
  EXPECT_EQ(points[0].table.tp, 1u);
  EXPECT_EQ(points[0].table.tn, 1u);
  EXPECT_DOUBLE_EQ(*points[0].metrics.precision, 1.0);
  EXPECT_DOUBLE_EQ(*points[0].metrics.recall, 1.0);
  EXPECT_DOUBLE_EQ(*points[0].metrics.accuracy, 1.0);
}

TEST(ThresholdSweep, RejectsUnsortedGrid) {
  const GoldSet gold = {{"k1", true}};
  const std::vector<std::pair<std::string, Score>> scored = {{"k1", Score(0.0)}};
  EXPECT_THROW(threshold_sweep(scored, gold, {1.0, 0.0}), ArgumentError);
}

TEST(ThresholdSweep, InfiniteScoresBehaveAtEveryThreshold) {
  const GoldSet gold = {{"hi", true}, {"lo", false}};
  const std::vector<std::pair<std::string, Score>> scored = {
      {"hi", Score::positive_infinity()}, {"lo", Score::negative_infinity()}};
  const auto points = threshold_sweep(scored, gold, {-1e9, 0.0, 1e9});
  for (const auto& p : points) {
    EXPECT_EQ(p.table.tp, 1u);
    EXPECT_EQ(p.table.tn, 1u);
  }
}

TEST(ThresholdSweep, MergedCountAndRecallAreNonIncreasing) {
  std::mt19937 rng(22);
  std::uniform_real_distribution<double> score_dist(-10.0, 10.0);
  for (int trial = 0; trial < 30; ++trial) {
    GoldSet gold;
    std::vector<std::pair<std::string, Score>> scored;
    bool any_positive = false;
    for (int i = 0; i < 50; ++i) {
      const std::string key = "k" + std::to_string(i);
      const bool positive = (rng() % 2) == 0;
      any_positive |= positive;
      gold[key] = positive;
      scored.emplace_back(key, Score(score_dist(rng)));
    }
    std::vector<double> grid;
    for (int i = 0; i < 40; ++i) grid.push_back(-12.0 + 0.6 * i);
    const auto points = threshold_sweep(scored, gold, grid);
    for (std::size_t i = 1; i < points.size(); ++i) {
      EXPECT_LE(points[i].table.merged(), points[i - 1].table.merged());
      if (any_positive) {
        EXPECT_LE(*points[i].metrics.recall, *points[i - 1].metrics.recall);
      }
    }
  }
}

TEST(Metrics, PerfectAccuracyExactlyWhenNoErrors) {
  std::mt19937 rng(23);
  std::uniform_int_distribution<std::uint64_t> cell(0, 5);
  for (int i = 0; i < 200; ++i) {
    const ContingencyTable t{cell(rng), cell(rng), cell(rng), cell(rng)};
    if (t.total() == 0) continue;
    const auto m = compute_metrics(t);
    EXPECT_EQ(*m.accuracy == 1.0, t.fp == 0 && t.fn == 0);
  }
}

// ---------------------------------------------------------------------------
// Reports

TEST(Reports, TextRoundsToFiveDecimalsAndMarksUndefined) {
  const ContingencyTable t{2, 0, 1, 3};
  const auto text = render_text_report(t, compute_metrics(t));
  EXPECT_NE(text.find("precision 1.00000"), std::string::npos);
  EXPECT_NE(text.find("recall    0.66667"), std::string::npos);
  EXPECT_NE(text.find("accuracy  0.83333"), std::string::npos);

  const ContingencyTable empty{0, 0, 0, 0};
  const auto na = render_text_report(empty, compute_metrics(empty));
  EXPECT_NE(na.find("precision n/a"), std::string::npos);
}

TEST(Reports, JsonKeepsFullPrecisionAndNulls) {
  const ContingencyTable t{2, 0, 1, 3};
  const auto j = report_json(t, compute_metrics(t));
  EXPECT_DOUBLE_EQ(j.at("recall").get<double>(), 2.0 / 3.0);
  EXPECT_EQ(j.at("table").at("tp"), 2);

  const ContingencyTable empty{0, 0, 0, 0};
  const auto jn = report_json(empty, compute_metrics(empty));
  EXPECT_TRUE(jn.at("precision").is_null());
}
