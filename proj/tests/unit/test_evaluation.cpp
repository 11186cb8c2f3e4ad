#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "nfa/evaluation.hpp"
#include "test_support.hpp"

using namespace nfa;

namespace {

/// MRE list whose cumulative counts within each threshold match `counts`;
/// values sit strictly between consecutive thresholds.
std::vector<double> mre_with_counts(const std::vector<double>& thresholds,
                                    const std::vector<std::size_t>& counts, std::size_t n) {
  std::vector<double> mre;
  double lower = 0.0;
  std::size_t placed = 0;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    const double upper = thresholds[t] / 100.0;
    for (; placed < counts[t]; ++placed) mre.push_back((lower + upper) / 2.0);
    lower = upper;
  }
  for (; placed < n; ++placed) mre.push_back(lower + 1.0);
  return mre;
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(Mmre, Examples) {
  const std::vector<double> a{100.0, 200.0}, e{80.0, 250.0};
  EXPECT_DOUBLE_EQ(mmre(a, e), 0.225);
  EXPECT_EQ(mmre(a, a), 0.0);
  EXPECT_THROW(mmre(std::vector<double>{}, std::vector<double>{}), Error);
  EXPECT_THROW(mmre(a, std::vector<double>{1.0}), Error);
  EXPECT_THROW(mmre(std::vector<double>{0.0}, std::vector<double>{1.0}), Error);
}

TEST(Pred, BoundaryIsInclusive) {
  const std::vector<double> a{100.0, 100.0, 100.0, 100.0}, e{120.0, 121.0, 80.0, 100.0};
  const auto p = pred(a, e, 20);
  EXPECT_EQ(p.count, 3u);
  EXPECT_DOUBLE_EQ(p.fraction, 0.75);
  EXPECT_THROW(pred(a, e, 0), Error);
}

TEST(FormatPredPercent, Truncates) {
  EXPECT_EQ(format_pred_percent(62, 69), 89);
  EXPECT_EQ(format_pred_percent(49, 69), 71);
  EXPECT_EQ(format_pred_percent(69, 69), 100);
  EXPECT_EQ(format_pred_percent(0, 69), 0);
  EXPECT_THROW(format_pred_percent(70, 69), Error);
  EXPECT_THROW(format_pred_percent(0, 0), Error);
}

TEST(MmreImprovement, RoundsToWholePercent) {
  EXPECT_EQ(mmre_improvement_percent(1.38, 1.10), 20);
  EXPECT_EQ(mmre_improvement_percent(1.58, 1.28), 19);
  EXPECT_EQ(mmre_improvement_percent(1.57, 1.17), 25);
  EXPECT_EQ(mmre_improvement_percent(1.39, 1.03), 26);
  EXPECT_EQ(mmre_improvement_percent(1.42, 1.11), 22);
  EXPECT_EQ(mmre_improvement_percent(1.0, 1.5), -50);
}

TEST(Comparison, SixtyNineProjectTable) {
  const std::vector<double> th{20, 30, 50, 100};
  const auto base = report_from_mre(mre_with_counts(th, {49, 56, 65, 69}, 69), th);
  const auto nfa = report_from_mre(mre_with_counts(th, {62, 64, 67, 69}, 69), th);
  const auto c = compare_report(nfa, base);
  const std::vector<int> bp{71, 81, 94, 100}, np{89, 92, 97, 100}, imp{18, 11, 3, 0};
  ASSERT_EQ(c.rows.size(), 4u);
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(c.rows[r].baseline_percent, bp[r]);
    EXPECT_EQ(c.rows[r].nfa_percent, np[r]);
    EXPECT_EQ(c.rows[r].improvement, imp[r]);
  }
  const auto lines = csv_lines(render_csv(c));
  EXPECT_EQ(lines[1], "20,49,71,62,89,18");
  EXPECT_EQ(lines[2], "30,56,81,64,92,11");
  EXPECT_EQ(lines[3], "50,65,94,67,97,3");
  EXPECT_EQ(lines[4], "100,69,100,69,100,0");
}

TEST(Comparison, SixtyThreeProjectTable) {
  const std::vector<double> th{20, 25, 30, 50, 100};
  const auto base = report_from_mre(mre_with_counts(th, {21, 25, 33, 50, 63}, 63), th);
  const auto nfa = report_from_mre(mre_with_counts(th, {28, 33, 37, 52, 63}, 63), th);
  const auto c = compare_report(nfa, base);
  const std::vector<int> bp{33, 39, 52, 79, 100}, np{44, 52, 58, 82, 100}, imp{11, 13, 6, 3, 0};
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_EQ(c.rows[r].baseline_percent, bp[r]);
    EXPECT_EQ(c.rows[r].nfa_percent, np[r]);
    EXPECT_EQ(c.rows[r].improvement, imp[r]);
  }
}

TEST(Comparison, MismatchedReportsRejected) {
  const auto a = report_from_mre({0.1, 0.2, 0.3});
  const auto b = report_from_mre({0.1, 0.2});
  EXPECT_THROW(compare_report(a, b), Error);
  const auto c = report_from_mre({0.1, 0.2, 0.3}, {20, 30});
  EXPECT_THROW(compare_report(a, c), Error);
}

TEST(Render, CsvColumnOrderAndMmreRow) {
  const auto base = report_from_mre({1.38});
  const auto nfa = report_from_mre({1.10});
  const auto c = compare_report(nfa, base);
  const auto lines = csv_lines(render_csv(c));
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], "threshold,baseline_count,baseline_pct,nfa_count,nfa_pct,improvement");
  EXPECT_EQ(lines[6].rfind("MMRE,,1.38", 0), 0u);
  EXPECT_EQ(lines[6].substr(lines[6].rfind(',') + 1), "20");
  const auto table = render_table(c);
  EXPECT_NE(table.find("1.38"), std::string::npos);
  EXPECT_NE(table.find("1.10"), std::string::npos);
  EXPECT_NE(table.find("20%"), std::string::npos);
}

TEST(ReportProperties, PredMonotoneInThresholdAndBounded) {
  std::mt19937_64 rng(3);
  std::exponential_distribution<double> e(2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> mre(1 + rng() % 80);
    for (auto& v : mre) v = e(rng);
    const auto r = report_from_mre(mre);
    for (std::size_t k = 0; k < r.pred_rows.size(); ++k) {
      EXPECT_GE(r.pred_rows[k].percent, 0);
      EXPECT_LE(r.pred_rows[k].percent, 100);
      if (k > 0) EXPECT_GE(r.pred_rows[k].count, r.pred_rows[k - 1].count);
    }
    EXPECT_GE(r.mmre, 0.0);
  }
}

// ---------------------------------------------------------------------------
// Protocols

namespace {

std::vector<ProjectRecord> small_dataset(const ParameterDocument& doc, std::size_t n, std::uint64_t seed) {
  SyntheticOptions opt;
  opt.projects = n;
  opt.seed = seed;
  return generate_synthetic_dataset(doc.schema, doc.params, doc.coefficients, opt).records;
}

}  // namespace

TEST(Loocv, PerfectFitGivesZeroMmreEverywhere) {
  const auto doc = default_document();
  const auto ds = nfa::testing::recovery_dataset(doc);
  std::vector<ProjectRecord> recs(ds.records.begin(), ds.records.begin() + 10);
  TrainingConfig cfg;
  cfg.epochs = 5;
  const auto r = loocv_evaluate(recs, doc.schema, {}, ds.truth, cfg);
  EXPECT_LT(r.nfa.mmre, 1e-12);
  EXPECT_LT(r.baseline.mmre, 1e-12);
  EXPECT_EQ(r.nfa.n, 10u);
  EXPECT_EQ(r.held_out_ids.front(), recs.front().id);
}

TEST(Loocv, TrainingBeatsBaselineOnPerturbedData) {
  const auto doc = default_document();
  const auto recs = small_dataset(doc, 30, 5);
  TrainingConfig cfg;
  cfg.epochs = 200;
  const auto r = loocv_evaluate(recs, doc.schema, {}, doc.params, cfg);
  EXPECT_LT(r.nfa.mmre, r.baseline.mmre);
  EXPECT_EQ(r.nfa.per_project_mre.size(), 30u);
}

TEST(Loocv, ThreeRecordsGiveThreeFoldsTwoAreDegenerate) {
  const auto doc = default_document();
  auto recs = small_dataset(doc, 3, 8);
  TrainingConfig cfg;
  cfg.epochs = 3;
  EXPECT_EQ(loocv_evaluate(recs, doc.schema, {}, doc.params, cfg).nfa.n, 3u);
  recs.pop_back();
  try {
    loocv_evaluate(recs, doc.schema, {}, doc.params, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
  }
}

TEST(Loocv, FoldFailureNamesTheFold) {
  const auto doc = default_document();
  auto recs = small_dataset(doc, 4, 8);
  for (std::size_t j = 1; j < recs.size(); ++j) recs[j].weight = 0.0;
  TrainingConfig cfg;
  cfg.epochs = 2;
  try {
    loocv_evaluate(recs, doc.schema, {}, doc.params, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "evaluation");
    EXPECT_NE(std::string(e.what()).find("fold 0"), std::string::npos);
  }
}

TEST(Holdout, SeededSplitIsDeterministic) {
  const auto doc = default_document();
  const auto recs = small_dataset(doc, 30, 5);
  TrainingConfig cfg;
  cfg.epochs = 50;
  const auto a = holdout_evaluate(recs, doc.schema, {}, doc.params, cfg, 7);
  const auto b = holdout_evaluate(recs, doc.schema, {}, doc.params, cfg, 7);
  const auto c = holdout_evaluate(recs, doc.schema, {}, doc.params, cfg, 8);
  EXPECT_EQ(a.held_out_ids, b.held_out_ids);
  EXPECT_EQ(a.nfa, b.nfa);
  EXPECT_NE(a.held_out_ids, c.held_out_ids);
  EXPECT_EQ(a.held_out_ids.size(), 10u);
  EXPECT_THROW(holdout_evaluate(recs, doc.schema, {}, doc.params, cfg, 7, 1.0), Error);
}
