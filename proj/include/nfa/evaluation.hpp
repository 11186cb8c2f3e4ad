#pragma once

// Accuracy metrics (MMRE, PRED) and validation protocols comparing the
// calibrated pipeline with its uncalibrated baseline.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nfa/error.hpp"
#include "nfa/models.hpp"
#include "nfa/pipeline.hpp"
#include "nfa/pnfis.hpp"
#include "nfa/schema.hpp"
#include "nfa/training.hpp"

namespace nfa {

inline const std::vector<double>& default_pred_thresholds() {
  static const std::vector<double> thresholds = {20, 25, 30, 50, 100};
  return thresholds;
}

namespace detail {

inline void check_pairs(std::span<const double> actuals, std::span<const double> estimates) {
  if (actuals.empty()) throw Error(ErrorKind::domain, "no projects to evaluate");
  if (actuals.size() != estimates.size())
    throw Error(ErrorKind::domain, "length mismatch: " + std::to_string(actuals.size()) +
                                       " actuals vs " + std::to_string(estimates.size()) +
                                       " estimates");
  for (double a : actuals)
    if (!(a > 0.0)) throw Error(ErrorKind::domain, "actual values must be positive");
}

inline std::vector<double> relative_errors(std::span<const double> actuals,
                                           std::span<const double> estimates) {
  check_pairs(actuals, estimates);
  std::vector<double> mre(actuals.size());
  for (std::size_t j = 0; j < actuals.size(); ++j)
    mre[j] = std::abs(actuals[j] - estimates[j]) / actuals[j];
  return mre;
}

}  // namespace detail

inline double mmre(std::span<const double> actuals, std::span<const double> estimates) {
  const auto mre = detail::relative_errors(actuals, estimates);
  return std::accumulate(mre.begin(), mre.end(), 0.0) / static_cast<double>(mre.size());
}

struct PredResult {
  std::size_t count = 0;
  double fraction = 0.0;
};

inline PredResult pred_from_mre(std::span<const double> mre, double threshold_percent) {
  if (!(threshold_percent > 0.0)) throw Error(ErrorKind::domain, "threshold must be positive");
  if (mre.empty()) throw Error(ErrorKind::domain, "no projects to evaluate");
  const double bound = threshold_percent / 100.0;
  const auto count = static_cast<std::size_t>(
      std::count_if(mre.begin(), mre.end(), [bound](double e) { return e <= bound; }));
  return {count, static_cast<double>(count) / static_cast<double>(mre.size())};
}

/// Count and fraction of projects whose relative error is within the threshold.
inline PredResult pred(std::span<const double> actuals, std::span<const double> estimates,
                       double threshold_percent) {
  return pred_from_mre(detail::relative_errors(actuals, estimates), threshold_percent);
}

/// Displayed accuracy percentage, truncated: 62 of 69 (89.86%) shows as 89.
inline int format_pred_percent(std::size_t count, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::domain, "project count must be positive");
  if (count > n)
    throw Error(ErrorKind::domain,
                "count " + std::to_string(count) + " exceeds project count " + std::to_string(n));
  return static_cast<int>((100 * count) / n);
}

struct PredRow {
  double threshold_percent = 0.0;
  std::size_t count = 0;
  int percent = 0;

  friend bool operator==(const PredRow&, const PredRow&) = default;
};

struct MetricsReport {
  std::size_t n = 0;
  double mmre = 0.0;
  std::vector<PredRow> pred_rows;
  std::vector<double> per_project_mre;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

inline MetricsReport report_from_mre(std::vector<double> mre,
                                     const std::vector<double>& thresholds = default_pred_thresholds()) {
  if (mre.empty()) throw Error(ErrorKind::domain, "no projects to evaluate");
  MetricsReport r;
  r.n = mre.size();
  r.mmre = std::accumulate(mre.begin(), mre.end(), 0.0) / static_cast<double>(r.n);
  for (double t : thresholds) {
    const auto p = pred_from_mre(mre, t);
    r.pred_rows.push_back({t, p.count, format_pred_percent(p.count, r.n)});
  }
  r.per_project_mre = std::move(mre);
  return r;
}

inline MetricsReport make_report(std::span<const double> actuals, std::span<const double> estimates,
                                 const std::vector<double>& thresholds = default_pred_thresholds()) {
  return report_from_mre(detail::relative_errors(actuals, estimates), thresholds);
}

struct ComparisonRow {
  double threshold_percent = 0.0;
  std::size_t baseline_count = 0;
  int baseline_percent = 0;
  std::size_t nfa_count = 0;
  int nfa_percent = 0;
  int improvement = 0;  // percentage points
};

struct Comparison {
  std::size_t n = 0;
  std::vector<ComparisonRow> rows;
  double baseline_mmre = 0.0;
  double nfa_mmre = 0.0;
  int mmre_improvement = 0;  // percent relative reduction
};

/// Relative MMRE reduction in whole percent, rounded: 1.58 -> 1.28 is 19%.
inline int mmre_improvement_percent(double baseline_mmre, double nfa_mmre) {
  if (!(baseline_mmre > 0.0)) return 0;
  return static_cast<int>(std::lround(100.0 * (baseline_mmre - nfa_mmre) / baseline_mmre));
}

inline Comparison compare_report(const MetricsReport& nfa, const MetricsReport& baseline) {
  if (nfa.n != baseline.n)
    throw Error(ErrorKind::domain, "reports cover different project counts (" +
                                       std::to_string(nfa.n) + " vs " +
                                       std::to_string(baseline.n) + ")");
  if (nfa.pred_rows.size() != baseline.pred_rows.size())
    throw Error(ErrorKind::domain, "reports use different PRED thresholds");
  Comparison c;
  c.n = nfa.n;
  for (std::size_t r = 0; r < nfa.pred_rows.size(); ++r) {
    const auto& b = baseline.pred_rows[r];
    const auto& f = nfa.pred_rows[r];
    if (b.threshold_percent != f.threshold_percent)
      throw Error(ErrorKind::domain, "reports use different PRED thresholds");
    c.rows.push_back({b.threshold_percent, b.count, b.percent, f.count, f.percent,
                      f.percent - b.percent});
  }
  c.baseline_mmre = baseline.mmre;
  c.nfa_mmre = nfa.mmre;
  c.mmre_improvement = mmre_improvement_percent(baseline.mmre, nfa.mmre);
  return c;
}

namespace detail {
/// Shortest text that reads back as the same double.
inline std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_threshold(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}
}  // namespace detail

inline std::string render_table(const Comparison& c) {
  std::ostringstream os;
  os << "projects: " << c.n << "\n";
  os << std::left << std::setw(12) << "within" << std::right << std::setw(10) << "baseline"
     << std::setw(8) << "acc" << std::setw(10) << "nfa" << std::setw(8) << "acc"
     << std::setw(13) << "improvement" << "\n";
  for (const auto& r : c.rows) {
    os << std::left << std::setw(12) << (detail::format_threshold(r.threshold_percent) + "%")
       << std::right << std::setw(10) << r.baseline_count << std::setw(8)
       << (std::to_string(r.baseline_percent) + "%") << std::setw(10) << r.nfa_count
       << std::setw(8) << (std::to_string(r.nfa_percent) + "%") << std::setw(13)
       << (std::to_string(r.improvement) + "%") << "\n";
  }
  std::ostringstream b, f;
  b << std::fixed << std::setprecision(2) << c.baseline_mmre;
  f << std::fixed << std::setprecision(2) << c.nfa_mmre;
  os << std::left << std::setw(12) << "MMRE" << std::right << std::setw(18) << b.str()
     << std::setw(18) << f.str() << std::setw(13) << (std::to_string(c.mmre_improvement) + "%")
     << "\n";
  return os.str();
}

/// Columns: threshold, baseline_count, baseline_pct, nfa_count, nfa_pct,
/// improvement. The MMRE row leaves the count columns empty and puts the
/// MMRE values in the percent columns.
inline std::string render_csv(const Comparison& c) {
  std::ostringstream os;
  os << "threshold,baseline_count,baseline_pct,nfa_count,nfa_pct,improvement\n";
  for (const auto& r : c.rows)
    os << detail::format_threshold(r.threshold_percent) << ',' << r.baseline_count << ','
       << r.baseline_percent << ',' << r.nfa_count << ',' << r.nfa_percent << ','
       << r.improvement << '\n';
  os << "MMRE,," << detail::shortest(c.baseline_mmre) << ",," << detail::shortest(c.nfa_mmre)
     << ',' << c.mmre_improvement << '\n';
  return os.str();
}

struct EvaluationResult {
  MetricsReport nfa;
  MetricsReport baseline;
  std::vector<std::string> held_out_ids;  // order of per_project_mre
};

namespace detail {

inline void evaluate_fold(const std::vector<ProjectRecord>& train_set,
                          const std::vector<const ProjectRecord*>& test_set,
                          const FactorSchema& schema, const DependencySet& rules,
                          const NfbParameters& initial_params, const TrainingConfig& config,
                          const ModelRegistry& registry, std::size_t fold,
                          std::vector<double>& actuals, std::vector<double>& nfa_est,
                          std::vector<double>& base_est, std::vector<std::string>& ids) {
  try {
    const auto report = train(train_set, initial_params, config, rules, schema, registry);
    for (const ProjectRecord* r : test_set) {
      nfa_est.push_back(full_pipeline_estimate(r->ratings, r->inputs, rules, report.final_params,
                                               schema, registry)
                            .effort);
      base_est.push_back(
          full_pipeline_estimate(r->ratings, r->inputs, rules, initial_params, schema, registry)
              .effort);
      actuals.push_back(r->actual_effort);
      ids.push_back(r->id);
    }
  } catch (const Error& e) {
    throw Error(e.kind(), "fold " + std::to_string(fold) + ": " + e.what(), "evaluation");
  }
}

}  // namespace detail

/// Leave-one-out: each record is estimated by parameters trained on all the
/// others; the baseline uses the untrained initial parameters.
inline EvaluationResult loocv_evaluate(const std::vector<ProjectRecord>& records,
                                       const FactorSchema& schema, const DependencySet& rules,
                                       const NfbParameters& initial_params,
                                       const TrainingConfig& config,
                                       const std::vector<double>& thresholds = default_pred_thresholds(),
                                       const ModelRegistry& registry = ModelRegistry::builtin()) {
  if (records.size() < 3)
    throw Error(ErrorKind::degenerate,
                "leave-one-out needs at least 3 records, got " + std::to_string(records.size()),
                "evaluation");
  std::vector<double> actuals, nfa_est, base_est;
  std::vector<std::string> ids;
  std::vector<ProjectRecord> train_set;
  for (std::size_t j = 0; j < records.size(); ++j) {
    train_set.clear();
    for (std::size_t i = 0; i < records.size(); ++i)
      if (i != j) train_set.push_back(records[i]);
    detail::evaluate_fold(train_set, {&records[j]}, schema, rules, initial_params, config,
                          registry, j, actuals, nfa_est, base_est, ids);
  }
  return {make_report(actuals, nfa_est, thresholds), make_report(actuals, base_est, thresholds),
          std::move(ids)};
}

/// Single seeded split: a test_fraction share (at least one record) is held
/// out, the rest trains.
inline EvaluationResult holdout_evaluate(const std::vector<ProjectRecord>& records,
                                         const FactorSchema& schema, const DependencySet& rules,
                                         const NfbParameters& initial_params,
                                         const TrainingConfig& config, std::uint64_t seed,
                                         double test_fraction = 1.0 / 3.0,
                                         const std::vector<double>& thresholds = default_pred_thresholds(),
                                         const ModelRegistry& registry = ModelRegistry::builtin()) {
  if (records.size() < 2)
    throw Error(ErrorKind::degenerate, "holdout needs at least 2 records", "evaluation");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorKind::domain, "test fraction must lie in (0, 1)", "evaluation");

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Fisher-Yates with explicit draws so the split does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  auto n_test = static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(records.size())));
  n_test = std::clamp<std::size_t>(n_test, 1, records.size() - 1);

  std::vector<const ProjectRecord*> test_set;
  std::vector<ProjectRecord> train_set;
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (p < n_test)
      test_set.push_back(&records[order[p]]);
    else
      train_set.push_back(records[order[p]]);
  }
  std::vector<double> actuals, nfa_est, base_est;
  std::vector<std::string> ids;
  detail::evaluate_fold(train_set, test_set, schema, rules, initial_params, config, registry, 0,
                        actuals, nfa_est, base_est, ids);
  return {make_report(actuals, nfa_est, thresholds), make_report(actuals, base_est, thresholds),
          std::move(ids)};
}

}  // namespace nfa
