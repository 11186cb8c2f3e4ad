#pragma once

// Calibration of the FMP matrix against weighted project history.
//
// Loss is the weighted mean magnitude of relative error (MMRE) of the full
// pipeline. Training is full-batch projected gradient descent: after every
// step each factor's FMP row is projected back onto its monotone cone
// (pool-adjacent-violators) and floored at min_fmp, so the constraints hold
// at every epoch, not only at the end.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nfa/error.hpp"
#include "nfa/models.hpp"
#include "nfa/nfb.hpp"
#include "nfa/pipeline.hpp"
#include "nfa/pnfis.hpp"
#include "nfa/schema.hpp"

namespace nfa {

/// Euclidean projection onto sequences ordered per `direction`, followed by
/// a floor clamp. `none` applies only the floor.
inline std::vector<double> isotonic_project(std::vector<double> values, Direction direction,
                                            double floor) {
  const bool reversed = direction == Direction::decreasing;
  if (direction != Direction::none && values.size() > 1) {
    if (reversed) std::reverse(values.begin(), values.end());

    // Blocks of pooled values: (mean, count).
    std::vector<std::pair<double, std::size_t>> blocks;
    blocks.reserve(values.size());
    for (double v : values) {
      blocks.emplace_back(v, 1);
      while (blocks.size() > 1 && blocks[blocks.size() - 2].first > blocks.back().first) {
        auto [m2, n2] = blocks.back();
        blocks.pop_back();
        auto& [m1, n1] = blocks.back();
        m1 = (m1 * static_cast<double>(n1) + m2 * static_cast<double>(n2)) /
             static_cast<double>(n1 + n2);
        n1 += n2;
      }
    }
    std::size_t k = 0;
    for (const auto& [m, n] : blocks)
      for (std::size_t j = 0; j < n; ++j) values[k++] = m;

    if (reversed) std::reverse(values.begin(), values.end());
  }
  for (double& v : values) v = std::max(v, floor);
  return values;
}

inline NfbParameters project_parameters(const NfbParameters& params, const FactorSchema& schema,
                                        double floor) {
  NfbParameters out;
  out.fmp.reserve(params.fmp.size());
  for (std::size_t i = 0; i < params.fmp.size(); ++i)
    out.fmp.push_back(isotonic_project(params.fmp[i], schema.factors[i].direction, floor));
  return out;
}

struct EpochInfo {
  int epoch;
  double loss;
  const NfbParameters& params;
};

struct TrainingConfig {
  double learning_rate = 0.05;
  int epochs = 500;
  double min_fmp = 1e-3;
  bool keep_best = true;
  std::uint64_t seed = 0;
  std::string loss_id = "mre_mean";
  /// Called after every epoch with the projected parameters.
  std::function<void(const EpochInfo&)> on_epoch;

  void validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      throw Error(ErrorKind::domain, "learning_rate must be non-negative", "training");
    if (epochs < 1) throw Error(ErrorKind::domain, "epochs must be at least 1", "training");
    if (!(min_fmp > 0.0)) throw Error(ErrorKind::domain, "min_fmp must be positive", "training");
    if (loss_id != "mre_mean")
      throw Error(ErrorKind::domain, "unsupported loss '" + loss_id + "'", "training");
  }
};

struct TrainingReport {
  std::vector<double> loss_history;  // loss after each epoch's update
  int best_epoch = 0;                // 0 = the projected initial parameters
  NfbParameters final_params;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

namespace detail {

/// Per-record quantities that stay fixed while FMP values change: the
/// adjusted ratings and hence the normalized firing strengths.
struct RecordActivation {
  const ProjectRecord* record;
  const AlgorithmicModel* model;
  // Sparse w_bar per factor: (level, weight) pairs with weight > 0.
  std::vector<std::vector<std::pair<std::size_t, double>>> w_bar;
};

class LossEvaluator {
 public:
  LossEvaluator(const std::vector<ProjectRecord>& records, const DependencySet& rules,
                const FactorSchema& schema, const ModelRegistry& registry)
      : schema_(schema) {
    if (records.empty()) throw Error(ErrorKind::degenerate, "no project records", "training");
    if (auto report = validate_rules(rules, schema); !report.empty())
      throw Error(ErrorKind::precondition, "dependency rules are invalid: " + describe(report),
                  "pnfis");
    total_weight_ = 0.0;
    for (const auto& r : records) {
      if (!(r.weight >= 0.0) || !std::isfinite(r.weight))
        throw Error(ErrorKind::domain, "record '" + r.id + "' has invalid weight", "training");
      if (!(r.actual_effort > 0.0) || !std::isfinite(r.actual_effort))
        throw Error(ErrorKind::domain, "record '" + r.id + "' needs positive actual effort",
                    "training");
      validate_inputs(r.inputs, registry);
      total_weight_ += r.weight;
    }
    if (!(total_weight_ > 0.0))
      throw Error(ErrorKind::degenerate, "all record weights are zero", "training");

    for (const auto& r : records) {
      RecordActivation act{&r, &registry.get(r.inputs.model_id), {}};
      const RatingVector arf = pnfis_adjust(r.ratings, rules, schema);
      for (std::size_t i = 0; i < schema.size(); ++i) {
        // Unit consequents: only the normalized strengths are needed.
        const std::vector<double> ones(schema.factors[i].level_count(), 1.0);
        const auto row = nfb_forward(arf.values[i], ones);
        std::vector<std::pair<std::size_t, double>> sparse;
        for (std::size_t k = 0; k < row.w_bar.size(); ++k)
          if (row.w_bar[k] > 0.0) sparse.emplace_back(k, row.w_bar[k]);
        act.w_bar.push_back(std::move(sparse));
      }
      activations_.push_back(std::move(act));
    }
  }

  double total_weight() const noexcept { return total_weight_; }

  /// Weighted MMRE; fills `gradient` (shaped like fmp) when non-null.
  double evaluate(const NfbParameters& params, NfbParameters* gradient, int epoch = 0) const {
    const std::size_t n = schema_.size();
    if (gradient) {
      gradient->fmp.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        gradient->fmp[i].assign(schema_.factors[i].level_count(), 0.0);
    }
    std::vector<double> fm(n), partials(n);
    double loss = 0.0;
    for (const auto& act : activations_) {
      const ProjectRecord& r = *act.record;
      for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (const auto& [k, wb] : act.w_bar[i]) v += wb * params.fmp[i][k];
        fm[i] = v;
      }
      const double est = act.model->effort(r.inputs.size, r.inputs.coefficients, fm);
      if (!std::isfinite(est)) throw TrainingError(epoch, r.id, "estimate is not finite");
      const double diff = est - r.actual_effort;
      const double share = r.weight / total_weight_;
      loss += share * std::abs(diff) / r.actual_effort;

      if (!gradient) continue;
      if (!act.model->has_derivatives())
        throw Error(ErrorKind::capability,
                    "model '" + r.inputs.model_id + "' does not provide derivatives", "training");
      if (diff == 0.0 || r.weight == 0.0) continue;
      act.model->effort_partials(r.inputs.size, r.inputs.coefficients, fm, partials);
      const double scale = share * (diff > 0.0 ? 1.0 : -1.0) / r.actual_effort;
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(partials[i]))
          throw TrainingError(epoch, r.id, "gradient is not finite");
        for (const auto& [k, wb] : act.w_bar[i]) gradient->fmp[i][k] += scale * partials[i] * wb;
      }
    }
    if (!std::isfinite(loss))
      throw TrainingError(epoch, activations_.front().record->id, "loss is not finite");
    return loss;
  }

 private:
  const FactorSchema& schema_;
  double total_weight_ = 0.0;
  std::vector<RecordActivation> activations_;
};

}  // namespace detail

inline double mre_loss(const std::vector<ProjectRecord>& records, const NfbParameters& params,
                       const DependencySet& rules, const FactorSchema& schema,
                       const ModelRegistry& registry = ModelRegistry::builtin()) {
  params.validate(schema);
  return detail::LossEvaluator(records, rules, schema, registry).evaluate(params, nullptr);
}

/// Subgradient of the weighted MMRE with respect to every FMP entry; records
/// estimated exactly contribute zero.
inline NfbParameters loss_gradient(const std::vector<ProjectRecord>& records,
                                   const NfbParameters& params, const DependencySet& rules,
                                   const FactorSchema& schema,
                                   const ModelRegistry& registry = ModelRegistry::builtin()) {
  params.validate(schema);
  NfbParameters grad;
  detail::LossEvaluator(records, rules, schema, registry).evaluate(params, &grad);
  return grad;
}

inline TrainingReport train(const std::vector<ProjectRecord>& records,
                            const NfbParameters& initial_params, const TrainingConfig& config,
                            const DependencySet& rules, const FactorSchema& schema,
                            const ModelRegistry& registry = ModelRegistry::builtin()) {
  config.validate();
  if (initial_params.fmp.size() != schema.size())
    throw Error(ErrorKind::schema, "shape mismatch: initial parameters do not match schema",
                "training");
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (initial_params.fmp[i].size() != schema.factors[i].level_count())
      throw Error(ErrorKind::schema, "shape mismatch at factor " + schema.factors[i].id,
                  "training");

  const detail::LossEvaluator evaluator(records, rules, schema, registry);

  TrainingReport report;
  NfbParameters params = project_parameters(initial_params, schema, config.min_fmp);
  NfbParameters grad;
  double loss = evaluator.evaluate(params, &grad, 0);
  report.initial_loss = loss;

  NfbParameters best = params;
  double best_loss = loss;
  report.loss_history.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = 0; i < params.fmp.size(); ++i)
      for (std::size_t k = 0; k < params.fmp[i].size(); ++k)
        params.fmp[i][k] -= config.learning_rate * grad.fmp[i][k];
    params = project_parameters(params, schema, config.min_fmp);

    loss = evaluator.evaluate(params, &grad, epoch);
    report.loss_history.push_back(loss);
    if (config.on_epoch) config.on_epoch(EpochInfo{epoch, loss, params});

    if (loss < best_loss) {
      best_loss = loss;
      best = params;
      report.best_epoch = epoch;
    }
  }

  if (config.keep_best) {
    report.final_params = std::move(best);
    report.final_loss = best_loss;
  } else {
    report.final_params = std::move(params);
    report.final_loss = loss;
  }
  return report;
}

}  // namespace nfa
