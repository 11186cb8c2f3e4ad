#pragma once

// RF -> PNFIS -> ARF -> NFB -> FM -> algorithmic model -> effort.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "nfa/error.hpp"
#include "nfa/models.hpp"
#include "nfa/nfb.hpp"
#include "nfa/pnfis.hpp"
#include "nfa/schema.hpp"

namespace nfa {

struct ProjectRecord {
  std::string id;
  ModelInputs inputs;
  RatingVector ratings;  // raw RF
  double actual_effort = 1.0;
  double weight = 1.0;

  friend bool operator==(const ProjectRecord&, const ProjectRecord&) = default;
};

struct EstimationResult {
  double effort = 0.0;               // person-months
  std::vector<double> multipliers;   // FM_i, schema order
  double product_em = 1.0;
  NfbTrace trace;
  RatingVector arf;

  friend bool operator==(const EstimationResult&, const EstimationResult&) = default;
};

inline EstimationResult full_pipeline_estimate(
    const RatingVector& rf, const ModelInputs& inputs, const DependencySet& rules,
    const NfbParameters& params, const FactorSchema& schema,
    const ModelRegistry& registry = ModelRegistry::builtin()) {
  try {
    params.validate(schema);
  } catch (const Error& e) {
    throw e.tagged("nfb");
  }

  EstimationResult result;
  result.arf = pnfis_adjust(rf, rules, schema);

  auto nfb = nfb_forward_all(result.arf, params, schema);
  result.multipliers = std::move(nfb.multipliers);
  result.trace = std::move(nfb.trace);
  for (double fm : result.multipliers) result.product_em *= fm;

  result.effort = estimate_effort(inputs, result.multipliers, registry);
  if (!std::isfinite(result.effort))
    throw Error(ErrorKind::numeric, "effort is not finite", "model");
  return result;
}

/// Weighted least squares of ln(effort) = ln(a) + b ln(size).
inline ModelCoefficients fit_baseline_coefficients(const std::vector<ProjectRecord>& records) {
  double sw = 0, sx = 0, sy = 0;
  for (const auto& r : records) {
    if (!(r.inputs.size > 0.0) || !(r.actual_effort > 0.0))
      throw Error(ErrorKind::domain, "record '" + r.id + "' needs positive size and effort");
    if (!(r.weight >= 0.0)) throw Error(ErrorKind::domain, "record '" + r.id + "' has negative weight");
    sw += r.weight;
    sx += r.weight * std::log(r.inputs.size);
    sy += r.weight * std::log(r.actual_effort);
  }
  if (!(sw > 0.0))
    throw Error(ErrorKind::degenerate, "baseline fit needs at least 2 weighted records");
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (const auto& r : records) {
    const double dx = std::log(r.inputs.size) - mx;
    sxx += r.weight * dx * dx;
    sxy += r.weight * dx * (std::log(r.actual_effort) - my);
  }
  // Relative threshold: identical sizes give sxx of pure rounding noise.
  if (!(sxx > 1e-12 * sw))
    throw Error(ErrorKind::degenerate, "baseline fit needs at least 2 distinct sizes");
  const double b = sxy / sxx;
  const ModelCoefficients c{std::exp(my - b * mx), b};
  if (!(c.b > 0.0))
    throw Error(ErrorKind::degenerate,
                "fitted size exponent is not positive (" + std::to_string(c.b) + ")");
  return c;
}

}  // namespace nfa
