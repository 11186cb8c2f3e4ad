#pragma once

// Seeded synthetic project histories with a known ground truth.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nfa/models.hpp"
#include "nfa/pipeline.hpp"
#include "nfa/pnfis.hpp"
#include "nfa/schema.hpp"
#include "nfa/training.hpp"

namespace nfa {

struct SyntheticOptions {
  std::size_t projects = 60;
  std::uint64_t seed = 42;
  double perturb_low = 0.8;   // each true FMP = initial * U[low, high]
  double perturb_high = 1.25;
  double size_low = 5.0;      // sizes are log-uniform over [size_low, size_high]
  double size_high = 500.0;
  std::string model_id;       // empty: the schema's model binding
};

struct SyntheticDataset {
  NfbParameters truth;
  std::vector<ProjectRecord> records;
};

/// Perturbs `base` entrywise, re-projects onto the monotone constraints, and
/// labels random projects with the exact pipeline output under the truth.
inline SyntheticDataset generate_synthetic_dataset(const FactorSchema& schema,
                                                   const NfbParameters& base,
                                                   const ModelCoefficients& coefficients,
                                                   const SyntheticOptions& opt = {},
                                                   const DependencySet& rules = {}) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> perturb(opt.perturb_low, opt.perturb_high);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticDataset out;
  out.truth = base;
  for (auto& row : out.truth.fmp)
    for (double& v : row) v *= perturb(rng);
  out.truth = project_parameters(out.truth, schema, 1e-3);

  const std::string model_id = opt.model_id.empty() ? schema.model_binding : opt.model_id;
  const double log_lo = std::log(opt.size_low), log_hi = std::log(opt.size_high);
  for (std::size_t j = 0; j < opt.projects; ++j) {
    ProjectRecord r;
    r.id = "p" + std::to_string(j + 1);
    r.inputs = {std::exp(log_lo + (log_hi - log_lo) * unit(rng)), model_id, coefficients};
    for (const auto& f : schema.factors) r.ratings.values.push_back(f.max_rating() * unit(rng));
    r.actual_effort =
        full_pipeline_estimate(r.ratings, r.inputs, rules, out.truth, schema).effort;
    out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace nfa
