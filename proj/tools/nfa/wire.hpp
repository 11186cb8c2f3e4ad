#pragma once

// JSON request/response bodies shared by the CLI and the HTTP service.

#include <string>

#include "json.hpp"
#include "nfa/nfa.hpp"

namespace nfa::app {

using nlohmann::json;

/// Ratings (numbers or level labels), size and model id for one estimate.
struct EstimateRequest {
  RatingVector ratings;
  ModelInputs inputs;
};

/// Parses and validates a request body against a parameter document. Errors
/// carry a field path (e.g. "ratings.cplx") in their message.
EstimateRequest parse_estimate_request(const json& body, const ParameterDocument& doc);

struct Sweep {
  std::string factor_id;
  double from = 0.0;
  double to = 0.0;
  int steps = 1;
};

Sweep parse_sweep(const json& body, const ParameterDocument& doc);

/// Ratings at every sweep point: one point when from == to, otherwise
/// steps + 1 evenly spaced points.
std::vector<double> sweep_points(const Sweep& sweep);

ProjectRecord parse_project_record(const json& body, const ParameterDocument& doc);

TrainingConfig parse_training_config(const json& body);

json estimation_to_json(const EstimationResult& result, const EstimateRequest& request,
                        const FactorSchema& schema);

json schema_to_json(const ParameterDocument& doc);

json training_summary_to_json(const TrainingReport& report, std::size_t records);

json rule_violations_to_json(const ValidationReport& report);

/// Estimate through the full pipeline using the document's parameters.
EstimationResult run_estimate(const EstimateRequest& request, const ParameterDocument& doc);

}  // namespace nfa::app
