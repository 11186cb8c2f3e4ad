#include "wire.hpp"

#include <cmath>
#include <string>

namespace nfa::app {

namespace {

Error request_error(const std::string& path, const std::string& what) {
  return Error(ErrorKind::parse, path + ": " + what, "request");
}

const json* optional_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) throw request_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw request_error(path, "expected a finite number");
  return v;
}

RatingVector parse_ratings(const json& j, const FactorSchema& schema) {
  if (!j.is_object()) throw request_error("ratings", "expected an object keyed by factor id");
  std::string unknown;
  for (const auto& [key, value] : j.items())
    if (!schema.index_of(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty())
    throw Error(ErrorKind::schema, "ratings: unknown factor ids not in schema: " + unknown,
                "request");

  RatingVector rv;
  std::string missing;
  for (const auto& f : schema.factors) {
    const std::string path = "ratings." + f.id;
    auto it = j.find(f.id);
    if (it == j.end()) {
      missing += (missing.empty() ? "" : ", ") + f.id;
      continue;
    }
    double rating;
    if (it->is_string()) {
      auto k = f.level_index(it->get<std::string>());
      if (!k) throw request_error(path, "unknown level label '" + it->get<std::string>() + "'");
      rating = static_cast<double>(*k);
    } else {
      rating = number_at(*it, path);
    }
    if (!(rating >= 0.0 && rating <= f.max_rating()))
      throw request_error(path, "rating out of range [0," + std::to_string(f.level_count() - 1) + "]");
    rv.values.push_back(rating);
  }
  if (!missing.empty())
    throw Error(ErrorKind::schema, "ratings: factor ids missing from request (schema requires them): " + missing,
                "request");
  return rv;
}

ModelInputs parse_inputs(const json& body, const ParameterDocument& doc) {
  ModelInputs inputs;
  auto size = optional_field(body, "size");
  if (!size) throw request_error("size", "missing field");
  inputs.size = number_at(*size, "size");
  if (!(inputs.size > 0.0)) throw request_error("size", "must be positive");

  inputs.model_id = doc.schema.model_binding;
  if (auto m = optional_field(body, "model_id")) {
    if (!m->is_string()) throw request_error("model_id", "expected a string");
    inputs.model_id = m->get<std::string>();
  }
  if (!ModelRegistry::builtin().contains(inputs.model_id))
    throw request_error("model_id", "unknown model_id '" + inputs.model_id + "'");
  const auto table = doc.coefficient_table();
  if (!table.contains(inputs.model_id))
    throw request_error("model_id", "no coefficients configured for '" + inputs.model_id + "'");
  inputs.coefficients = table.at(inputs.model_id);
  return inputs;
}

void require_object(const json& body) {
  if (!body.is_object()) throw request_error("body", "expected a JSON object");
}

}  // namespace

EstimateRequest parse_estimate_request(const json& body, const ParameterDocument& doc) {
  require_object(body);
  auto ratings = optional_field(body, "ratings");
  if (!ratings) throw request_error("ratings", "missing field");
  EstimateRequest req;
  req.ratings = parse_ratings(*ratings, doc.schema);
  req.inputs = parse_inputs(body, doc);
  return req;
}

Sweep parse_sweep(const json& body, const ParameterDocument& doc) {
  require_object(body);
  auto s = optional_field(body, "sweep");
  if (!s) throw request_error("sweep", "missing field");
  if (!s->is_object()) throw request_error("sweep", "expected an object");
  Sweep sweep;
  auto id = optional_field(*s, "factor_id");
  if (!id || !id->is_string()) throw request_error("sweep.factor_id", "expected a string");
  sweep.factor_id = id->get<std::string>();
  auto idx = doc.schema.index_of(sweep.factor_id);
  if (!idx) throw request_error("sweep.factor_id", "unknown factor id '" + sweep.factor_id + "'");
  const double top = doc.schema.factors[*idx].max_rating();

  auto from = optional_field(*s, "from");
  auto to = optional_field(*s, "to");
  sweep.from = from ? number_at(*from, "sweep.from") : 0.0;
  sweep.to = to ? number_at(*to, "sweep.to") : top;
  if (!(sweep.from >= 0.0 && sweep.from <= top)) throw request_error("sweep.from", "outside rating range");
  if (!(sweep.to >= 0.0 && sweep.to <= top)) throw request_error("sweep.to", "outside rating range");
  if (auto steps = optional_field(*s, "steps")) {
    if (!steps->is_number_integer()) throw request_error("sweep.steps", "expected an integer");
    const auto n = steps->get<long long>();
    if (n < 1 || n > 10000) throw request_error("sweep.steps", "must lie in [1, 10000]");
    sweep.steps = static_cast<int>(n);
  } else {
    sweep.steps = 20;
  }
  return sweep;
}

std::vector<double> sweep_points(const Sweep& sweep) {
  if (sweep.from == sweep.to) return {sweep.from};
  std::vector<double> out;
  for (int i = 0; i <= sweep.steps; ++i) {
    if (i == sweep.steps) {
      out.push_back(sweep.to);
    } else {
      out.push_back(sweep.from + (sweep.to - sweep.from) * i / sweep.steps);
    }
  }
  return out;
}

ProjectRecord parse_project_record(const json& body, const ParameterDocument& doc) {
  const auto req = parse_estimate_request(body, doc);
  ProjectRecord r;
  auto id = optional_field(body, "id");
  if (!id || !id->is_string()) throw request_error("id", "expected a string");
  r.id = id->get<std::string>();
  if (!is_valid_identifier(r.id)) throw request_error("id", "must match [A-Za-z0-9_]+");
  r.inputs = req.inputs;
  r.ratings = req.ratings;
  auto actual = optional_field(body, "actual_effort");
  if (!actual) throw request_error("actual_effort", "missing field");
  r.actual_effort = number_at(*actual, "actual_effort");
  if (!(r.actual_effort > 0.0)) throw request_error("actual_effort", "must be positive");
  if (auto w = optional_field(body, "weight")) {
    r.weight = number_at(*w, "weight");
    if (!(r.weight >= 0.0)) throw request_error("weight", "must be non-negative");
  }
  return r;
}

TrainingConfig parse_training_config(const json& body) {
  TrainingConfig cfg;
  if (body.is_null()) return cfg;
  require_object(body);
  if (auto v = optional_field(body, "learning_rate")) cfg.learning_rate = number_at(*v, "learning_rate");
  if (auto v = optional_field(body, "epochs")) {
    if (!v->is_number_integer()) throw request_error("epochs", "expected an integer");
    const auto n = v->get<long long>();
    if (n < 1 || n > 1000000) throw request_error("epochs", "must lie in [1, 1000000]");
    cfg.epochs = static_cast<int>(n);
  }
  if (auto v = optional_field(body, "min_fmp")) cfg.min_fmp = number_at(*v, "min_fmp");
  if (auto v = optional_field(body, "keep_best")) {
    if (!v->is_boolean()) throw request_error("keep_best", "expected a boolean");
    cfg.keep_best = v->get<bool>();
  }
  if (auto v = optional_field(body, "seed")) {
    if (!v->is_number_integer()) throw request_error("seed", "expected an integer");
    cfg.seed = v->get<std::uint64_t>();
  }
  if (!(cfg.learning_rate >= 0.0)) throw request_error("learning_rate", "must be non-negative");
  if (!(cfg.min_fmp > 0.0)) throw request_error("min_fmp", "must be positive");
  return cfg;
}

json estimation_to_json(const EstimationResult& result, const EstimateRequest& request,
                        const FactorSchema& schema) {
  json multipliers = json::object(), arf = json::object(), rf = json::object(),
       trace = json::object();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& id = schema.factors[i].id;
    multipliers[id] = result.multipliers[i];
    arf[id] = result.arf.values[i];
    rf[id] = request.ratings.values[i];
    const auto& row = result.trace.rows[i];
    trace[id] = {{"w", row.w}, {"w_bar", row.w_bar}, {"fm", row.fm}};
  }
  return {{"effort_pm", result.effort},
          {"product_em", result.product_em},
          {"model_id", request.inputs.model_id},
          {"size", request.inputs.size},
          {"multipliers", std::move(multipliers)},
          {"arf", std::move(arf)},
          {"rf", std::move(rf)},
          {"trace", std::move(trace)}};
}

json schema_to_json(const ParameterDocument& doc) {
  json factors = json::array();
  for (std::size_t i = 0; i < doc.schema.size(); ++i) {
    const auto& f = doc.schema.factors[i];
    factors.push_back({{"id", f.id},
                       {"name", f.name},
                       {"level_labels", f.level_labels},
                       {"direction", std::string(to_string(f.direction))},
                       {"fmp", doc.params.fmp[i]}});
  }
  return {{"model_binding", doc.schema.model_binding},
          {"factor_count", doc.schema.size()},
          {"factors", std::move(factors)},
          {"rules", rules_to_json(doc.rules)},
          {"coefficients", {{"a", doc.coefficients.a}, {"b", doc.coefficients.b}}},
          {"models", ModelRegistry::builtin().ids()},
          {"provenance", doc.provenance}};
}

json training_summary_to_json(const TrainingReport& report, std::size_t records) {
  return {{"records", records},
          {"epochs", report.loss_history.size()},
          {"initial_loss", report.initial_loss},
          {"final_loss", report.final_loss},
          {"best_epoch", report.best_epoch}};
}

json rule_violations_to_json(const ValidationReport& report) {
  json out = json::array();
  for (const auto& v : report) out.push_back({{"rule_index", v.rule_index}, {"reason", v.reason}});
  return out;
}

EstimationResult run_estimate(const EstimateRequest& request, const ParameterDocument& doc) {
  return full_pipeline_estimate(request.ratings, request.inputs, doc.rules, doc.params, doc.schema);
}

}  // namespace nfa::app
