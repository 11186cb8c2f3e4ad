#pragma once

// On-disk formats: project datasets (CSV) and parameter documents (JSON).
//
// Dataset CSV: comma separated, header row required, no quoting. Columns
// are id, size, model_id, actual_effort, one column per factor id, and an
// optional weight column, in any order. A factor cell holds either a level
// label or a decimal rating in [0, K-1].
//
// Parameter document (*.nfa.json): top-level keys format_version, schema,
// fmp, rules, coefficients, provenance. Loading validates every invariant.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "nfa/error.hpp"
#include "nfa/models.hpp"
#include "nfa/pipeline.hpp"
#include "nfa/pnfis.hpp"
#include "nfa/schema.hpp"

namespace nfa {

inline constexpr int kFormatVersion = 1;

struct ParameterDocument {
  FactorSchema schema;
  NfbParameters params;
  DependencySet rules;
  ModelCoefficients coefficients;  // for schema.model_binding
  std::string provenance;

  friend bool operator==(const ParameterDocument&, const ParameterDocument&) = default;

  /// Registry defaults with the document's coefficients bound to its model.
  CoefficientTable coefficient_table(const ModelRegistry& registry = ModelRegistry::builtin()) const {
    auto table = CoefficientTable::defaults(registry);
    table.set(schema.model_binding, coefficients);
    return table;
  }
};

/// The fifteen-factor COCOMO-81 document for one development mode with
/// literature multipliers and an empty rule set.
inline ParameterDocument default_document(std::string_view model_id = kCocomoOrganic) {
  const auto& model = ModelRegistry::builtin().get(model_id);
  auto coeffs = model.default_coefficients();
  if (!coeffs)
    throw Error(ErrorKind::domain,
                "model '" + std::string(model_id) + "' has no default coefficients");
  ParameterDocument doc;
  doc.schema = cocomo81_schema(std::string(model_id));
  doc.params = NfbParameters::initial(doc.schema);
  doc.coefficients = *coeffs;
  doc.provenance = "defaults: COCOMO-81 intermediate effort multipliers";
  return doc;
}

// ---------------------------------------------------------------------------
// Numbers

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Dataset CSV

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  for (auto& cell : out) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
      cell.remove_suffix(1);
  }
  return out;
}

inline Error csv_error(std::size_t line, std::string_view column, const std::string& what) {
  std::string msg = "line " + std::to_string(line);
  if (!column.empty()) msg += ", column '" + std::string(column) + "'";
  return Error(ErrorKind::parse, msg + ": " + what, "data");
}

}  // namespace detail

inline std::vector<ProjectRecord> parse_dataset_csv(
    std::string_view text, const FactorSchema& schema,
    const CoefficientTable& coefficients = CoefficientTable::defaults(),
    const ModelRegistry& registry = ModelRegistry::builtin()) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start <= text.size();) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    lines.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  // Skip leading blank lines and a UTF-8 byte-order mark.
  std::size_t header_line = 0;
  while (header_line < lines.size() && detail::split_commas(lines[header_line]).size() == 1 &&
         detail::split_commas(lines[header_line])[0].empty())
    ++header_line;
  if (header_line == lines.size()) throw detail::csv_error(1, "", "missing header row");
  std::string_view header_text = lines[header_line];
  if (header_text.substr(0, 3) == "\xEF\xBB\xBF") header_text.remove_prefix(3);
  const auto header = detail::split_commas(header_text);

  // Column roles.
  enum class Role { id, size, model_id, actual_effort, weight, factor };
  struct Column {
    Role role;
    std::size_t factor = 0;
    std::string name;
  };
  std::vector<Column> columns;
  std::set<std::string> seen;
  for (auto h : header) {
    const std::string name(h);
    if (!seen.insert(name).second)
      throw detail::csv_error(header_line + 1, name, "duplicate column");
    if (name == "id") columns.push_back({Role::id, 0, name});
    else if (name == "size") columns.push_back({Role::size, 0, name});
    else if (name == "model_id") columns.push_back({Role::model_id, 0, name});
    else if (name == "actual_effort") columns.push_back({Role::actual_effort, 0, name});
    else if (name == "weight") columns.push_back({Role::weight, 0, name});
    else if (auto i = schema.index_of(name)) columns.push_back({Role::factor, *i, name});
    else throw detail::csv_error(header_line + 1, name, "unknown column");
  }
  for (const char* required : {"id", "size", "model_id", "actual_effort"})
    if (!seen.count(required))
      throw detail::csv_error(header_line + 1, required, "missing required column");
  for (const auto& f : schema.factors)
    if (!seen.count(f.id)) throw detail::csv_error(header_line + 1, f.id, "missing factor column");

  std::vector<ProjectRecord> records;
  for (std::size_t ln = header_line + 1; ln < lines.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    const auto cells = detail::split_commas(lines[ln]);
    if (cells.size() == 1 && cells[0].empty()) continue;
    if (cells.size() != columns.size())
      throw detail::csv_error(line_no, "", "expected " + std::to_string(columns.size()) +
                                               " fields, found " + std::to_string(cells.size()));
    ProjectRecord rec;
    rec.ratings.values.assign(schema.size(), 0.0);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& col = columns[c];
      const auto cell = cells[c];
      auto number = [&](std::string_view what) {
        auto v = parse_double(cell);
        if (!v)
          throw detail::csv_error(line_no, col.name,
                                  "cannot parse " + std::string(what) + " '" + std::string(cell) + "'");
        return *v;
      };
      switch (col.role) {
        case Role::id:
          if (!is_valid_identifier(cell))
            throw detail::csv_error(line_no, col.name, "id must match [A-Za-z0-9_]+");
          rec.id = std::string(cell);
          break;
        case Role::size:
          rec.inputs.size = number("size");
          if (!(rec.inputs.size > 0.0)) throw detail::csv_error(line_no, col.name, "size must be positive");
          break;
        case Role::model_id:
          rec.inputs.model_id = std::string(cell);
          if (!registry.contains(cell))
            throw detail::csv_error(line_no, col.name, "unknown model_id '" + std::string(cell) + "'");
          if (!coefficients.contains(cell))
            throw detail::csv_error(line_no, col.name,
                                    "no coefficients configured for model_id '" + std::string(cell) + "'");
          rec.inputs.coefficients = coefficients.at(cell);
          break;
        case Role::actual_effort:
          rec.actual_effort = number("effort");
          if (!(rec.actual_effort > 0.0))
            throw detail::csv_error(line_no, col.name, "actual_effort must be positive");
          break;
        case Role::weight:
          rec.weight = cell.empty() ? 1.0 : number("weight");
          if (!(rec.weight >= 0.0)) throw detail::csv_error(line_no, col.name, "weight must be non-negative");
          break;
        case Role::factor: {
          const auto& f = schema.factors[col.factor];
          double rating;
          if (auto k = f.level_index(cell)) {
            rating = static_cast<double>(*k);
          } else if (auto v = parse_double(cell)) {
            rating = *v;
          } else {
            throw detail::csv_error(line_no, col.name,
                                    "unknown level label or number '" + std::string(cell) + "'");
          }
          if (!(rating >= 0.0 && rating <= f.max_rating()))
            throw detail::csv_error(line_no, col.name,
                                    "rating out of range [0," + std::to_string(f.level_count() - 1) + "]");
          rec.ratings.values[col.factor] = rating;
          break;
        }
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::string dataset_csv_header(const FactorSchema& schema) {
  std::string out = "id,size,model_id";
  for (const auto& f : schema.factors) out += "," + f.id;
  return out + ",actual_effort,weight\n";
}

/// Integer ratings are written as level labels, others as decimals.
inline std::string dataset_csv_row(const ProjectRecord& r, const FactorSchema& schema) {
  std::string out = r.id + "," + format_double(r.inputs.size) + "," + r.inputs.model_id;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const double v = r.ratings.values[i];
    const auto k = static_cast<std::size_t>(v);
    if (static_cast<double>(k) == v && k < schema.factors[i].level_count())
      out += "," + schema.factors[i].level_labels[k];
    else
      out += "," + format_double(v);
  }
  return out + "," + format_double(r.actual_effort) + "," + format_double(r.weight) + "\n";
}

inline std::string format_dataset_csv(const std::vector<ProjectRecord>& records,
                                      const FactorSchema& schema) {
  std::string out = dataset_csv_header(schema);
  for (const auto& r : records) out += dataset_csv_row(r, schema);
  return out;
}

// ---------------------------------------------------------------------------
// Parameter document

namespace detail {

using nlohmann::json;

inline Error load_error(const std::string& path, const std::string& what) {
  return Error(ErrorKind::load, path + ": " + what, "data");
}

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw load_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw load_error(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

inline std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw load_error(path, "expected a string");
  return j.get<std::string>();
}

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw load_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw load_error(path, "expected a finite number");
  return v;
}

inline std::vector<double> get_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw load_error(path, "expected an array");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k)
    out.push_back(get_number(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

inline FactorSchema schema_from_json(const json& j) {
  FactorSchema schema;
  schema.model_binding = get_string(field(j, "model_binding", "schema"), "schema.model_binding");
  if (!is_valid_identifier(schema.model_binding))
    throw load_error("schema.model_binding", "must match [A-Za-z0-9_]+");
  const auto& factors = field(j, "factors", "schema");
  if (!factors.is_array()) throw load_error("schema.factors", "expected an array");
  if (factors.empty()) throw load_error("schema.factors", "schema declares no factors");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const std::string path = "schema.factors[" + std::to_string(i) + "]";
    const auto& fj = factors[i];
    FactorDefinition f;
    f.id = get_string(field(fj, "id", path), path + ".id");
    f.name = get_string(field(fj, "name", path), path + ".name");
    const auto& labels = field(fj, "level_labels", path);
    if (!labels.is_array()) throw load_error(path + ".level_labels", "expected an array");
    for (std::size_t k = 0; k < labels.size(); ++k)
      f.level_labels.push_back(
          get_string(labels[k], path + ".level_labels[" + std::to_string(k) + "]"));
    const auto dir = get_string(field(fj, "direction", path), path + ".direction");
    auto parsed = parse_direction(dir);
    if (!parsed) throw load_error(path + ".direction", "unknown direction '" + dir + "'");
    f.direction = *parsed;
    f.initial_fmp = get_numbers(field(fj, "initial_fmp", path), path + ".initial_fmp");
    if (auto msg = f.check(); !msg.empty()) throw load_error(path, msg);
    if (!ids.insert(f.id).second) throw load_error(path + ".id", "duplicate factor id '" + f.id + "'");
    schema.factors.push_back(std::move(f));
  }
  return schema;
}

inline json schema_to_json(const FactorSchema& schema) {
  json factors = json::array();
  for (const auto& f : schema.factors)
    factors.push_back({{"id", f.id},
                       {"name", f.name},
                       {"level_labels", f.level_labels},
                       {"direction", std::string(to_string(f.direction))},
                       {"initial_fmp", f.initial_fmp}});
  return {{"model_binding", schema.model_binding}, {"factors", std::move(factors)}};
}

}  // namespace detail

inline nlohmann::json rules_to_json(const DependencySet& rules) {
  using nlohmann::json;
  json out = json::array();
  for (const auto& r : rules.rules) {
    json ants = json::array();
    for (const auto& a : r.antecedents) ants.push_back({{"factor", a.factor}, {"level", a.level}});
    out.push_back({{"antecedents", std::move(ants)},
                   {"target", r.target},
                   {"delta", r.delta},
                   {"note", r.note}});
  }
  return out;
}

/// Structural parse only; semantic checks belong to validate_rules.
inline DependencySet rules_from_json(const nlohmann::json& j, const std::string& path = "rules") {
  using detail::field;
  using detail::load_error;
  if (!j.is_array()) throw load_error(path, "expected an array");
  DependencySet set;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    DependencyRule rule;
    const auto& ants = field(j[r], "antecedents", rp);
    if (!ants.is_array()) throw load_error(rp + ".antecedents", "expected an array");
    for (std::size_t a = 0; a < ants.size(); ++a) {
      const std::string ap = rp + ".antecedents[" + std::to_string(a) + "]";
      Antecedent ant;
      ant.factor = detail::get_string(field(ants[a], "factor", ap), ap + ".factor");
      const auto& level = field(ants[a], "level", ap);
      if (!level.is_number_integer() || level.get<long long>() < 0)
        throw load_error(ap + ".level", "expected a non-negative integer");
      ant.level = level.get<std::size_t>();
      rule.antecedents.push_back(std::move(ant));
    }
    rule.target = detail::get_string(field(j[r], "target", rp), rp + ".target");
    rule.delta = detail::get_number(field(j[r], "delta", rp), rp + ".delta");
    if (auto it = j[r].find("note"); it != j[r].end())
      rule.note = detail::get_string(*it, rp + ".note");
    set.rules.push_back(std::move(rule));
  }
  return set;
}

inline std::string save_parameter_document(const ParameterDocument& doc) {
  using nlohmann::json;
  json fmp = json::object();
  for (std::size_t i = 0; i < doc.schema.size(); ++i) fmp[doc.schema.factors[i].id] = doc.params.fmp[i];
  const json j = {{"format_version", kFormatVersion},
                  {"schema", detail::schema_to_json(doc.schema)},
                  {"fmp", std::move(fmp)},
                  {"rules", rules_to_json(doc.rules)},
                  {"coefficients", {{"a", doc.coefficients.a}, {"b", doc.coefficients.b}}},
                  {"provenance", doc.provenance}};
  return j.dump(2) + "\n";
}

inline ParameterDocument load_parameter_document(std::string_view text) {
  using nlohmann::json;
  using detail::field;
  using detail::load_error;

  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw load_error("document", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw load_error("document", "expected a JSON object");

  const auto& version = field(j, "format_version", "");
  if (!version.is_number_integer() || version.get<long long>() != kFormatVersion)
    throw load_error("format_version", "unsupported format version (expected " +
                                           std::to_string(kFormatVersion) + ")");

  ParameterDocument doc;
  doc.schema = detail::schema_from_json(field(j, "schema", ""));

  const auto& fmp = field(j, "fmp", "");
  if (!fmp.is_object()) throw load_error("fmp", "expected an object keyed by factor id");
  for (const auto& [key, row] : fmp.items())
    if (!doc.schema.index_of(key)) throw load_error("fmp." + key, "shape mismatch: unknown factor");
  for (const auto& f : doc.schema.factors) {
    const std::string path = "fmp." + f.id;
    auto it = fmp.find(f.id);
    if (it == fmp.end()) throw load_error(path, "shape mismatch: missing fmp row");
    auto values = detail::get_numbers(*it, path);
    if (values.size() != f.level_count())
      throw load_error(path, "shape mismatch: " + std::to_string(values.size()) + " values for " +
                                 std::to_string(f.level_count()) + " levels");
    for (std::size_t k = 0; k < values.size(); ++k)
      if (!(values[k] > 0.0))
        throw load_error(path + "[" + std::to_string(k) + "]", "fmp values must be positive");
    if (!is_monotone(values, f.direction))
      throw load_error(path, "monotonicity violated at factor " + f.id);
    doc.params.fmp.push_back(std::move(values));
  }

  doc.rules = rules_from_json(field(j, "rules", ""));
  if (auto report = validate_rules(doc.rules, doc.schema); !report.empty())
    throw load_error("rules[" + std::to_string(report.front().rule_index) + "]",
                     report.front().reason);

  const auto& coeffs = field(j, "coefficients", "");
  doc.coefficients.a = detail::get_number(field(coeffs, "a", "coefficients"), "coefficients.a");
  doc.coefficients.b = detail::get_number(field(coeffs, "b", "coefficients"), "coefficients.b");
  if (!(doc.coefficients.a > 0.0)) throw load_error("coefficients.a", "must be positive");
  if (!(doc.coefficients.b > 0.0)) throw load_error("coefficients.b", "must be positive");

  doc.provenance = detail::get_string(field(j, "provenance", ""), "provenance");
  return doc;
}

}  // namespace nfa
