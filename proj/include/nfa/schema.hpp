#pragma once

// Factor schema, rating vectors and the trainable FMP matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nfa/error.hpp"

namespace nfa {

/// Required ordering of a factor's FMP values across its rating levels.
enum class Direction { increasing, decreasing, none };

inline std::string_view to_string(Direction d) noexcept {
  switch (d) {
    case Direction::increasing: return "increasing";
    case Direction::decreasing: return "decreasing";
    case Direction::none: return "none";
  }
  return "none";
}

inline std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "increasing") return Direction::increasing;
  if (s == "decreasing") return Direction::decreasing;
  if (s == "none") return Direction::none;
  return std::nullopt;
}

/// Identifiers are restricted to [A-Za-z0-9_]+ so they survive unquoted CSV.
inline bool is_valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_';
  });
}

/// True when `values` is ordered per `direction` (non-strict).
inline bool is_monotone(const std::vector<double>& values, Direction direction) {
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (direction == Direction::increasing && values[k] < values[k - 1]) return false;
    if (direction == Direction::decreasing && values[k] > values[k - 1]) return false;
  }
  return true;
}

struct FactorDefinition {
  std::string id;
  std::string name;
  std::vector<std::string> level_labels;
  Direction direction = Direction::none;
  std::vector<double> initial_fmp;

  std::size_t level_count() const noexcept { return level_labels.size(); }
  double max_rating() const noexcept {
    return static_cast<double>(level_labels.size()) - 1.0;
  }

  std::optional<std::size_t> level_index(std::string_view label) const {
    for (std::size_t k = 0; k < level_labels.size(); ++k)
      if (level_labels[k] == label) return k;
    return std::nullopt;
  }

  /// Empty string when valid, otherwise the first violated invariant.
  std::string check() const {
    if (!is_valid_identifier(id)) return "factor id '" + id + "' is not a valid identifier";
    if (level_labels.size() < 2) return "factor " + id + " needs at least 2 rating levels";
    std::set<std::string> seen(level_labels.begin(), level_labels.end());
    if (seen.size() != level_labels.size()) return "factor " + id + " has duplicate level labels";
    if (initial_fmp.size() != level_labels.size())
      return "factor " + id + " initial_fmp length does not match level count";
    for (double v : initial_fmp)
      if (!(v > 0.0) || !std::isfinite(v)) return "factor " + id + " initial_fmp must be positive";
    if (!is_monotone(initial_fmp, direction))
      return "monotonicity violated at factor " + id + " (initial_fmp)";
    return {};
  }

  friend bool operator==(const FactorDefinition&, const FactorDefinition&) = default;
};

struct FactorSchema {
  std::vector<FactorDefinition> factors;
  std::string model_binding;

  std::size_t size() const noexcept { return factors.size(); }

  std::optional<std::size_t> index_of(std::string_view id) const {
    for (std::size_t i = 0; i < factors.size(); ++i)
      if (factors[i].id == id) return i;
    return std::nullopt;
  }

  const FactorDefinition& factor(std::string_view id) const {
    auto i = index_of(id);
    if (!i) throw Error(ErrorKind::schema, "unknown factor id '" + std::string(id) + "'");
    return factors[*i];
  }

  void validate() const {
    if (factors.empty()) throw Error(ErrorKind::schema, "schema declares no factors");
    std::set<std::string> ids;
    for (const auto& f : factors) {
      if (auto msg = f.check(); !msg.empty()) throw Error(ErrorKind::schema, msg);
      if (!ids.insert(f.id).second)
        throw Error(ErrorKind::schema, "duplicate factor id '" + f.id + "'");
    }
  }

  friend bool operator==(const FactorSchema&, const FactorSchema&) = default;
};

/// Ratings on the continuous [0, K-1] level axis, stored in schema order.
/// Used both for raw ratings (RF) and PNFIS-adjusted ratings (ARF).
struct RatingVector {
  std::vector<double> values;

  /// Builds a vector from a keyed map; missing or extra ids are a schema
  /// error listing every offending id.
  static RatingVector from_map(const FactorSchema& schema,
                               const std::map<std::string, double>& ratings) {
    std::string missing, extra;
    RatingVector rv;
    rv.values.reserve(schema.size());
    for (const auto& f : schema.factors) {
      auto it = ratings.find(f.id);
      if (it == ratings.end()) {
        missing += (missing.empty() ? "" : ", ") + f.id;
        continue;
      }
      rv.values.push_back(it->second);
    }
    for (const auto& [id, v] : ratings)
      if (!schema.index_of(id)) extra += (extra.empty() ? "" : ", ") + id;
    if (!missing.empty() || !extra.empty()) {
      std::string msg = "rating/schema mismatch;";
      if (!missing.empty()) msg += " missing factor ids: " + missing + ";";
      if (!extra.empty()) msg += " unknown factor ids: " + extra + ";";
      throw Error(ErrorKind::schema, msg);
    }
    rv.validate(schema);
    return rv;
  }

  std::map<std::string, double> to_map(const FactorSchema& schema) const {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < schema.size() && i < values.size(); ++i)
      out[schema.factors[i].id] = values[i];
    return out;
  }

  /// Every factor at the given level index (clamped to the factor's range).
  static RatingVector at_level(const FactorSchema& schema, std::size_t level) {
    RatingVector rv;
    for (const auto& f : schema.factors)
      rv.values.push_back(std::min(static_cast<double>(level), f.max_rating()));
    return rv;
  }

  void validate(const FactorSchema& schema) const {
    if (values.size() != schema.size())
      throw Error(ErrorKind::schema, "rating vector has " + std::to_string(values.size()) +
                                         " entries, schema has " + std::to_string(schema.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto& f = schema.factors[i];
      if (!(values[i] >= 0.0 && values[i] <= f.max_rating()))
        throw Error(ErrorKind::domain, "rating for factor " + f.id + " is " +
                                           std::to_string(values[i]) + ", outside [0," +
                                           std::to_string(f.level_count() - 1) + "]");
    }
  }

  friend bool operator==(const RatingVector&, const RatingVector&) = default;
};

/// Trainable consequent values: fmp[i][k] for factor i, rating level k.
struct NfbParameters {
  std::vector<std::vector<double>> fmp;

  static NfbParameters initial(const FactorSchema& schema) {
    NfbParameters p;
    for (const auto& f : schema.factors) p.fmp.push_back(f.initial_fmp);
    return p;
  }

  void validate(const FactorSchema& schema) const {
    if (fmp.size() != schema.size())
      throw Error(ErrorKind::schema, "shape mismatch: " + std::to_string(fmp.size()) +
                                         " fmp rows for " + std::to_string(schema.size()) +
                                         " factors");
    for (std::size_t i = 0; i < fmp.size(); ++i) {
      const auto& f = schema.factors[i];
      if (fmp[i].size() != f.level_count())
        throw Error(ErrorKind::schema, "shape mismatch at factor " + f.id + ": " +
                                           std::to_string(fmp[i].size()) + " values for " +
                                           std::to_string(f.level_count()) + " levels");
      for (double v : fmp[i])
        if (!(v > 0.0) || !std::isfinite(v))
          throw Error(ErrorKind::domain, "non-positive fmp value at factor " + f.id);
      if (!is_monotone(fmp[i], f.direction))
        throw Error(ErrorKind::domain, "monotonicity violated at factor " + f.id);
    }
  }

  friend bool operator==(const NfbParameters&, const NfbParameters&) = default;
};

/// Six-level COCOMO-81 layout: very_low ... extra_high, nominal at index 2.
inline std::vector<std::string> cocomo81_levels() {
  return {"very_low", "low", "nominal", "high", "very_high", "extra_high"};
}

/// Fifteen intermediate COCOMO-81 cost drivers with the published effort
/// multipliers as initial FMP values. Cells the original tables leave blank
/// repeat the nearest defined level so every factor spans all six levels.
inline FactorSchema cocomo81_schema(std::string model_binding = "cocomo81_organic") {
  struct Row {
    const char* id;
    const char* name;
    Direction dir;
    std::vector<double> em;
  };
  using D = Direction;
  const std::vector<Row> rows = {
      {"rely", "Required software reliability", D::increasing, {0.75, 0.88, 1.00, 1.15, 1.40, 1.40}},
      {"data", "Database size", D::increasing, {0.94, 0.94, 1.00, 1.08, 1.16, 1.16}},
      {"cplx", "Product complexity", D::increasing, {0.70, 0.85, 1.00, 1.15, 1.30, 1.65}},
      {"time", "Execution time constraint", D::increasing, {1.00, 1.00, 1.00, 1.11, 1.30, 1.66}},
      {"stor", "Main storage constraint", D::increasing, {1.00, 1.00, 1.00, 1.06, 1.21, 1.56}},
      {"virt", "Virtual machine volatility", D::increasing, {0.87, 0.87, 1.00, 1.15, 1.30, 1.30}},
      {"turn", "Computer turnaround time", D::increasing, {0.87, 0.87, 1.00, 1.07, 1.15, 1.15}},
      {"acap", "Analyst capability", D::decreasing, {1.46, 1.19, 1.00, 0.86, 0.71, 0.71}},
      {"aexp", "Applications experience", D::decreasing, {1.29, 1.13, 1.00, 0.91, 0.82, 0.82}},
      {"pcap", "Programmer capability", D::decreasing, {1.42, 1.17, 1.00, 0.86, 0.70, 0.70}},
      {"vexp", "Virtual machine experience", D::decreasing, {1.21, 1.10, 1.00, 0.90, 0.90, 0.90}},
      {"lexp", "Programming language experience", D::decreasing, {1.14, 1.07, 1.00, 0.95, 0.95, 0.95}},
      {"modp", "Use of modern programming practices", D::decreasing, {1.24, 1.10, 1.00, 0.91, 0.82, 0.82}},
      {"tool", "Use of software tools", D::decreasing, {1.24, 1.10, 1.00, 0.91, 0.83, 0.83}},
      // Schedule compression and stretch-out both cost effort: not monotone.
      {"sced", "Required development schedule", D::none, {1.23, 1.08, 1.00, 1.04, 1.10, 1.10}},
  };
  FactorSchema schema;
  schema.model_binding = std::move(model_binding);
  for (const auto& r : rows)
    schema.factors.push_back({r.id, r.name, cocomo81_levels(), r.dir, r.em});
  return schema;
}

}  // namespace nfa
