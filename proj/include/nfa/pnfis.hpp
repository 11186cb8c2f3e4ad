#pragma once

// Pre-processing stage: turns raw ratings (RF) into adjusted ratings (ARF)
// by applying inter-factor dependency rules.
//
// Each rule fires with strength s = min over its antecedents of the
// triangular membership of the antecedent's raw rating at the named level,
// and shifts its target by s * delta. Contributions to one target are summed
// and the result is clamped to the target's rating range. Only raw ratings
// are read, so rules never cascade and their order does not matter.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "nfa/error.hpp"
#include "nfa/nfb.hpp"
#include "nfa/schema.hpp"

namespace nfa {

struct Antecedent {
  std::string factor;
  std::size_t level = 0;

  friend bool operator==(const Antecedent&, const Antecedent&) = default;
};

struct DependencyRule {
  std::vector<Antecedent> antecedents;
  std::string target;
  double delta = 0.0;  // rating-level units
  std::string note;

  friend bool operator==(const DependencyRule&, const DependencyRule&) = default;
};

struct DependencySet {
  std::vector<DependencyRule> rules;

  bool empty() const noexcept { return rules.empty(); }
  friend bool operator==(const DependencySet&, const DependencySet&) = default;
};

struct RuleViolation {
  std::size_t rule_index;
  std::string reason;

  friend bool operator==(const RuleViolation&, const RuleViolation&) = default;
};

using ValidationReport = std::vector<RuleViolation>;

inline ValidationReport validate_rules(const DependencySet& rules, const FactorSchema& schema) {
  ValidationReport report;
  for (std::size_t r = 0; r < rules.rules.size(); ++r) {
    const auto& rule = rules.rules[r];
    if (rule.antecedents.empty()) report.push_back({r, "rule has no antecedents"});
    for (const auto& a : rule.antecedents) {
      auto i = schema.index_of(a.factor);
      if (!i) {
        report.push_back({r, "unknown antecedent factor '" + a.factor + "'"});
      } else if (a.level >= schema.factors[*i].level_count()) {
        report.push_back({r, "antecedent level " + std::to_string(a.level) +
                                 " invalid for factor " + a.factor});
      }
    }
    auto t = schema.index_of(rule.target);
    if (!t) {
      report.push_back({r, "unknown target factor '" + rule.target + "'"});
    } else if (!std::isfinite(rule.delta) ||
               std::abs(rule.delta) > schema.factors[*t].max_rating()) {
      report.push_back({r, "delta exceeds rating span of factor " + rule.target});
    }
  }
  return report;
}

inline std::string describe(const ValidationReport& report) {
  std::string out;
  for (const auto& v : report) {
    if (!out.empty()) out += "; ";
    out += "rule " + std::to_string(v.rule_index) + ": " + v.reason;
  }
  return out;
}

/// Strength with which a rule fires on the raw ratings.
inline double rule_strength(const DependencyRule& rule, const RatingVector& rf,
                            const FactorSchema& schema) {
  double s = 1.0;
  for (const auto& a : rule.antecedents) {
    const std::size_t i = *schema.index_of(a.factor);
    const auto& f = schema.factors[i];
    s = std::min(s, triangular_membership(rf.values[i], a.level, f.level_count(), f.id));
  }
  return s;
}

inline RatingVector pnfis_adjust(const RatingVector& rf, const DependencySet& rules,
                                 const FactorSchema& schema) {
  if (auto report = validate_rules(rules, schema); !report.empty())
    throw Error(ErrorKind::precondition, "dependency rules are invalid: " + describe(report),
                "pnfis");
  try {
    rf.validate(schema);
  } catch (const Error& e) {
    throw e.tagged("pnfis");
  }

  std::vector<double> shift(schema.size(), 0.0);
  std::vector<bool> targeted(schema.size(), false);
  for (const auto& rule : rules.rules) {
    const std::size_t t = *schema.index_of(rule.target);
    shift[t] += rule_strength(rule, rf, schema) * rule.delta;
    targeted[t] = true;
  }

  RatingVector arf = rf;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!targeted[i]) continue;
    arf.values[i] = std::clamp(rf.values[i] + shift[i], 0.0, schema.factors[i].max_rating());
  }
  return arf;
}

}  // namespace nfa
