#pragma once

// Neuro-Fuzzy Bank: per-factor five-layer fuzzy inference mapping an
// adjusted rating to a numeric multiplier.
//
//   layer 1  membership of the rating in each level's fuzzy set
//   layer 2  firing strength (single-antecedent rules: equal to layer 1)
//   layer 3  normalized firing strength
//   layer 4  rule output  w_bar[k] * fmp[k]
//   layer 5  sum of rule outputs = FM

#include <cmath>
#include <concepts>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nfa/error.hpp"
#include "nfa/schema.hpp"

namespace nfa {

/// Unit-width triangle centered on an integer level: max(0, 1 - |x - center|).
inline double triangular_membership(double x, std::size_t center, std::size_t level_count,
                                    std::string_view factor = {}) {
  const double top = static_cast<double>(level_count) - 1.0;
  auto where = [&] { return factor.empty() ? std::string{} : " for factor " + std::string(factor); };
  if (!(x >= 0.0 && x <= top))
    throw Error(ErrorKind::domain, "rating " + std::to_string(x) + where() + " outside [0," +
                                       std::to_string(level_count - 1) + "]");
  if (center >= level_count)
    throw Error(ErrorKind::domain, "level index " + std::to_string(center) + where() +
                                       " outside [0," + std::to_string(level_count - 1) + "]");
  const double d = std::abs(x - static_cast<double>(center));
  return d >= 1.0 ? 0.0 : 1.0 - d;
}

/// A membership family: degree of rating x in the fuzzy set of level `center`.
template <class F>
concept MembershipFamily = requires(const F& f, double x, std::size_t c, std::size_t k) {
  { f(x, c, k) } -> std::convertible_to<double>;
};

struct TriangularMembership {
  double operator()(double x, std::size_t center, std::size_t level_count) const {
    return triangular_membership(x, center, level_count);
  }
};

/// Inference trace for one factor.
struct NfbTraceRow {
  std::vector<double> w;      // firing strengths (= memberships)
  std::vector<double> w_bar;  // normalized firing strengths
  double fm = 0.0;

  friend bool operator==(const NfbTraceRow&, const NfbTraceRow&) = default;
};

struct NfbTrace {
  std::vector<NfbTraceRow> rows;  // schema order

  friend bool operator==(const NfbTrace&, const NfbTrace&) = default;
};

template <MembershipFamily Membership = TriangularMembership>
NfbTraceRow nfb_forward(double arf, std::span<const double> fmp, const Membership& membership = {}) {
  const std::size_t levels = fmp.size();
  NfbTraceRow row;
  row.w.resize(levels);
  row.w_bar.resize(levels);

  double total = 0.0;
  for (std::size_t k = 0; k < levels; ++k) {
    row.w[k] = membership(arf, k, levels);
    total += row.w[k];
  }
  if (!(total > 0.0))
    throw Error(ErrorKind::inference,
                "firing strengths sum to zero at rating " + std::to_string(arf), "nfb");

  for (std::size_t k = 0; k < levels; ++k) {
    row.w_bar[k] = row.w[k] / total;
    row.fm += row.w_bar[k] * fmp[k];
  }
  return row;
}

struct NfbOutput {
  std::vector<double> multipliers;  // FM_i in schema order
  NfbTrace trace;

  std::map<std::string, double> keyed(const FactorSchema& schema) const {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < multipliers.size(); ++i) out[schema.factors[i].id] = multipliers[i];
    return out;
  }
};

template <MembershipFamily Membership = TriangularMembership>
NfbOutput nfb_forward_all(const RatingVector& arf, const NfbParameters& params,
                          const FactorSchema& schema, const Membership& membership = {}) {
  if (arf.values.size() != schema.size() || params.fmp.size() != schema.size())
    throw Error(ErrorKind::schema,
                "expected " + std::to_string(schema.size()) + " factors, got " +
                    std::to_string(arf.values.size()) + " ratings and " +
                    std::to_string(params.fmp.size()) + " fmp rows",
                "nfb");
  NfbOutput out;
  out.multipliers.reserve(schema.size());
  out.trace.rows.reserve(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& f = schema.factors[i];
    if (params.fmp[i].size() != f.level_count())
      throw Error(ErrorKind::schema, "shape mismatch at factor " + f.id, "nfb");
    if (!(arf.values[i] >= 0.0 && arf.values[i] <= f.max_rating()))
      throw Error(ErrorKind::domain,
                  "rating " + std::to_string(arf.values[i]) + " for factor " + f.id +
                      " outside [0," + std::to_string(f.level_count() - 1) + "]",
                  "nfb");
    auto row = nfb_forward(arf.values[i], params.fmp[i], membership);
    out.multipliers.push_back(row.fm);
    out.trace.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace nfa
