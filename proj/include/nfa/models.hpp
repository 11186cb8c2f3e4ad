#pragma once

// Algorithmic back-ends consuming factor multipliers and size.

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nfa/error.hpp"

namespace nfa {

struct ModelCoefficients {
  double a = 1.0;  // scale constant
  double b = 1.0;  // size exponent

  void validate() const {
    if (!(a > 0.0) || !std::isfinite(a))
      throw Error(ErrorKind::domain, "coefficient a must be positive");
    if (!(b > 0.0) || !std::isfinite(b))
      throw Error(ErrorKind::domain, "coefficient b must be positive");
  }

  friend bool operator==(const ModelCoefficients&, const ModelCoefficients&) = default;
};

struct ModelInputs {
  double size = 1.0;  // KSLOC or unadjusted function points
  std::string model_id;
  ModelCoefficients coefficients;

  friend bool operator==(const ModelInputs&, const ModelInputs&) = default;
};

/// Plug-in contract for an algorithmic model. Implementations map size,
/// coefficients and the factor multipliers to a positive effort; models that
/// can be trained against also report the partial derivatives of effort with
/// respect to each multiplier.
class AlgorithmicModel {
 public:
  virtual ~AlgorithmicModel() = default;

  virtual std::string_view id() const = 0;
  virtual double effort(double size, const ModelCoefficients& c,
                        std::span<const double> multipliers) const = 0;

  /// Literature or configured default coefficients, if the model has any.
  virtual std::optional<ModelCoefficients> default_coefficients() const { return std::nullopt; }

  virtual bool has_derivatives() const { return false; }

  /// Writes d(effort)/d(multiplier_i) into `out`.
  virtual void effort_partials(double /*size*/, const ModelCoefficients& /*c*/,
                               std::span<const double> /*multipliers*/,
                               std::span<double> /*out*/) const {
    throw Error(ErrorKind::capability,
                "model '" + std::string(id()) + "' does not provide derivatives", "model");
  }
};

/// effort = a * size^b * prod(multipliers)
class MultiplicativeModel final : public AlgorithmicModel {
 public:
  MultiplicativeModel(std::string id, std::optional<ModelCoefficients> defaults)
      : id_(std::move(id)), defaults_(defaults) {}

  std::string_view id() const override { return id_; }

  double effort(double size, const ModelCoefficients& c,
                std::span<const double> multipliers) const override {
    double e = c.a * std::pow(size, c.b);
    for (double fm : multipliers) e *= fm;
    return e;
  }

  std::optional<ModelCoefficients> default_coefficients() const override { return defaults_; }

  bool has_derivatives() const override { return true; }

  void effort_partials(double size, const ModelCoefficients& c,
                       std::span<const double> multipliers,
                       std::span<double> out) const override {
    const double base = c.a * std::pow(size, c.b);
    // Product of all multipliers except i, computed without division so a
    // tiny multiplier does not lose precision.
    const std::size_t n = multipliers.size();
    std::vector<double> prefix(n + 1, 1.0), suffix(n + 1, 1.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * multipliers[i];
    for (std::size_t i = n; i > 0; --i) suffix[i - 1] = suffix[i] * multipliers[i - 1];
    for (std::size_t i = 0; i < n; ++i) out[i] = base * prefix[i] * suffix[i + 1];
  }

 private:
  std::string id_;
  std::optional<ModelCoefficients> defaults_;
};

inline constexpr std::string_view kCocomoOrganic = "cocomo81_organic";
inline constexpr std::string_view kCocomoSemidetached = "cocomo81_semidetached";
inline constexpr std::string_view kCocomoEmbedded = "cocomo81_embedded";
inline constexpr std::string_view kFunctionPoints = "function_points";

/// Back-ends addressable by model id. The built-in registry is immutable;
/// callers wanting extra back-ends copy it and add to the copy.
class ModelRegistry {
 public:
  void add(std::shared_ptr<const AlgorithmicModel> model) {
    std::string key(model->id());
    models_[std::move(key)] = std::move(model);
  }

  bool contains(std::string_view id) const { return models_.count(std::string(id)) != 0; }

  const AlgorithmicModel& get(std::string_view id) const {
    auto it = models_.find(std::string(id));
    if (it == models_.end())
      throw Error(ErrorKind::domain, "unknown model_id '" + std::string(id) + "'", "model");
    return *it->second;
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    for (const auto& [id, m] : models_) out.push_back(id);
    return out;
  }

  /// Organic (3.2, 1.05), semidetached (3.0, 1.12), embedded (2.8, 1.20)
  /// intermediate COCOMO-81 modes, plus a function-point curve whose
  /// coefficients must come from a fit or a parameter document.
  static const ModelRegistry& builtin() {
    static const ModelRegistry registry = [] {
      ModelRegistry r;
      r.add(std::make_shared<MultiplicativeModel>(std::string(kCocomoOrganic),
                                                  ModelCoefficients{3.2, 1.05}));
      r.add(std::make_shared<MultiplicativeModel>(std::string(kCocomoSemidetached),
                                                  ModelCoefficients{3.0, 1.12}));
      r.add(std::make_shared<MultiplicativeModel>(std::string(kCocomoEmbedded),
                                                  ModelCoefficients{2.8, 1.20}));
      r.add(std::make_shared<MultiplicativeModel>(std::string(kFunctionPoints), std::nullopt));
      return r;
    }();
    return registry;
  }

 private:
  std::map<std::string, std::shared_ptr<const AlgorithmicModel>> models_;
};

inline void validate_inputs(const ModelInputs& inputs, const ModelRegistry& registry) {
  if (!(inputs.size > 0.0) || !std::isfinite(inputs.size))
    throw Error(ErrorKind::domain, "size must be positive, got " + std::to_string(inputs.size),
                "model");
  if (!registry.contains(inputs.model_id))
    throw Error(ErrorKind::domain, "unknown model_id '" + inputs.model_id + "'", "model");
  try {
    inputs.coefficients.validate();
  } catch (const Error& e) {
    throw e.tagged("model");
  }
}

inline double estimate_effort(const ModelInputs& inputs, std::span<const double> multipliers,
                              const ModelRegistry& registry = ModelRegistry::builtin()) {
  validate_inputs(inputs, registry);
  for (std::size_t i = 0; i < multipliers.size(); ++i)
    if (!(multipliers[i] > 0.0) || !std::isfinite(multipliers[i]))
      throw Error(ErrorKind::domain,
                  "multiplier " + std::to_string(i) + " must be positive, got " +
                      std::to_string(multipliers[i]),
                  "model");
  return registry.get(inputs.model_id).effort(inputs.size, inputs.coefficients, multipliers);
}

/// Coefficients per model id: registry defaults overlaid with explicit
/// entries (typically the parameter document's binding).
class CoefficientTable {
 public:
  CoefficientTable() = default;

  static CoefficientTable defaults(const ModelRegistry& registry = ModelRegistry::builtin()) {
    CoefficientTable t;
    for (const auto& id : registry.ids())
      if (auto c = registry.get(id).default_coefficients()) t.table_[id] = *c;
    return t;
  }

  void set(std::string id, ModelCoefficients c) { table_[std::move(id)] = c; }

  const ModelCoefficients& at(std::string_view id) const {
    auto it = table_.find(std::string(id));
    if (it == table_.end())
      throw Error(ErrorKind::domain,
                  "no coefficients configured for model_id '" + std::string(id) + "'", "model");
    return it->second;
  }

  bool contains(std::string_view id) const { return table_.count(std::string(id)) != 0; }

 private:
  std::map<std::string, ModelCoefficients> table_;
};

}  // namespace nfa
