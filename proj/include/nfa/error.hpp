#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace nfa {

enum class ErrorKind {
  domain,        // argument outside the operation's domain
  schema,        // ratings/parameters do not match the factor schema
  inference,     // fuzzy inference could not produce an output
  precondition,  // caller violated a documented precondition
  degenerate,    // data cannot support the requested fit or loss
  capability,    // back-end lacks a required feature
  numeric,       // non-finite value during computation
  parse,         // malformed CSV/JSON input
  load,          // parameter document failed validation
};

inline const char* to_string(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::schema: return "schema error";
    case ErrorKind::inference: return "inference error";
    case ErrorKind::precondition: return "precondition error";
    case ErrorKind::degenerate: return "degenerate input";
    case ErrorKind::capability: return "capability error";
    case ErrorKind::numeric: return "numeric failure";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::load: return "load error";
  }
  return "error";
}

/// Library-wide exception. The optional stage names the pipeline stage
/// (pnfis, nfb, model, ...) that raised it and is prefixed to what().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::string stage = {})
      : std::runtime_error(compose(kind, message, stage)),
        kind_(kind),
        message_(std::move(message)),
        stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& message() const noexcept { return message_; }

  /// Same error with a stage tag; an existing tag is kept.
  Error tagged(const std::string& stage) const {
    if (!stage_.empty()) return *this;
    return Error(kind_, message_, stage);
  }

 private:
  static std::string compose(ErrorKind kind, const std::string& message,
                             const std::string& stage) {
    std::string out;
    if (!stage.empty()) out += "[" + stage + "] ";
    out += to_string(kind);
    out += ": ";
    out += message;
    return out;
  }

  ErrorKind kind_;
  std::string message_;
  std::string stage_;
};

/// Raised when training produces a non-finite loss or gradient.
class TrainingError : public Error {
 public:
  TrainingError(int epoch, std::string record_id, std::string message)
      : Error(ErrorKind::numeric,
              "epoch " + std::to_string(epoch) + ", record '" + record_id +
                  "': " + message,
              "training"),
        epoch_(epoch),
        record_id_(std::move(record_id)) {}

  int epoch() const noexcept { return epoch_; }
  const std::string& record_id() const noexcept { return record_id_; }

 private:
  int epoch_;
  std::string record_id_;
};

}  // namespace nfa
