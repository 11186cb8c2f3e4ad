#pragma once

// HTTP front-end over a parameter document and a project dataset file.
//
//   GET  /api/schema     factor definitions, level labels, rules
//   POST /api/estimate   EstimateRequest -> EstimationResult
//   POST /api/whatif     EstimateRequest + sweep -> [(rating, effort)]
//   POST /api/projects   append a ProjectRecord to the dataset file
//   POST /api/train      train on the dataset, swap in matured parameters
//   PUT  /api/rules      replace the dependency rules
//   GET  /               web console assets
//
// Readers take a snapshot of the current document; mutations are serialized
// by a writer lock and publish a new document by pointer swap.

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nfa/nfa.hpp"

namespace httplib {
class Server;
}

namespace nfa::app {

struct ServiceOptions {
  std::string params_path;
  std::string data_path;
  std::string assets_dir;  // empty: built-in placeholder page
};

struct Reply {
  int status = 200;
  nlohmann::json body;
};

class Service {
 public:
  explicit Service(ServiceOptions options);
  Service(ServiceOptions options, ParameterDocument doc);

  std::shared_ptr<const ParameterDocument> document() const;

  Reply schema() const;
  Reply estimate(std::string_view body) const;
  Reply whatif(std::string_view body) const;
  Reply append_project(std::string_view body);
  Reply train(std::string_view body);
  Reply put_rules(std::string_view body);

  bool training() const noexcept { return training_.load(); }

  /// Registers every route on `server`.
  void mount(httplib::Server& server);

 private:
  void publish(std::shared_ptr<const ParameterDocument> doc);
  void persist(const ParameterDocument& doc) const;

  ServiceOptions options_;
  mutable std::mutex doc_mutex_;
  std::shared_ptr<const ParameterDocument> doc_;
  std::mutex write_mutex_;
  std::atomic<bool> training_{false};
};

/// Splits "host:port"; throws Error(domain) when malformed.
std::pair<std::string, int> parse_listen_address(const std::string& address);

}  // namespace nfa::app
