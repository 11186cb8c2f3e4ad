#include "service.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "httplib.h"
#include "wire.hpp"

namespace nfa::app {

namespace {

using nlohmann::json;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Reply error_reply(int status, const std::string& message, const std::string& stage = {}) {
  json body = {{"error", message}};
  if (!stage.empty()) body["stage"] = stage;
  return {status, std::move(body)};
}

int status_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::inference:
    case ErrorKind::numeric:
    case ErrorKind::capability:
      return 500;
    default:
      return 400;
  }
}

/// Runs a handler body, mapping library errors to HTTP statuses.
template <class F>
Reply guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    return error_reply(400, std::string("body: malformed JSON: ") + e.what());
  } catch (const Error& e) {
    return error_reply(status_for(e), e.what(), e.stage());
  } catch (const std::exception& e) {
    return error_reply(500, e.what(), "service");
  }
}

json parse_body(std::string_view body) {
  if (body.empty()) return json();
  return json::parse(body.begin(), body.end());
}

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>NFA estimation service</title></head>
<body>
<h1>NFA estimation service</h1>
<p>The web console assets are not installed. Start the service with
<code>--assets &lt;dir&gt;</code> to serve them. The JSON API is available:</p>
<ul>
<li>GET /api/schema</li>
<li>POST /api/estimate</li>
<li>POST /api/whatif</li>
<li>POST /api/projects</li>
<li>POST /api/train</li>
<li>PUT /api/rules</li>
</ul>
</body></html>
)";

}  // namespace

Service::Service(ServiceOptions options)
    : Service(options, load_parameter_document(read_text(options.params_path))) {}

Service::Service(ServiceOptions options, ParameterDocument doc)
    : options_(std::move(options)),
      doc_(std::make_shared<const ParameterDocument>(std::move(doc))) {}

std::shared_ptr<const ParameterDocument> Service::document() const {
  std::lock_guard lock(doc_mutex_);
  return doc_;
}

void Service::publish(std::shared_ptr<const ParameterDocument> doc) {
  std::lock_guard lock(doc_mutex_);
  doc_ = std::move(doc);
}

void Service::persist(const ParameterDocument& doc) const {
  if (options_.params_path.empty()) return;
  const std::string tmp = options_.params_path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << save_parameter_document(doc);
  }
  std::filesystem::rename(tmp, options_.params_path);
}

Reply Service::schema() const {
  return guarded([&] { return Reply{200, schema_to_json(*document())}; });
}

Reply Service::estimate(std::string_view body) const {
  return guarded([&] {
    const auto doc = document();
    const auto req = parse_estimate_request(parse_body(body), *doc);
    return Reply{200, estimation_to_json(run_estimate(req, *doc), req, doc->schema)};
  });
}

Reply Service::whatif(std::string_view body) const {
  return guarded([&] {
    const auto doc = document();
    const json j = parse_body(body);
    auto req = parse_estimate_request(j, *doc);
    const auto sweep = parse_sweep(j, *doc);
    const std::size_t idx = *doc->schema.index_of(sweep.factor_id);
    json points = json::array();
    for (double rating : sweep_points(sweep)) {
      req.ratings.values[idx] = rating;
      points.push_back({{"rating", rating}, {"effort_pm", run_estimate(req, *doc).effort}});
    }
    return Reply{200, {{"factor_id", sweep.factor_id}, {"points", std::move(points)}}};
  });
}

Reply Service::append_project(std::string_view body) {
  return guarded([&] {
    if (options_.data_path.empty()) return error_reply(400, "no dataset file configured");
    const auto doc = document();
    const auto record = parse_project_record(parse_body(body), *doc);
    std::lock_guard lock(write_mutex_);
    const bool fresh = !std::filesystem::exists(options_.data_path) ||
                       std::filesystem::file_size(options_.data_path) == 0;
    std::ofstream out(options_.data_path, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot append to " + options_.data_path);
    if (fresh) out << dataset_csv_header(doc->schema);
    out << dataset_csv_row(record, doc->schema);
    return Reply{201, {{"appended", record.id}}};
  });
}

Reply Service::train(std::string_view body) {
  std::unique_lock lock(write_mutex_, std::try_to_lock);
  if (!lock.owns_lock()) return error_reply(409, "training already running");
  training_ = true;
  struct Reset {
    std::atomic<bool>& flag;
    ~Reset() { flag = false; }
  } reset{training_};

  return guarded([&] {
    if (options_.data_path.empty()) return error_reply(400, "no dataset file configured");
    const auto doc = document();
    const auto config = parse_training_config(parse_body(body));
    const auto records =
        parse_dataset_csv(read_text(options_.data_path), doc->schema, doc->coefficient_table());
    const auto report = nfa::train(records, doc->params, config, doc->rules, doc->schema);

    auto next = std::make_shared<ParameterDocument>(*doc);
    next->params = report.final_params;
    next->provenance = "trained on " + options_.data_path + " (" +
                       std::to_string(records.size()) + " records); best epoch " +
                       std::to_string(report.best_epoch) + "; loss " +
                       format_double(report.initial_loss) + " -> " +
                       format_double(report.final_loss);
    persist(*next);
    publish(std::move(next));
    return Reply{200, training_summary_to_json(report, records.size())};
  });
}

Reply Service::put_rules(std::string_view body) {
  return guarded([&] {
    const json j = parse_body(body);
    const json& rules_json = j.is_object() && j.contains("rules") ? j["rules"] : j;
    const auto rules = rules_from_json(rules_json);
    std::lock_guard lock(write_mutex_);
    const auto doc = document();
    if (auto report = validate_rules(rules, doc->schema); !report.empty())
      return Reply{400, {{"error", "rules: " + describe(report)},
                         {"violations", rule_violations_to_json(report)}}};
    auto next = std::make_shared<ParameterDocument>(*doc);
    next->rules = rules;
    persist(*next);
    publish(std::move(next));
    return Reply{200, {{"rules", rules_to_json(rules)}}};
  });
}

void Service::mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Reply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  server.Get("/api/schema", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, schema());
  });
  server.Post("/api/estimate", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, estimate(req.body));
  });
  server.Post("/api/whatif", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, whatif(req.body));
  });
  server.Post("/api/projects", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, append_project(req.body));
  });
  server.Post("/api/train", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, train(req.body));
  });
  server.Put("/api/rules", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, put_rules(req.body));
  });
  if (!options_.assets_dir.empty() && server.set_mount_point("/", options_.assets_dir)) return;
  server.Get("/", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(kPlaceholderPage, "text/html");
  });
}

std::pair<std::string, int> parse_listen_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size())
    throw Error(ErrorKind::domain, "listen address must be host:port, got '" + address + "'");
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(address.substr(colon + 1), &used);
    if (used != address.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorKind::domain, "invalid port in listen address '" + address + "'");
  }
  if (port < 0 || port > 65535)
    throw Error(ErrorKind::domain, "port out of range in listen address '" + address + "'");
  return {address.substr(0, colon), port};
}

}  // namespace nfa::app
