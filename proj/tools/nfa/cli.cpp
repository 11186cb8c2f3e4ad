#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "nfa/nfa.hpp"
#include "service.hpp"
#include "wire.hpp"

namespace nfa::app {

namespace {

using nlohmann::json;

/// File-system failure; maps to exit code 1.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw IoError("cannot write file '" + path + "'");
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

int exit_code_for(const Error& e) { return e.kind() == ErrorKind::numeric ? kNumeric : kValidation; }

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string params;
  std::string project;
  double size = 0.0;
  std::string model;
  std::vector<std::string> ratings;
  bool json_output = false;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  const auto doc = load_parameter_document(read_file(a.params));

  json request;
  if (!a.project.empty()) {
    const std::string text = read_file(a.project);
    try {
      request = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::parse, "project file: malformed JSON: " + std::string(e.what()),
                  "request");
    }
  } else {
    request = {{"size", a.size}, {"ratings", json::object()}};
    if (!a.model.empty()) request["model_id"] = a.model;
    // Unspecified factors default to their nominal (or middle) level.
    for (const auto& f : doc.schema.factors) {
      auto k = f.level_index("nominal");
      request["ratings"][f.id] = k ? static_cast<double>(*k) : f.max_rating() / 2.0;
    }
    for (const auto& kv : a.ratings) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorKind::parse, "--rating expects id=value, got '" + kv + "'", "request");
      const std::string id = kv.substr(0, eq), value = kv.substr(eq + 1);
      if (auto v = parse_double(value))
        request["ratings"][id] = *v;
      else
        request["ratings"][id] = value;
    }
  }

  const auto req = parse_estimate_request(request, doc);
  const auto result = run_estimate(req, doc);

  if (a.json_output) {
    out << estimation_to_json(result, req, doc.schema).dump() << "\n";
    return kOk;
  }

  out << "effort_pm: " << fixed(result.effort, 2) << "\n";
  out << "model_id: " << req.inputs.model_id << "\n";
  out << "size: " << format_double(req.inputs.size) << "\n";
  out << "product_em: " << fixed(result.product_em, 4) << "\n";
  out << std::left << std::setw(10) << "factor" << std::right << std::setw(8) << "rf"
      << std::setw(8) << "arf" << std::setw(10) << "fm" << "\n";
  bool adjusted = false;
  for (std::size_t i = 0; i < doc.schema.size(); ++i) {
    out << std::left << std::setw(10) << doc.schema.factors[i].id << std::right << std::setw(8)
        << fixed(req.ratings.values[i], 2) << std::setw(8) << fixed(result.arf.values[i], 2)
        << std::setw(10) << fixed(result.multipliers[i], 4) << "\n";
    adjusted = adjusted || result.arf.values[i] != req.ratings.values[i];
  }
  if (adjusted) {
    out << "arf_adjustments:\n";
    for (std::size_t i = 0; i < doc.schema.size(); ++i)
      if (result.arf.values[i] != req.ratings.values[i])
        out << "  " << doc.schema.factors[i].id << ": " << fixed(req.ratings.values[i], 2)
            << " -> " << fixed(result.arf.values[i], 2) << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string params;
  std::string out;
  int epochs = 500;
  double lr = 0.05;
  double min_fmp = 1e-3;
  std::uint64_t seed = 0;
  bool no_keep_best = false;
  bool progress = false;
  bool fit_baseline = false;
};

TrainingConfig make_config(int epochs, double lr, double min_fmp, std::uint64_t seed,
                           bool keep_best) {
  TrainingConfig cfg;
  cfg.epochs = epochs;
  cfg.learning_rate = lr;
  cfg.min_fmp = min_fmp;
  cfg.seed = seed;
  cfg.keep_best = keep_best;
  return cfg;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  auto doc = load_parameter_document(read_file(a.params));
  auto records = parse_dataset_csv(read_file(a.data), doc.schema, doc.coefficient_table());
  if (records.empty()) throw Error(ErrorKind::degenerate, "dataset has no records", "data");

  if (a.fit_baseline) {
    std::vector<ProjectRecord> bound;
    for (const auto& r : records)
      if (r.inputs.model_id == doc.schema.model_binding) bound.push_back(r);
    doc.coefficients = fit_baseline_coefficients(bound);
    for (auto& r : records)
      if (r.inputs.model_id == doc.schema.model_binding) r.inputs.coefficients = doc.coefficients;
    out << "fitted_coefficients: a=" << format_double(doc.coefficients.a)
        << " b=" << format_double(doc.coefficients.b) << "\n";
  }

  auto cfg = make_config(a.epochs, a.lr, a.min_fmp, a.seed, !a.no_keep_best);
  if (a.progress)
    cfg.on_epoch = [&err](const EpochInfo& e) {
      err << json{{"epoch", e.epoch}, {"loss", e.loss}}.dump() << "\n";
    };
  const auto report = train(records, doc.params, cfg, doc.rules, doc.schema);

  doc.params = report.final_params;
  doc.provenance = "trained on " + std::filesystem::path(a.data).filename().string() + " (" +
                   std::to_string(records.size()) + " records); epochs " +
                   std::to_string(a.epochs) + "; best epoch " +
                   std::to_string(report.best_epoch) + "; loss " +
                   format_double(report.initial_loss) + " -> " + format_double(report.final_loss);
  write_file(a.out, save_parameter_document(doc));

  out << "records: " << records.size() << "\n";
  out << "initial_loss: " << fixed(report.initial_loss, 6) << "\n";
  out << "final_loss: " << fixed(report.final_loss, 6) << "\n";
  out << "best_epoch: " << report.best_epoch << "\n";
  out << "wrote: " << a.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string data;
  std::string params;
  std::string protocol = "loocv";
  std::uint64_t seed = 0;
  double test_fraction = 1.0 / 3.0;
  int epochs = 500;
  double lr = 0.05;
  std::string csv;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto doc = load_parameter_document(read_file(a.params));
  const auto records = parse_dataset_csv(read_file(a.data), doc.schema, doc.coefficient_table());
  const auto cfg = make_config(a.epochs, a.lr, 1e-3, a.seed, true);

  const auto result =
      a.protocol == "loocv"
          ? loocv_evaluate(records, doc.schema, doc.rules, doc.params, cfg)
          : holdout_evaluate(records, doc.schema, doc.rules, doc.params, cfg, a.seed,
                             a.test_fraction);
  const auto comparison = compare_report(result.nfa, result.baseline);
  out << "protocol: " << a.protocol;
  if (a.protocol == "holdout") out << " (seed " << a.seed << ")";
  out << "\n" << render_table(comparison);
  if (!a.csv.empty()) {
    write_file(a.csv, render_csv(comparison));
    out << "wrote: " << a.csv << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  std::string params;
  std::string data;
  std::string listen;
  std::string assets;
};

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  std::string listen = a.listen;
  if (listen.empty()) {
    const char* env = std::getenv("NFA_LISTEN");
    listen = env && *env ? env : "127.0.0.1:8080";
  }
  const auto [host, port] = parse_listen_address(listen);
  Service service({a.params, a.data, a.assets});
  httplib::Server server;
  service.mount(server);
  if (!server.bind_to_port(host, port)) {
    err << "nfa: cannot listen on " << listen << "\n";
    return kUsage;
  }
  out << "listening on http://" << listen << "\n" << std::flush;
  server.listen_after_bind();
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_init(const std::string& model, const std::string& path, std::ostream& out) {
  write_file(path, save_parameter_document(default_document(model)));
  out << "wrote: " << path << "\n";
  return kOk;
}

struct SynthArgs {
  std::string params;
  std::string out;
  std::string truth_out;
  std::size_t projects = 60;
  std::uint64_t seed = 42;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const auto doc = load_parameter_document(read_file(a.params));
  SyntheticOptions opt;
  opt.projects = a.projects;
  opt.seed = a.seed;
  const auto ds = generate_synthetic_dataset(doc.schema, doc.params, doc.coefficients, opt, doc.rules);
  write_file(a.out, format_dataset_csv(ds.records, doc.schema));
  out << "wrote: " << a.out << " (" << ds.records.size() << " projects)\n";
  if (!a.truth_out.empty()) {
    auto truth = doc;
    truth.params = ds.truth;
    truth.provenance = "synthetic ground truth, seed " + std::to_string(a.seed);
    write_file(a.truth_out, save_parameter_document(truth));
    out << "wrote: " << a.truth_out << "\n";
  }
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neuro-fuzzy algorithmic effort estimation", "nfa"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate effort for one project");
  estimate->add_option("--params", est.params, "Parameter document (*.nfa.json)")->required();
  estimate->add_option("--project", est.project, "Project request file (JSON)");
  estimate->add_option("--size", est.size, "Size (KSLOC or function points)");
  estimate->add_option("--model", est.model, "Model id (default: document binding)");
  estimate->add_option("--rating", est.ratings, "Factor rating id=value (level label or number)");
  estimate->add_flag("--json", est.json_output, "Emit JSON");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Calibrate parameters against a dataset");
  train_cmd->add_option("--data", tr.data, "Dataset CSV")->required();
  train_cmd->add_option("--params", tr.params, "Input parameter document")->required();
  train_cmd->add_option("--out", tr.out, "Output parameter document")->required();
  train_cmd->add_option("--epochs", tr.epochs, "Epoch budget")->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", tr.lr, "Learning rate")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--min-fmp", tr.min_fmp, "Positivity floor")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", tr.seed, "Seed");
  train_cmd->add_flag("--no-keep-best", tr.no_keep_best, "Return the last epoch's parameters");
  train_cmd->add_flag("--progress", tr.progress, "Emit per-epoch JSON lines on stderr");
  train_cmd->add_flag("--fit-baseline", tr.fit_baseline,
                      "Refit (a, b) by log-linear least squares before training");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Compare calibrated and baseline accuracy");
  evaluate->add_option("--data", ev.data, "Dataset CSV")->required();
  evaluate->add_option("--params", ev.params, "Parameter document")->required();
  evaluate->add_option("--protocol", ev.protocol, "loocv or holdout")
      ->check(CLI::IsMember({"loocv", "holdout"}));
  evaluate->add_option("--seed", ev.seed, "Holdout split seed");
  evaluate->add_option("--test-fraction", ev.test_fraction, "Holdout test share")
      ->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--epochs", ev.epochs, "Epoch budget per fold")->check(CLI::PositiveNumber);
  evaluate->add_option("--lr", ev.lr, "Learning rate")->check(CLI::NonNegativeNumber);
  evaluate->add_option("--csv", ev.csv, "Also write the report as CSV");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--params", sv.params, "Parameter document")->required();
  serve->add_option("--data", sv.data, "Dataset CSV (appended to by /api/projects)")->required();
  serve->add_option("--listen", sv.listen, "host:port (default $NFA_LISTEN or 127.0.0.1:8080)");
  serve->add_option("--assets", sv.assets, "Directory of web console assets");

  std::string init_model = std::string(kCocomoOrganic), init_out;
  auto* init = app.add_subcommand("init", "Write the default COCOMO-81 parameter document");
  init->add_option("--model", init_model, "cocomo81_organic|cocomo81_semidetached|cocomo81_embedded")
      ->check(CLI::IsMember({std::string(kCocomoOrganic), std::string(kCocomoSemidetached),
                             std::string(kCocomoEmbedded)}));
  init->add_option("--out", init_out, "Output file")->required();

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with known ground truth");
  synth->add_option("--params", sy.params, "Parameter document to perturb")->required();
  synth->add_option("--out", sy.out, "Dataset CSV to write")->required();
  synth->add_option("--truth-out", sy.truth_out, "Write the ground-truth document here");
  synth->add_option("--projects", sy.projects, "Project count")->check(CLI::PositiveNumber);
  synth->add_option("--seed", sy.seed, "Seed");

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  if (argv.empty()) argv.push_back("nfa");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "nfa: " << e.what() << "\n";
    err << "run 'nfa --help' for usage\n";
    return kUsage;
  }

  try {
    if (estimate->parsed()) {
      if (est.project.empty() && !(estimate->count("--size") > 0)) {
        err << "nfa estimate: either --project or --size is required\n";
        return kUsage;
      }
      return cmd_estimate(est, out);
    }
    if (train_cmd->parsed()) return cmd_train(tr, out, err);
    if (evaluate->parsed()) return cmd_evaluate(ev, out);
    if (serve->parsed()) return cmd_serve(sv, out, err);
    if (init->parsed()) return cmd_init(init_model, init_out, out);
    if (synth->parsed()) return cmd_synth(sy, out);
  } catch (const IoError& e) {
    err << "nfa: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "nfa: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "nfa: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace nfa::app
