// flowhawk: flow-based botnet detection toolkit.
//
// Subcommands wire the pipeline end to end: extract (pcap -> flows), train,
// crossval, select (feature ranking), optimize (GA / grid / random search),
// detect (offline or live detection), report (render stored result rows).
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "flowhawk/dataset.hpp"
#include "flowhawk/detector.hpp"
#include "flowhawk/featsel.hpp"
#include "flowhawk/ingest.hpp"
#include "flowhawk/metrics.hpp"
#include "flowhawk/optimize.hpp"

namespace {

using namespace flowhawk;

std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop.store(true); }

classifiers::Value parse_value(const std::string& text) {
  if (text == "None" || text == "none") return classifiers::Value::none();
  try {
    std::size_t used = 0;
    std::int64_t i = std::stoll(text, &used);
    if (used == text.size()) return classifiers::Value(i);
  } catch (...) {
  }
  try {
    std::size_t used = 0;
    double d = std::stod(text, &used);
    if (used == text.size()) return classifiers::Value(d);
  } catch (...) {
  }
  return classifiers::Value(text);
}

classifiers::ClassifierSpec build_spec(const std::string& kind,
                                       const std::vector<std::string>& sets) {
  classifiers::ClassifierSpec spec;
  spec.kind = classifiers::kind_from_string(kind);
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set expects name=value, got '" + s + "'");
    spec.hyperparameters[s.substr(0, eq)] = parse_value(s.substr(eq + 1));
  }
  classifiers::validate_spec(spec);
  return spec;
}

dataset::LabeledDataset load_dataset(const std::string& flows_path,
                                     const std::string& features_csv) {
  auto flows = dataset::read_flow_file(flows_path);
  std::vector<std::string> features = numeric_feature_names();
  if (!features_csv.empty()) {
    features.clear();
    std::stringstream ss(features_csv);
    std::string name;
    while (std::getline(ss, name, ','))
      if (!name.empty()) features.push_back(name);
  }
  std::size_t dropped = 0;
  auto ds = dataset::build_matrix(flows, features, &dropped);
  ds.provenance = flows_path;
  if (dropped > 0)
    std::cerr << "note: dropped " << dropped << " background-labeled flows\n";
  return ds;
}

std::string now_iso8601() {
  auto now = std::chrono::system_clock::now();
  auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                now.time_since_epoch())
                .count();
  return detector::iso8601_us(us);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

int cmd_extract(const std::string& pcap_in, const std::string& flows_out) {
  std::vector<FlowRecord> flows;
  ingest::FlowAggregator agg({}, [&](FlowRecord&& f) { flows.push_back(std::move(f)); });
  std::uint64_t skipped = 0;
  for (const auto& pkt : ingest::read_pcap(pcap_in, &skipped)) agg.add(pkt);
  agg.flush();
  dataset::write_flow_file(flows_out, flows);
  std::cout << flows.size() << " flows written to " << flows_out;
  if (skipped > 0) std::cout << " (" << skipped << " non-IP frames skipped)";
  std::cout << "\n";
  return 0;
}

// Renders stored TSV rows (crossval reports or search histories) as an
// aligned table.
int cmd_report(const std::string& rows_path) {
  std::ifstream in(rows_path);
  if (!in) throw dataset::DatasetError("cannot open " + rows_path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    rows.push_back(std::move(cols));
  }
  if (rows.empty()) throw dataset::DatasetError(rows_path + " is empty");
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (width.size() <= i) width.push_back(0);
      width[i] = std::max(width[i], r[i].size());
    }
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::cout << r[i];
      if (i + 1 < r.size())
        std::cout << std::string(width[i] - r[i].size() + 2, ' ');
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowhawk: flow-based botnet detection toolkit"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  int jobs = 1;
  app.add_option("--seed", seed, "PRNG seed used by every randomized step")
      ->capture_default_str();
  app.add_option("--jobs", jobs, "worker count cap")->capture_default_str();

  // extract
  std::string pcap_in, flows_out;
  auto* extract = app.add_subcommand("extract", "pcap to .binetflow flow file");
  extract->add_option("pcap", pcap_in, "input pcap path")->required();
  extract->add_option("out", flows_out, "output flow file")->required();

  // train
  std::string kind = "random_forest", flows_path, features_csv, model_out;
  std::string metadata_path, model_id;
  std::vector<std::string> sets;
  auto* train = app.add_subcommand("train", "fit a classifier and save the model");
  train->add_option("--flows", flows_path, "labeled flow file")->required();
  train->add_option("--kind", kind, "classifier kind")->capture_default_str();
  train->add_option("--set", sets, "hyperparameter override name=value");
  train->add_option("--features", features_csv, "comma-separated feature names");
  train->add_option("--out", model_out, "model output path")->required();
  train->add_option("--metadata", metadata_path, "metadata registry to update");
  train->add_option("--model-id", model_id, "registry id (default: file stem)");

  // crossval
  std::string report_out;
  int folds = 10;
  auto* crossval = app.add_subcommand("crossval", "stratified k-fold evaluation");
  crossval->add_option("--flows", flows_path, "labeled flow file")->required();
  crossval->add_option("--kind", kind, "classifier kind")->capture_default_str();
  crossval->add_option("--set", sets, "hyperparameter override name=value");
  crossval->add_option("--features", features_csv, "comma-separated feature names");
  crossval->add_option("--k", folds, "fold count")->capture_default_str();
  crossval->add_option("--out", report_out, "write machine-readable rows here");

  // select
  std::size_t top_k = featsel::kDefaultTopK;
  std::string select_out;
  auto* select = app.add_subcommand("select", "feature importance ranking");
  select->add_option("--flows", flows_path, "labeled flow file")->required();
  select->add_option("--top", top_k, "retained feature count")
      ->capture_default_str();
  select->add_option("--out", select_out, "write the importance table here");

  // optimize
  std::string method = "ga", history_out;
  int pop = 10, gens = 10, n_iter = 50;
  std::uint64_t grid_cap = optimize::kDefaultGridCap;
  auto* opt = app.add_subcommand("optimize", "hyperparameter search");
  opt->add_option("--flows", flows_path, "labeled flow file")->required();
  opt->add_option("--kind", kind, "classifier kind")->capture_default_str();
  opt->add_option("--method", method, "ga | grid | random")->capture_default_str();
  opt->add_option("--features", features_csv, "comma-separated feature names");
  opt->add_option("--pop", pop, "GA population size")->capture_default_str();
  opt->add_option("--gen", gens, "GA generation limit")->capture_default_str();
  opt->add_option("--k", folds, "CV folds for fitness")->capture_default_str();
  opt->add_option("--n-iter", n_iter, "random-search samples")->capture_default_str();
  opt->add_option("--cap", grid_cap, "grid-search combination cap")
      ->capture_default_str();
  opt->add_option("--history", history_out, "write GA history rows here");

  // detect
  std::string read_path, iface, models_dir = ".", alert_log, flow_log, listen;
  auto* detect = app.add_subcommand("detect", "run the detection engine");
  auto* ropt = detect->add_option("-r,--read", read_path, "pcap or flow file");
  auto* iopt = detect->add_option("-i,--interface", iface, "live capture interface");
  detect->add_option("--models-dir", models_dir, "model file directory")
      ->capture_default_str();
  detect->add_option("--metadata", metadata_path, "model metadata file")->required();
  detect->add_option("--alert-log", alert_log, "alert log path");
  detect->add_option("--flow-log", flow_log, "labeled-flow log path");
  detect->add_option("--listen", listen, "websocket feed address host:port");
  ropt->excludes(iopt);

  // report
  std::string rows_path;
  auto* report = app.add_subcommand("report", "render stored result rows");
  report->add_option("rows", rows_path, "TSV rows file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Collapse CLI11's per-error exit codes into the documented usage code.
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (extract->parsed()) return cmd_extract(pcap_in, flows_out);

    if (train->parsed()) {
      auto spec = build_spec(kind, sets);
      auto ds = load_dataset(flows_path, features_csv);
      auto model = classifiers::fit(spec, ds, seed);
      classifiers::save_model_file(*model, model_out);
      std::cout << "trained " << kind << " on " << ds.rows() << " flows in "
                << model->fit_time_s() << " s -> " << model_out << "\n";
      if (!metadata_path.empty()) {
        std::vector<detector::ModelMetadata> models;
        if (std::filesystem::exists(metadata_path))
          models = detector::read_metadata(metadata_path);
        detector::ModelMetadata meta;
        meta.model_id = model_id.empty()
                            ? std::filesystem::path(model_out).stem().string()
                            : model_id;
        meta.file_name = std::filesystem::path(model_out).filename().string();
        meta.kind = kind;
        meta.trained_on = flows_path;
        meta.features = model->feature_names();
        meta.created_at = now_iso8601();
        std::erase_if(models, [&](const detector::ModelMetadata& m) {
          return m.model_id == meta.model_id;
        });
        models.push_back(std::move(meta));
        detector::write_metadata(metadata_path, models);
      }
      return 0;
    }

    if (crossval->parsed()) {
      auto spec = build_spec(kind, sets);
      auto ds = load_dataset(flows_path, features_csv);
      auto rep = metrics::cross_validate(spec, ds, folds, seed, jobs);
      std::cout << metrics::report_table(rep);
      if (!report_out.empty()) write_text(report_out, metrics::report_rows(rep));
      return 0;
    }

    if (select->parsed()) {
      auto ds = load_dataset(flows_path, features_csv);
      auto ranked = featsel::rank_features(ds, seed);
      std::cout << featsel::importance_table(ranked);
      auto kept = featsel::select_top_k(ranked, top_k);
      std::cout << "retained:";
      for (const auto& name : kept) std::cout << ' ' << name;
      std::cout << "\n";
      if (!select_out.empty())
        write_text(select_out, featsel::importance_table(ranked));
      return 0;
    }

    if (opt->parsed()) {
      auto ds = load_dataset(flows_path, features_csv);
      auto k = classifiers::kind_from_string(kind);
      optimize::GAConfig cfg{pop, gens, folds, seed, jobs};
      optimize::SearchResult result;
      if (method == "ga")
        result = optimize::run_ga(k, ds, cfg);
      else if (method == "grid")
        result = optimize::grid_search(k, optimize::preset_grid(k), ds, cfg, grid_cap);
      else if (method == "random")
        result = optimize::random_search(k, n_iter, ds, cfg);
      else
        throw CLI::ValidationError("--method must be ga, grid or random");
      std::cout << "best " << result.best.repr() << " fitness "
                << result.best_fitness << " (" << result.evaluations
                << " evaluations)\n";
      for (const auto& d : result.diagnostics) std::cerr << d << "\n";
      if (!history_out.empty())
        write_text(history_out, optimize::history_rows(result));
      return 0;
    }

    if (detect->parsed()) {
      auto registry = detector::load_registry(models_dir, metadata_path);
      for (const auto& s : registry.skipped)
        std::cerr << "skipped model " << s.model_id << ": " << s.reason << "\n";
      std::unique_ptr<detector::StreamServer> stream;
      if (!listen.empty())
        stream = std::make_unique<detector::StreamServer>(listen);
      detector::DetectionConfig cfg;
      cfg.alert_log_path = alert_log;
      cfg.flow_log_path = flow_log;
      cfg.stream = stream.get();
      cfg.stop = &g_stop;

      detector::RunSummary summary;
      if (!iface.empty()) {
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        summary = detector::run_detection_live(iface, registry, cfg);
      } else if (!read_path.empty()) {
        auto mode = detector::detect_source_mode(read_path);
        summary = mode == detector::SourceMode::Pcap
                      ? detector::run_detection_pcap(read_path, registry, cfg)
                      : detector::run_detection_flow_file(read_path, registry, cfg);
      } else {
        throw CLI::ValidationError("detect requires -r <path> or -i <interface>");
      }
      if (stream) stream->stop();
      std::cout << "flows " << summary.flows << ", alerts " << summary.alerts
                << ", duration " << summary.duration_s << " s\n";
      return 0;
    }

    if (report->parsed()) return cmd_report(rows_path);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const FlowError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const dataset::DatasetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const detector::MetadataParse& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const classifiers::InvalidHyperparameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
