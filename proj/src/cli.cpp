#include "clindiag/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "clindiag/csv.hpp"
#include "clindiag/encoding.hpp"
#include "clindiag/error.hpp"
#include "clindiag/metrics.hpp"
#include "clindiag/model_io.hpp"
#include "clindiag/report.hpp"
#include "clindiag/svm.hpp"
#include "clindiag/synth.hpp"

namespace clindiag {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct RunConfig {
  std::string data, schema, model, registry, out, input, dual_dump;
  double C = 1.0;
  double tol = 1e-3;
  std::int64_t max_passes = 1000;
  int max_depth = 3;
  Eigen::Index min_leaf = 5;
  bool standardize = false;
  bool tree = false;
  double holdout = 0.0;
  std::uint64_t seed = 0;
  CohortSpec cohort;
};

bool is_json_path(const std::string& path) { return fs::path(path).extension() == ".json"; }

struct LoadedData {
  CsvTable table;
  LabeledDataset dataset;
};

// Encoding errors are reported against the CSV line they came from.
LoadedData load_labeled(const RunConfig& cfg, const EncodingSchema& schema) {
  LoadedData loaded{read_csv(cfg.data), {}};
  try {
    loaded.dataset = encode_dataset(to_records(loaded.table), schema);
  } catch (const Error& e) {
    if (e.record() && *e.record() < loaded.table.line_numbers.size())
      throw Error(e.code(), cfg.data + ":" + std::to_string(loaded.table.line_numbers[*e.record()]) + ": " + e.what(),
                  e.record());
    throw;
  }
  return loaded;
}

std::string mode_name(double holdout) { return holdout > 0.0 ? "holdout" : "resubstitution"; }

void emit_evaluation(const EvaluationSummary& summary, const RunConfig& cfg, std::ostream& out) {
  const std::string mode = mode_name(cfg.holdout);
  std::string text = "Evaluation mode: " + mode + "\n" + render_table(summary);
  out << text;
  if (cfg.out.empty()) return;
  if (is_json_path(cfg.out)) write_text_file(cfg.out, evaluation_to_json(summary, mode).dump(2) + "\n");
  else write_text_file(cfg.out, text);
}

// Splits the encoded data into the part used for fitting and the part used
// for evaluation. Without a holdout both are the full dataset.
std::pair<LabeledDataset, LabeledDataset> split_for_evaluation(const LabeledDataset& data, const RunConfig& cfg) {
  if (cfg.holdout <= 0.0) return {data, data};
  const auto split = holdout_split(data.size(), cfg.holdout, cfg.seed);
  if (split.test.empty() || split.train.empty())
    throw Error(ErrorCode::DatasetTooSmall, "holdout split leaves an empty part");
  return {data.subset(split.train), data.subset(split.test)};
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  CohortSpec spec = cfg.cohort;
  spec.seed = cfg.seed;
  const std::string csv = synth_csv(spec);
  if (cfg.out.empty()) out << csv;
  else write_text_file(cfg.out, csv);
  if (!cfg.schema.empty()) save_schema(synth_schema(spec.dims), cfg.schema);
  return kExitOk;
}

int cmd_encode(const RunConfig& cfg, std::ostream& out) {
  const auto schema = load_schema(cfg.schema);
  auto data = load_labeled(cfg, schema).dataset;
  if (cfg.standardize) data = standardize(data);
  std::string text;
  if (is_json_path(cfg.out)) {
    json vectors = json::array();
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < data.dims(); ++k) row.push_back(data.vectors(i, k));
      vectors.push_back(row);
    }
    json labels = json::array();
    for (Eigen::Index i = 0; i < data.size(); ++i) labels.push_back(static_cast<int>(data.labels(i)));
    json doc = {{"features", json::array()}, {"vectors", vectors}, {"labels", labels}, {"scaling", nullptr}};
    for (const auto& f : schema.features) doc["features"].push_back(f.name);
    if (data.scaling) {
      json mean = json::array(), stddev = json::array();
      for (Eigen::Index k = 0; k < data.dims(); ++k) {
        mean.push_back(data.scaling->mean(k));
        stddev.push_back(data.scaling->stddev(k));
      }
      doc["scaling"] = {{"mean", mean}, {"stddev", stddev}, {"zero_variance", data.scaling->zero_variance}};
    }
    text = doc.dump(2) + "\n";
  } else {
    for (const auto& f : schema.features) text += csv_escape(f.name) + ",";
    text += "label\n";
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      for (Eigen::Index k = 0; k < data.dims(); ++k) text += format_exact(data.vectors(i, k)) + ",";
      text += data.labels(i) > 0 ? "+1\n" : "-1\n";
    }
  }
  if (cfg.out.empty()) out << text;
  else write_text_file(cfg.out, text);
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto schema = load_schema(cfg.schema);
  const auto data = load_labeled(cfg, schema).dataset;
  auto [fit_raw, eval_raw] = split_for_evaluation(data, cfg);
  if (fit_raw.positives() == 0)
    throw Error(ErrorCode::SingleClassDataset,
                "training data has no records labeled '" + schema.label_rule.positive_value + "' (positive class)");
  if (fit_raw.negatives() == 0)
    throw Error(ErrorCode::SingleClassDataset,
                "training data has no records labeled '" + schema.label_rule.negative_value + "' (negative class)");
  const LabeledDataset fit = cfg.standardize ? standardize(fit_raw) : fit_raw;
  const TrainOptions train_opts{cfg.C, cfg.tol, cfg.max_passes};

  Classifier classifier;
  bool converged = true;
  if (cfg.tree) {
    classifier = train_partition_tree(fit, {train_opts, cfg.max_depth, cfg.min_leaf});
  } else {
    SvmModel model = train(fit, train_opts);
    converged = model.training_summary.converged;
    classifier = std::move(model);
  }
  if (!cfg.dual_dump.empty()) {
    const auto problem = qp::QpProblem<double>::from_vectors(fit.vectors, fit.labels, cfg.C);
    write_text_file(cfg.dual_dump, dual_diagnostics(problem, qp::solve_dual(problem, cfg.tol, cfg.max_passes)).dump(2) + "\n");
  }
  save_model(classifier, cfg.model);
  emit_evaluation(summarize(confusion(classifier, eval_raw)), cfg, out);
  if (!converged) {
    err << "error: NonConvergence: solver stopped after " << std::get<SvmModel>(classifier).training_summary.iterations
        << " iterations with KKT violation " << std::get<SvmModel>(classifier).training_summary.kkt_violation
        << " above tol " << cfg.tol << "; the model was written and tagged as non-converged\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const auto classifier = load_model(cfg.model);
  const auto schema = load_schema(cfg.schema);
  const auto data = load_labeled(cfg, schema).dataset;
  if (schema.dims() != classifier_dims(classifier))
    throw Error(ErrorCode::DimensionMismatch, "schema has " + std::to_string(schema.dims()) +
                                                  " features but the model expects " +
                                                  std::to_string(classifier_dims(classifier)));
  const auto eval = split_for_evaluation(data, cfg).second;
  emit_evaluation(summarize(confusion(classifier, eval)), cfg, out);
  return kExitOk;
}

FeatureVector parse_input_vector(std::string text) {
  text.erase(std::remove_if(text.begin(), text.end(), [](char c) { return c == '(' || c == ')' || c == '[' || c == ']'; }),
             text.end());
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto v = parse_number(item);
    if (!v) throw Error(ErrorCode::NonNumericCell, "input component '" + item + "' is not a number");
    values.push_back(*v);
  }
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "input vector is empty");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

int cmd_predict(const RunConfig& cfg, std::ostream& out) {
  const auto classifier = load_model(cfg.model);
  std::vector<FeatureVector> inputs;
  if (!cfg.input.empty()) {
    inputs.push_back(parse_input_vector(cfg.input));
  } else {
    const auto schema = load_schema(cfg.schema);
    const auto table = read_csv(cfg.data);
    const auto records = to_records(table);
    for (std::size_t r = 0; r < records.size(); ++r) {
      try {
        inputs.push_back(encode_record(records[r], schema));
      } catch (const Error& e) {
        throw Error(e.code(), cfg.data + ":" + std::to_string(table.line_numbers[r]) + ": " + e.what(), r);
      }
    }
  }
  json rows = json::array();
  std::string text;
  for (const auto& x : inputs) {
    const int label = classify(classifier, x);
    const double decision = classifier_decision(classifier, x);
    text += label > 0 ? "+1\n" : "-1\n";
    rows.push_back({{"label", label}, {"decision_value", decision}});
  }
  out << text;
  if (!cfg.out.empty()) write_text_file(cfg.out, is_json_path(cfg.out) ? json{{"predictions", rows}}.dump(2) + "\n" : text);
  return kExitOk;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  const auto registry = load_registry(cfg.registry);
  const auto records = to_records(read_csv(cfg.data));
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no records to report on");
  std::string text;
  json reports = json::array();
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto report = diagnose(registry, records[r]);
    if (records.size() > 1) text += "Record " + std::to_string(r + 1) + "\n";
    text += render_report(report);
    reports.push_back(report_to_json(report));
  }
  out << text;
  if (!cfg.out.empty()) {
    if (is_json_path(cfg.out)) write_text_file(cfg.out, json{{"reports", reports}}.dump(2) + "\n");
    else write_text_file(cfg.out, text);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Linear SVM diagnosis of clinical test records", "clindiag"};
  app.require_subcommand(1);

  auto add_hyper = [&](CLI::App* cmd) {
    cmd->add_option("--C", cfg.C, "Box constant C of the soft margin")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", cfg.tol, "KKT tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-passes", cfg.max_passes, "Solver budget in passes over the data")->check(CLI::PositiveNumber);
    cmd->add_option("--max-depth", cfg.max_depth, "Partition tree depth limit")->check(CLI::PositiveNumber);
    cmd->add_option("--min-leaf", cfg.min_leaf, "Smallest side a tree split may leave")->check(CLI::PositiveNumber);
    cmd->add_flag("--standardize", cfg.standardize, "Standardize features before training");
    cmd->add_flag("--tree", cfg.tree, "Train a recursive partition tree");
  };
  auto add_split = [&](CLI::App* cmd) {
    cmd->add_option("--holdout", cfg.holdout, "Held-out fraction for evaluation")->check(CLI::Range(0.0, 0.9));
    cmd->add_option("--seed", cfg.seed, "Random seed");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic two-cluster cohort");
  synth->add_option("--n-per-class", cfg.cohort.n_per_class, "Records per class")->check(CLI::PositiveNumber);
  synth->add_option("--dims", cfg.cohort.dims, "Feature count")->check(CLI::PositiveNumber);
  synth->add_option("--separation", cfg.cohort.separation, "Distance between cluster centres")->check(CLI::PositiveNumber);
  synth->add_option("--overlap", cfg.cohort.overlap, "Fraction drawn from the opposite cluster")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--seed", cfg.seed, "Random seed");
  synth->add_option("--out", cfg.out, "Output CSV (stdout if omitted)");
  synth->add_option("--schema", cfg.schema, "Also write a matching schema here");

  auto* encode = app.add_subcommand("encode", "Encode clinical records as labeled vectors");
  encode->add_option("--data", cfg.data, "Input CSV")->required();
  encode->add_option("--schema", cfg.schema, "Schema JSON")->required();
  encode->add_option("--out", cfg.out, "Output CSV or .json (stdout if omitted)");
  encode->add_flag("--standardize", cfg.standardize, "Standardize features");

  auto* train_cmd = app.add_subcommand("train", "Train a model and evaluate it");
  train_cmd->add_option("--data", cfg.data, "Training CSV")->required();
  train_cmd->add_option("--schema", cfg.schema, "Schema JSON")->required();
  train_cmd->add_option("--model", cfg.model, "Model file to write")->required();
  train_cmd->add_option("--out", cfg.out, "Evaluation output (.json or text)");
  train_cmd->add_option("--dual-dump", cfg.dual_dump, "Write dual solver diagnostics as JSON");
  add_hyper(train_cmd);
  add_split(train_cmd);

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a saved model on labeled data");
  evaluate->add_option("--data", cfg.data, "Labeled CSV")->required();
  evaluate->add_option("--schema", cfg.schema, "Schema JSON")->required();
  evaluate->add_option("--model", cfg.model, "Model file")->required();
  evaluate->add_option("--out", cfg.out, "Evaluation output (.json or text)");
  add_split(evaluate);

  auto* predict_cmd = app.add_subcommand("predict", "Classify vectors or records");
  predict_cmd->add_option("--model", cfg.model, "Model file")->required();
  auto* input_opt = predict_cmd->add_option("--input", cfg.input, "Raw feature vector, e.g. \"(0,3)\"");
  auto* data_opt = predict_cmd->add_option("--data", cfg.data, "CSV of records to classify");
  predict_cmd->add_option("--schema", cfg.schema, "Schema JSON (with --data)");
  predict_cmd->add_option("--out", cfg.out, "Predictions output (.json or text)");
  input_opt->excludes(data_opt);

  auto* report_cmd = app.add_subcommand("report", "Statistical diagnosis across diseases");
  report_cmd->add_option("--registry", cfg.registry, "Registry manifest JSON")->required();
  report_cmd->add_option("--data", cfg.data, "CSV with one or more records")->required();
  report_cmd->add_option("--out", cfg.out, "Report output (.json or text)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (predict_cmd->parsed()) {
      if (cfg.input.empty() && cfg.data.empty()) throw CLI::ValidationError("predict", "one of --input or --data is required");
      if (!cfg.data.empty() && cfg.schema.empty()) throw CLI::ValidationError("predict", "--data needs --schema");
    }
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(cfg, out);
    if (encode->parsed()) return cmd_encode(cfg, out);
    if (train_cmd->parsed()) return cmd_train(cfg, out, err);
    if (evaluate->parsed()) return cmd_evaluate(cfg, out);
    if (predict_cmd->parsed()) return cmd_predict(cfg, out);
    if (report_cmd->parsed()) return cmd_report(cfg, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace clindiag
