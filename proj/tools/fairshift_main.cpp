// fairshift command-line interface.
//
// Subcommands: inspect | train | evaluate | sweep | rrb | reproduce.
// Exit codes: 0 success, 1 runtime failure (single-line JSON on stderr),
// 2 bad flags/usage.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fairshift/experiment.hpp"
#include "fairshift/metrics.hpp"
#include "fairshift/rng.hpp"

namespace fs = fairshift;
using nlohmann::json;

namespace {

std::string default_output_dir() {
  if (const char* env = std::getenv("FAIRSHIFT_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "out";
}

struct CommonOptions {
  std::string config_path;
  std::string schema_path;
  std::vector<std::string> data_paths;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> epsilon;
  std::optional<double> eta;
  std::optional<std::string> output_dir;
  std::optional<std::string> fit_split;
  int workers = 0;
};

fs::ExperimentConfig build_config(const CommonOptions& opts) {
  fs::ExperimentConfig config;
  if (!opts.config_path.empty()) config = fs::ExperimentConfig::from_file(opts.config_path);
  if (!opts.schema_path.empty()) config.schema_path = opts.schema_path;
  if (!opts.data_paths.empty()) config.data_paths = opts.data_paths;
  if (opts.seed) config.master_seed = *opts.seed;
  if (opts.trials) config.trials = *opts.trials;
  if (opts.epsilon) config.sdb_epsilon = *opts.epsilon;
  if (opts.eta) config.rrb_eta = *opts.eta;
  if (opts.output_dir) {
    config.output_dir = *opts.output_dir;
  } else if (config.output_dir == ".") {
    config.output_dir = default_output_dir();
  }
  if (opts.fit_split) {
    config.sdb_fit_split =
        *opts.fit_split == "train" ? fs::FitSplit::Train : fs::FitSplit::ModelSelect;
  }
  if (opts.workers > 0) config.workers = opts.workers;
  if (config.data_paths.empty()) throw fs::Error("no data files given (use --data or a config)");
  return config;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_config = true) {
  if (with_config) cmd->add_option("--config", opts.config_path, "experiment config file");
  cmd->add_option("--schema", opts.schema_path, "dataset schema file");
  cmd->add_option("--data", opts.data_paths, "data file (repeatable)");
  cmd->add_option("--seed", opts.seed, "master seed");
  cmd->add_option("--trials", opts.trials, "number of trials");
  cmd->add_option("--epsilon", opts.epsilon, "SDB bias tolerance");
  cmd->add_option("--eta", opts.eta, "RRB flip rate");
  cmd->add_option("--output-dir", opts.output_dir, "output directory");
  cmd->add_option("--fit-split", opts.fit_split, "split for fitting lambda/p: train|model_select")
      ->check(CLI::IsMember({"train", "model_select"}));
  cmd->add_option("--workers", opts.workers, "worker threads (1 = serial)");
}

int cmd_inspect(const CommonOptions& opts, const std::string& policy) {
  auto schema = fs::DatasetSchema::load_file(opts.schema_path);
  if (policy == "drop") schema.missing_policy = fs::MissingPolicy::Drop;
  if (policy == "impute") schema.missing_policy = fs::MissingPolicy::Impute;
  const auto loaded = fs::load_dataset(opts.data_paths, schema);
  const auto& ds = loaded.data;
  const long prot = ds.protected_count();
  const long pos = ds.positive_count();
  std::vector<int> labels = ds.labels;
  const double bias = fs::signed_bias(labels, ds.protected_mask);
  std::cout << "rows_read = " << loaded.stats.rows_read << "\n"
            << "rows_dropped = " << loaded.stats.rows_dropped << "\n"
            << "cells_imputed = " << loaded.stats.cells_imputed << "\n"
            << "n = " << ds.n() << "\n"
            << "encoded_features = " << ds.dim() << "\n"
            << "protected_count = " << prot << "\n"
            << "protected_fraction = " << fs::format_double(double(prot) / ds.n()) << "\n"
            << "positive_count = " << pos << "\n"
            << "positive_fraction = " << fs::format_double(double(pos) / ds.n()) << "\n"
            << "dataset_bias = " << fs::format_double(bias) << "\n";
  return 0;
}

struct TrainedArtifacts {
  fs::LoadResult loaded;
  fs::SplitTriple triple;
  std::shared_ptr<const fs::ConfidenceModel> model;
  std::uint64_t pipeline_seed = 0;
};

TrainedArtifacts train_for_cli(const fs::ExperimentConfig& config, fs::LearnerKind learner,
                               int trial) {
  TrainedArtifacts art;
  art.loaded = fs::load_dataset(config.data_paths, config.schema());
  const std::uint64_t trial_seed = fs::derive_seed(config.master_seed, fs::Stream::Trial, trial);
  art.triple = fs::split(art.loaded.data, config.ratios, fs::derive_seed(trial_seed, fs::Stream::Split));
  art.pipeline_seed = fs::derive_seed(trial_seed, fs::Stream::Pipeline);
  const fs::Dataset& fit = config.sdb_fit_split == fs::FitSplit::Train ? art.triple.train
                                                                       : art.triple.model_select;
  art.model = fs::train_trial_model(config, learner, art.triple.train, fit, art.pipeline_seed);
  return art;
}

int cmd_train(const CommonOptions& opts, const std::string& learner_name,
              const std::string& method_name, int trial, const std::string& out_path) {
  const auto config = build_config(opts);
  const auto learner = fs::learner_from_string(learner_name);
  auto art = train_for_cli(config, learner, trial);
  const fs::Dataset& fit = config.sdb_fit_split == fs::FitSplit::Train ? art.triple.train
                                                                       : art.triple.model_select;

  fs::FairnessAttachment attachment;
  attachment.method = method_name;
  if (method_name == "sdb") {
    const auto confs = art.model->confidences(fit.x);
    const auto sdb = fs::fit_sdb(confs, fit.labels, fit.protected_mask, config.sdb_epsilon);
    attachment.lambda = sdb.lambda;
    attachment.shift_complement = sdb.swapped;
    std::cout << "lambda = " << fs::format_double(sdb.lambda)
              << (sdb.feasible ? "" : "  (bias constraint infeasible; closest-parity shift)")
              << "\n";
  } else if (method_name == "rr") {
    attachment.flip_p = fs::fit_rr(art.model->predict(fit.x), fit.protected_mask);
    attachment.rr_seed = fs::derive_seed(art.pipeline_seed, fs::Stream::RrApply,
                                         static_cast<int>(learner));
    std::cout << "flip_p = " << fs::format_double(attachment.flip_p) << "\n";
  } else if (method_name != "none") {
    throw fs::Error("train: method must be none, sdb or rr (rm/fwl are training-time g" \
                    "rid methods; use rrb/reproduce)");
  }

  fs::ModelDocument doc{*art.model, art.loaded.fitted_schema, art.triple.standardizer,
                        art.triple.train.features, attachment, fs::Provenance{}};
  doc.provenance.config = config.canonical();
  doc.provenance.config_hash = fs::fnv1a64(doc.provenance.config);
  doc.provenance.master_seed = config.master_seed;
  doc.provenance.trial = trial;
  doc.save(out_path);
  const auto test_preds = art.model->predict(art.triple.test.x);
  std::cout << "model = " << out_path << "\n"
            << "test_error = " << fs::format_double(fs::label_error(test_preds, art.triple.test.labels))
            << "\n"
            << "test_bias = "
            << fs::format_double(fs::signed_bias(test_preds, art.triple.test.protected_mask)) << "\n";
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::vector<std::string>& data_paths,
                 const std::string& histogram_path) {
  auto doc = fs::ModelDocument::load(model_path);
  auto loaded = fs::load_dataset(data_paths, doc.schema);
  fs::Dataset ds = std::move(loaded.data);
  if (ds.dim() != static_cast<int>(doc.features.size())) {
    throw fs::Error("evaluate: data encodes to " + std::to_string(ds.dim()) +
                    " features but the model expects " + std::to_string(doc.features.size()));
  }
  doc.standardizer.apply(ds.x);

  std::vector<int> preds;
  const auto confs = doc.model.confidences(ds.x);
  if (doc.fairness.method == "sdb") {
    auto mask = ds.protected_mask;
    if (doc.fairness.shift_complement) {
      for (auto& m : mask) m = m ? 0 : 1;
    }
    preds = fs::shift_predictions(confs, mask, doc.fairness.lambda);
  } else {
    preds.resize(confs.size());
    for (std::size_t i = 0; i < confs.size(); ++i) preds[i] = fs::predict_from_confidence(confs[i]);
    if (doc.fairness.method == "rr") {
      preds = fs::rr_flip(preds, ds.protected_mask, doc.fairness.flip_p, doc.fairness.rr_seed);
    }
  }

  long prot = 0, comp = 0, prot_pos = 0, comp_pos = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (ds.protected_mask[i]) {
      ++prot;
      prot_pos += preds[i] == +1;
    } else {
      ++comp;
      comp_pos += preds[i] == +1;
    }
  }
  json out;
  out["n"] = ds.n();
  out["protected_count"] = prot;
  out["error"] = fs::label_error(preds, ds.labels);
  out["bias"] = fs::signed_bias(preds, ds.protected_mask);
  out["positive_rate_protected"] = prot > 0 ? double(prot_pos) / prot : 0.0;
  out["positive_rate_complement"] = comp > 0 ? double(comp_pos) / comp : 0.0;
  out["method"] = doc.fairness.method;
  std::cout << out.dump() << "\n";

  if (!histogram_path.empty()) {
    const auto hist = fs::margin_histogram(confs, ds.labels);
    fs::CsvTable csv;
    csv.header = {"bin_left", "count", "mislabeled_count"};
    for (std::size_t b = 0; b < hist.bin_left.size(); ++b) {
      csv.rows.push_back({fs::format_double(hist.bin_left[b]), std::to_string(hist.count[b]),
                          std::to_string(hist.mislabeled[b])});
    }
    csv.save(histogram_path);
    std::cout << "histogram = " << histogram_path << "\n";
  }
  return 0;
}

int cmd_sweep(const CommonOptions& opts, const std::string& model_path,
              const std::string& learner_name, int trial, const std::string& grid_spec,
              const std::string& eval_split, const std::string& out_path) {
  std::vector<double> grid;
  if (!grid_spec.empty() && grid_spec != "auto") {
    std::istringstream in(grid_spec);
    double v;
    while (in >> v) grid.push_back(v);
    if (grid.empty()) throw fs::Error("sweep: could not parse --grid");
  }

  fs::TradeoffCurve curve;
  json manifest;
  if (!model_path.empty()) {
    // Sweep a saved model over a whole data file.
    const auto doc = fs::ModelDocument::load(model_path);
    if (opts.data_paths.empty()) throw fs::Error("sweep: --model needs --data");
    auto loaded = fs::load_dataset(opts.data_paths, doc.schema);
    fs::Dataset eval = std::move(loaded.data);
    doc.standardizer.apply(eval.x);
    curve = fs::sweep_lambda(doc.model, eval, grid);
    manifest["model"] = model_path;
    manifest["model_config_hash"] = doc.provenance.config_hash;
  } else {
    const auto config = build_config(opts);
    const auto learner = fs::learner_from_string(learner_name);
    auto art = train_for_cli(config, learner, trial);
    const fs::Dataset& eval =
        eval_split == "model_select" ? art.triple.model_select : art.triple.test;
    curve = fs::sweep_lambda(*art.model, eval, grid);
    manifest["config"] = config.canonical();
    manifest["config_hash"] = fs::fnv1a64(config.canonical());
    manifest["learner"] = learner_name;
    manifest["trial"] = trial;
    manifest["eval_split"] = eval_split;
  }
  curve.to_csv().save(out_path);
  manifest["grid"] = grid_spec;
  fs::write_text_file(out_path + ".manifest.json", manifest.dump(2) + "\n");

  std::cout << "curve = " << out_path << " (" << curve.points.size() << " rows)\n";
  return 0;
}

int cmd_rrb(const CommonOptions& opts, std::optional<int> rrb_trials) {
  auto config = build_config(opts);
  config.rrb_enabled = true;
  if (rrb_trials) config.rrb_trials = *rrb_trials;
  if (opts.eta) config.rrb_eta = *opts.eta;
  const auto table = fs::run_experiment(config);
  std::vector<std::string> files;
  fs::write_experiment_outputs(config, table, config.run_name, &files);
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
  for (const auto& cell : table.cells) {
    if (!cell.has_rrb) continue;
    std::cout << fs::to_string(cell.learner) << "/" << fs::to_string(cell.method)
              << ": rrb = " << fs::format_double(cell.rrb.mean) << " ("
              << fs::format_double(cell.rrb.stddev) << ")\n";
  }
  return 0;
}

int cmd_reproduce(const std::string& dataset, const fs::ReproduceOptions& options) {
  const auto result = fs::reproduce_table(dataset, options);
  for (const auto& f : result.written_files) std::cout << "wrote " << f << "\n";
  std::cout << "learner,method,metric,measured,reference,abs_delta\n";
  for (const auto& row : result.comparison) {
    std::cout << row.learner << "," << row.method << "," << row.metric << ","
              << fs::format_double(row.measured_mean) << "," << fs::format_double(row.reference_mean)
              << "," << fs::format_double(row.abs_delta) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairness-aware training, boundary-shift post-processing and bias-resilience "
               "evaluation"};
  app.require_subcommand(1);
  int verbosity = 1;
  app.add_option("-v,--verbosity", verbosity, "0 errors, 1 warnings, 2 progress");
  const auto with_fallthrough = [](CLI::App* sub) {
    sub->fallthrough();  // global flags may follow the subcommand
    return sub;
  };

  CommonOptions inspect_opts;
  std::string inspect_policy;
  auto* inspect = with_fallthrough(app.add_subcommand("inspect", "load a dataset and print its statistics"));
  inspect->add_option("--schema", inspect_opts.schema_path, "dataset schema file")->required();
  inspect->add_option("--data", inspect_opts.data_paths, "data file (repeatable)")->required();
  inspect->add_option("--missing-policy", inspect_policy, "override: drop|impute")
      ->check(CLI::IsMember({"drop", "impute"}));

  CommonOptions train_opts;
  std::string train_learner = "boost", train_method = "none", train_out = "model.json";
  int train_trial = 0;
  auto* train = with_fallthrough(app.add_subcommand("train", "train one model and write a model document"));
  add_common(train, train_opts);
  train->add_option("--learner", train_learner, "boost|svm|logreg")->required();
  train->add_option("--method", train_method, "none|sdb|rr (fitted parameters embed in the model)");
  train->add_option("--trial", train_trial, "trial index for seed derivation");
  train->add_option("--out", train_out, "model document path")->required();

  std::string eval_model, eval_histogram;
  std::vector<std::string> eval_data;
  auto* evaluate = with_fallthrough(app.add_subcommand("evaluate", "evaluate a model document on a data file"));
  evaluate->add_option("--model", eval_model, "model document path")->required();
  evaluate->add_option("--data", eval_data, "data file (repeatable)")->required();
  evaluate->add_option("--histogram", eval_histogram, "write confidence histogram CSV here");

  CommonOptions sweep_opts;
  std::string sweep_learner = "boost", sweep_grid = "auto", sweep_eval = "test",
              sweep_out = "curve.csv";
  int sweep_trial = 0;
  auto* sweep = with_fallthrough(app.add_subcommand("sweep", "trade-off curve: shift lambda vs bias and error"));
  add_common(sweep, sweep_opts);
  std::string sweep_model;
  sweep->add_option("--model", sweep_model, "sweep a saved model document over --data");
  sweep->add_option("--learner", sweep_learner, "boost|svm|logreg");
  sweep->add_option("--grid", sweep_grid, "'auto' or space-separated shifts");
  sweep->add_option("--eval-split", sweep_eval, "test|model_select")
      ->check(CLI::IsMember({"test", "model_select"}));
  sweep->add_option("--trial", sweep_trial, "trial index for seed derivation");
  sweep->add_option("--out", sweep_out, "curve CSV path")->required();

  CommonOptions rrb_opts;
  std::optional<int> rrb_trials;
  auto* rrb = with_fallthrough(app.add_subcommand("rrb", "run the experiment grid with RRB estimation"));
  add_common(rrb, rrb_opts);
  rrb->add_option("--rrb-trials", rrb_trials, "bias-injection trials");

  std::string repro_dataset;
  fs::ReproduceOptions repro;
  std::uint64_t repro_seed = 0;
  bool repro_seed_set = false, repro_no_rrb = false;
  int repro_trials = 0, repro_rrb_trials = 0;
  auto* reproduce = with_fallthrough(app.add_subcommand("reproduce", "reproduce the published result tables"));
  reproduce->add_option("dataset", repro_dataset, "census|german|singles")->required();
  reproduce->add_option("--data-dir", repro.data_dir, "directory with the raw data files");
  reproduce->add_option("--output-dir", repro.output_dir, "output directory");
  reproduce->add_option("--seed", repro_seed, "master seed")->each([&](const std::string&) {
    repro_seed_set = true;
  });
  reproduce->add_option("--trials", repro_trials, "trial count override");
  reproduce->add_option("--rrb-trials", repro_rrb_trials, "RRB trial count override");
  reproduce->add_flag("--no-rrb", repro_no_rrb, "skip the RRB pass");
  reproduce->add_option("--workers", repro.workers, "worker threads (1 = serial)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  fairshift::set_verbosity(verbosity);

  try {
    if (inspect->parsed()) {
      return cmd_inspect(inspect_opts, inspect_policy);
    }
    if (train->parsed()) {
      return cmd_train(train_opts, train_learner, train_method, train_trial, train_out);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_model, eval_data, eval_histogram);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_opts, sweep_model, sweep_learner, sweep_trial, sweep_grid,
                       sweep_eval, sweep_out);
    }
    if (rrb->parsed()) {
      return cmd_rrb(rrb_opts, rrb_trials);
    }
    if (reproduce->parsed()) {
      if (repro_seed_set) repro.master_seed = repro_seed;
      if (repro_trials > 0) repro.trials = repro_trials;
      if (repro_rrb_trials > 0) repro.rrb_trials = repro_rrb_trials;
      repro.rrb = !repro_no_rrb;
      return cmd_reproduce(repro_dataset, repro);
    }
    throw fs::Error("no subcommand");
  } catch (const std::exception& e) {
    json err;
    err["error"] = e.what();
    err["command"] = app.get_subcommands().empty() ? "" : app.get_subcommands()[0]->get_name();
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
