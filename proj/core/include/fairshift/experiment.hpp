#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fairshift/fairness.hpp"
#include "fairshift/model.hpp"
#include "fairshift/report.hpp"
#include "fairshift/rrb.hpp"

namespace fairshift {

enum class FairnessMethod { None, Sdb, Rr, Rm, Fwl };
std::string to_string(FairnessMethod m);
FairnessMethod method_from_string(const std::string& name);

enum class FitSplit { Train, ModelSelect };

struct LearnerSettings {
  BoostConfig boost;
  double fwl_bias_weight = 1.0;
  SvmConfig svm;
  bool svm_rescale = false;  // divide SVM confidences by max |conf| on the fit split
  LogRegConfig logreg;
};

struct ExperimentConfig {
  std::string schema_path;
  std::string schema_text;  // used when schema_path is empty (embedded schemas)
  std::vector<std::string> data_paths;
  std::array<double, 3> ratios{0.5, 0.25, 0.25};
  std::uint64_t master_seed = 1;
  int trials = 10;
  std::vector<LearnerKind> learners{LearnerKind::Boost, LearnerKind::Svm, LearnerKind::LogReg};
  std::vector<FairnessMethod> methods{FairnessMethod::None, FairnessMethod::Sdb,
                                      FairnessMethod::Rr, FairnessMethod::Rm};
  LearnerSettings settings;
  double sdb_epsilon = 0.0;
  FitSplit sdb_fit_split = FitSplit::ModelSelect;
  bool rrb_enabled = false;
  double rrb_eta = 0.2;
  int rrb_trials = 10;
  std::string output_dir = ".";
  std::string run_name = "experiment";
  int workers = 0;  // 0 = hardware concurrency; 1 = serial

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  void apply_line(const std::string& key, const std::string& value);
  /// Canonical key-value dump; parse(canonical()) round-trips, and its
  /// fnv1a64 hash fingerprints the run in manifests.
  std::string canonical() const;
  DatasetSchema schema() const;
};

struct MetricAgg {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> raw;  // per trial; NaN for failed trials
  void finalize();          // compute mean/stddev over non-NaN entries
};

struct CellResult {
  LearnerKind learner{};
  FairnessMethod method{};
  MetricAgg error, bias;
  MetricAgg rrb;
  bool has_rrb = false;
  MetricAgg lambda;  // SDB cells
  bool has_lambda = false;
  MetricAgg flip_p;  // RR / RM cells
  bool has_flip_p = false;
  int failed_trials = 0;
  std::string first_failure;
};

struct ResultTable {
  std::vector<CellResult> cells;
  int trials = 0;
  int rrb_trials = 0;
  bool rrb_enabled = false;

  const CellResult* find(LearnerKind l, FairnessMethod m) const;
  CsvTable to_csv() const;
};

struct TradeoffPoint {
  double lambda = 0.0;
  double bias = 0.0;
  double error = 0.0;
};

struct TradeoffCurve {
  std::vector<TradeoffPoint> points;  // lambda strictly increasing
  CsvTable to_csv() const;
};

ResultTable run_experiment(const ExperimentConfig& config);

/// Sweeps the boundary shift over `grid` (empty = automatic: 0 plus every
/// candidate midpoint shift derived from the eval split's protected negative
/// confidences) and reports (lambda, signed bias, error) on the eval split.
/// Throws if the emitted bias column is not non-increasing.
TradeoffCurve sweep_lambda(const ConfidenceModel& model, const Dataset& eval,
                           const std::vector<double>& grid = {});

/// Everything run_experiment needs to train one (learner, method) cell and
/// predict; shared by the harness and by rrb pipelines so both routes are
/// bitwise identical. `train` and `fit_split` must outlive the returned
/// Predictor.
Predictor make_cell_predictor(LearnerKind learner, FairnessMethod method,
                              const ExperimentConfig& config, const Dataset& train,
                              const Dataset& fit_split, std::uint64_t pipeline_seed);

/// Trains a cell's base learner exactly as run_experiment would with the
/// same seeds; used for post-run diagnostics (sweeps, histograms) and the
/// CLI's train subcommand.
std::shared_ptr<const ConfidenceModel> train_trial_model(const ExperimentConfig& config,
                                                         LearnerKind learner, const Dataset& train,
                                                         const Dataset& fit_split,
                                                         std::uint64_t pipeline_seed);

struct ReproduceOptions {
  std::string data_dir;    // empty: $FAIRSHIFT_DATA_DIR, then ./data
  std::string output_dir;  // empty: config default
  std::optional<std::uint64_t> master_seed;
  std::optional<int> trials;
  std::optional<int> rrb_trials;
  bool rrb = true;
  int workers = 0;
};

struct ComparisonRow {
  std::string learner, method, metric;
  double measured_mean = 0.0, measured_stddev = 0.0;
  double reference_mean = 0.0, reference_stddev = 0.0;
  double abs_delta = 0.0;
};

struct ReproduceResult {
  ResultTable table;
  std::vector<ComparisonRow> comparison;
  std::vector<std::string> written_files;
  ExperimentConfig config;
};

/// Builds the paper-matching configuration for a named dataset (census,
/// german or singles: T=20 boosting, linear kernel for german and gaussian
/// otherwise, SDB fitted on the train split with epsilon = 0, 10 trials,
/// RRB at eta = 0.2), runs it, and writes result/comparison/curve/histogram
/// CSVs plus a JSON manifest into the output directory.
ReproduceResult reproduce_table(const std::string& dataset, const ReproduceOptions& options = {});

/// The packaged schema text for census | german | singles.
const std::string& packaged_schema(const std::string& dataset);

/// Reference result for (dataset, learner, method, metric) from the published
/// experiment tables; metric is error | bias | rrb. Bias references are
/// unsigned. Returns nullptr when not tabulated.
const std::pair<double, double>* reference_value(const std::string& dataset, LearnerKind learner,
                                                 FairnessMethod method, const std::string& metric);

void write_experiment_outputs(const ExperimentConfig& config, const ResultTable& table,
                              const std::string& dataset_tag,
                              std::vector<std::string>* written_files);

/// Runs fn(0..tasks-1) on `workers` threads (<=1 means the calling thread).
/// Tasks must write to disjoint slots; the first exception is rethrown.
void parallel_for(int tasks, int workers, const std::function<void(int)>& fn);

}  // namespace fairshift
