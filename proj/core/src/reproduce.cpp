#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairshift/experiment.hpp"
#include "fairshift/metrics.hpp"
#include "fairshift/rng.hpp"

namespace fairshift {

namespace {

const std::string kAdultSchema = R"(# Census Income (adult.data + adult.test)
delimiter = comma
comment_prefix = |
missing_token = ?
missing_policy = impute
label_column = income
positive_label = >50K
negative_label = <=50K
label_strip_suffix = .
protected_column = sex
protected_value = Female
column = age numeric
column = workclass categorical
column = fnlwgt numeric
column = education categorical
column = education_num numeric
column = marital_status categorical
column = occupation categorical
column = relationship categorical
column = race categorical
column = sex categorical
column = capital_gain numeric
column = capital_loss numeric
column = hours_per_week numeric
column = native_country categorical
column = income categorical
)";

const std::string kGermanSchema = R"(# German credit (german.data, space separated, coded tokens)
delimiter = whitespace
label_column = credit_risk
positive_label = 1
negative_label = 2
protected_column = age
protected_less_than = 25
column = checking_status categorical
column = duration numeric
column = credit_history categorical
column = purpose categorical
column = credit_amount numeric
column = savings categorical
column = employment_since categorical
column = installment_rate numeric
column = personal_status categorical
column = other_debtors categorical
column = residence_since numeric
column = property categorical
column = age numeric
column = other_installment categorical
column = housing categorical
column = existing_credits numeric
column = job categorical
column = liable_people numeric
column = telephone categorical
column = foreign_worker categorical
column = credit_risk categorical
)";

const std::string kSinglesSchema = R"(# Singles (prepared extract of the marketing survey; see README)
delimiter = comma
label_column = income
positive_label = >25K
negative_label = <=25K
protected_column = sex
protected_value = 2
column = sex categorical
column = age categorical
column = education categorical
column = occupation categorical
column = years_in_area categorical
column = dual_incomes categorical
column = persons_in_household categorical
column = persons_under_18 categorical
column = householder_status categorical
column = type_of_home categorical
column = ethnic_class categorical
column = language categorical
column = income categorical
)";

struct Ref {
  double error_mean, error_std;
  double bias_mean, bias_std;
  double rrb_mean, rrb_std;
};

// Published experiment tables (biases unsigned). Keyed by learner|method.
const std::map<std::string, Ref> kCensusRef = {
    {"svm|none", {0.1471, 5.7e-17, 0.1689, 5.7e-17, 0.2702, 0.014}},
    {"svm|rr", {0.2007, 0.002, 0.0050, 0.003, 0.2926, 0.004}},
    {"svm|sdb", {0.1869, 0.004, 0.0036, 0.009, 0.3172, 0.025}},
    {"svm|rm", {0.1740, 0.003, 0.0795, 0.010, 0.2545, 0.007}},
    {"logreg|none", {0.1478, 4.8e-4, 0.1968, 0.003, 0.4647, 0.013}},
    {"logreg|rr", {0.2077, 0.004, 0.0044, 0.006, 0.4696, 0.009}},
    {"logreg|sdb", {0.1802, 0.002, 0.0060, 0.011, 0.5402, 0.011}},
    {"logreg|rm", {0.1810, 0.003, 0.0262, 0.008, 0.4282, 0.019}},
    {"boost|none", {0.1529, 0.002, 0.1856, 0.012, 0.4372, 0.032}},
    {"boost|rr", {0.2078, 0.004, 0.0091, 0.006, 0.4661, 0.019}},
    {"boost|sdb", {0.1822, 0.005, 0.0013, 0.007, 0.5461, 0.015}},
    {"boost|rm", {0.1864, 0.004, 0.0381, 0.013, 0.4410, 0.013}},
    {"boost|fwl", {0.1860, 0.004, 0.0682, 0.004, 0.4321, 0.016}},
};

const std::map<std::string, Ref> kGermanRef = {
    {"svm|none", {0.2823, 0.0, 0.0886, 4.2e-17, 0.6756, 0.081}},
    {"svm|rr", {0.2778, 0.025, 0.0732, 0.066, 0.7827, 0.054}},
    {"svm|sdb", {0.2979, 0.022, 0.0266, 0.085, 0.8619, 0.041}},
    {"svm|rm", {0.3000, 0.017, 0.0445, 0.028, 0.6232, 0.070}},
    {"logreg|none", {0.2541, 0.005, 0.1383, 0.014, 0.3070, 0.067}},
    {"logreg|rr", {0.2656, 0.020, 0.0095, 0.064, 0.8564, 0.045}},
    {"logreg|sdb", {0.2685, 0.021, 0.0142, 0.219, 0.8687, 0.042}},
    {"logreg|rm", {0.2625, 0.011, 0.0202, 0.566, 0.6741, 0.045}},
    {"boost|none", {0.2602, 0.009, 0.2617, 0.272, 0.6774, 0.219}},
    {"boost|rr", {0.2429, 0.010, 0.0376, 0.044, 0.8629, 0.051}},
    {"boost|sdb", {0.2745, 0.010, 0.0034, 0.064, 0.8596, 0.067}},
    {"boost|rm", {0.2637, 0.019, 0.0391, 0.023, 0.6965, 0.037}},
    {"boost|fwl", {0.2859, 0.016, 0.0093, 0.035, 0.6879, 0.042}},
};

const std::map<std::string, Ref> kSinglesRef = {
    {"svm|none", {0.2718, 5.7e-17, 0.0550, 1.4e-17, 0.2424, 0.045}},
    {"svm|rr", {0.2793, 0.009, 0.1460, 0.017, 0.2588, 0.009}},
    {"svm|sdb", {0.2716, 0.013, 0.0106, 0.035, 0.3064, 0.042}},
    {"svm|rm", {0.2876, 0.015, 0.0260, 0.047, 0.2552, 0.032}},
    {"logreg|none", {0.2742, 1.14e-16, 0.1468, 9.99e-18, 0.1971, 0.036}},
    {"logreg|rr", {0.3130, 0.011, 0.3025, 0.040, 0.3213, 0.035}},
    {"logreg|sdb", {0.2745, 0.010, 0.0034, 0.640, 0.8596, 0.067}},
    {"logreg|rm", {0.2966, 0.008, 0.0732, 0.024, 0.2117, 0.036}},
    {"boost|none", {0.2690, 0.004, 0.0966, 0.020, 0.2864, 0.057}},
    {"boost|rr", {0.3088, 0.009, 0.2123, 0.013, 0.3996, 0.105}},
    {"boost|sdb", {0.2990, 0.008, 0.0140, 0.017, 0.4027, 0.061}},
    {"boost|rm", {0.2860, 0.019, 0.0180, 0.037, 0.3325, 0.060}},
    {"boost|fwl", {0.2687, 0.008, 0.0463, 0.016, 0.2971, 0.028}},
};

const std::map<std::string, Ref>* reference_table(const std::string& dataset) {
  if (dataset == "census") return &kCensusRef;
  if (dataset == "german") return &kGermanRef;
  if (dataset == "singles") return &kSinglesRef;
  return nullptr;
}

std::string resolve_data_dir(const std::string& requested) {
  if (!requested.empty()) return requested;
  if (const char* env = std::getenv("FAIRSHIFT_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "data";
}

struct DatasetFiles {
  std::vector<std::string> files;
  std::string instructions;
};

DatasetFiles dataset_files(const std::string& dataset, const std::string& data_dir) {
  DatasetFiles out;
  if (dataset == "census") {
    out.files = {data_dir + "/adult.data", data_dir + "/adult.test"};
    out.instructions =
        "download adult.data and adult.test from "
        "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/ into " + data_dir;
  } else if (dataset == "german") {
    out.files = {data_dir + "/german.data"};
    out.instructions =
        "download german.data from "
        "https://archive.ics.uci.edu/ml/machine-learning-databases/statlog/german/ into " + data_dir;
  } else if (dataset == "singles") {
    out.files = {data_dir + "/singles.csv"};
    out.instructions =
        "prepare singles.csv from the marketing survey data as described in the README and place "
        "it in " + data_dir;
  } else {
    throw Error("unknown dataset '" + dataset + "' (expected census, german or singles)");
  }
  return out;
}

}  // namespace

const std::string& packaged_schema(const std::string& dataset) {
  if (dataset == "census") return kAdultSchema;
  if (dataset == "german") return kGermanSchema;
  if (dataset == "singles") return kSinglesSchema;
  throw Error("unknown dataset '" + dataset + "' (expected census, german or singles)");
}

const std::pair<double, double>* reference_value(const std::string& dataset, LearnerKind learner,
                                                 FairnessMethod method, const std::string& metric) {
  const auto* table = reference_table(dataset);
  if (table == nullptr) return nullptr;
  const auto it = table->find(to_string(learner) + "|" + to_string(method));
  if (it == table->end()) return nullptr;
  thread_local std::pair<double, double> slot;
  if (metric == "error") {
    slot = {it->second.error_mean, it->second.error_std};
  } else if (metric == "bias") {
    slot = {it->second.bias_mean, it->second.bias_std};
  } else if (metric == "rrb") {
    slot = {it->second.rrb_mean, it->second.rrb_std};
  } else {
    return nullptr;
  }
  return &slot;
}

void write_experiment_outputs(const ExperimentConfig& config, const ResultTable& table,
                              const std::string& dataset_tag,
                              std::vector<std::string>* written_files) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  const std::string results_path = config.output_dir + "/results_" + dataset_tag + ".csv";
  table.to_csv().save(results_path);
  if (written_files) written_files->push_back(results_path);

  nlohmann::json manifest;
  const std::string canonical = config.canonical();
  manifest["run"] = dataset_tag;
  manifest["toolkit_version"] = "0.1.0";
  manifest["csv_format_version"] = 1;
  manifest["config"] = canonical;
  std::ostringstream hash_hex;
  hash_hex << std::hex << fnv1a64(canonical);
  manifest["config_hash"] = hash_hex.str();
  manifest["master_seed"] = config.master_seed;
  nlohmann::json trial_seeds = nlohmann::json::array();
  for (int t = 0; t < config.trials; ++t) {
    trial_seeds.push_back(derive_seed(config.master_seed, Stream::Trial, t));
  }
  manifest["trial_seeds"] = std::move(trial_seeds);
  if (config.rrb_enabled) {
    nlohmann::json rrb_seeds = nlohmann::json::array();
    for (int t = 0; t < config.rrb_trials; ++t) {
      rrb_seeds.push_back(derive_seed(config.master_seed, Stream::RrbTrial, t));
    }
    manifest["rrb_trial_seeds"] = std::move(rrb_seeds);
  }
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& cell : table.cells) {
    if (cell.failed_trials > 0) {
      failures.push_back({{"learner", to_string(cell.learner)},
                          {"method", to_string(cell.method)},
                          {"failed_trials", cell.failed_trials},
                          {"first_failure", cell.first_failure}});
    }
  }
  manifest["failures"] = std::move(failures);

  const std::string manifest_path = config.output_dir + "/manifest_" + dataset_tag + ".json";
  write_text_file(manifest_path, manifest.dump(2) + "\n");
  if (written_files) written_files->push_back(manifest_path);
}

ReproduceResult reproduce_table(const std::string& dataset, const ReproduceOptions& options) {
  namespace fs = std::filesystem;
  const std::string data_dir = resolve_data_dir(options.data_dir);
  const auto files = dataset_files(dataset, data_dir);
  for (const auto& f : files.files) {
    if (!fs::exists(f)) {
      throw Error("missing data file: " + f + "; " + files.instructions);
    }
  }

  ExperimentConfig config;
  config.schema_text = packaged_schema(dataset);
  config.data_paths = files.files;
  config.run_name = dataset;
  config.trials = options.trials.value_or(10);
  config.master_seed = options.master_seed.value_or(1);
  config.methods = {FairnessMethod::None, FairnessMethod::Sdb, FairnessMethod::Rr,
                    FairnessMethod::Rm, FairnessMethod::Fwl};
  config.settings.boost.rounds = 20;
  config.settings.svm.kernel.kind =
      dataset == "german" ? KernelSpec::Kind::Linear : KernelSpec::Kind::Gaussian;
  config.sdb_fit_split = FitSplit::Train;  // the published tables fit the shift on train
  config.sdb_epsilon = 0.0;
  config.rrb_enabled = options.rrb;
  config.rrb_eta = 0.2;
  config.rrb_trials = options.rrb_trials.value_or(10);
  config.workers = options.workers;
  if (!options.output_dir.empty()) {
    config.output_dir = options.output_dir;
  } else if (const char* env = std::getenv("FAIRSHIFT_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    config.output_dir = env;
  } else {
    config.output_dir = "out";
  }

  ReproduceResult result;
  result.config = config;
  result.table = run_experiment(config);
  write_experiment_outputs(config, result.table, dataset, &result.written_files);

  // Comparison against the published numbers. Measured biases are signed;
  // the references are unsigned, so the comparison uses |measured|.
  for (const auto& cell : result.table.cells) {
    for (const std::string metric : {"error", "bias", "rrb"}) {
      if (metric == "rrb" && !cell.has_rrb) continue;
      const auto* ref = reference_value(dataset, cell.learner, cell.method, metric);
      if (ref == nullptr) continue;
      const MetricAgg& agg =
          metric == "error" ? cell.error : (metric == "bias" ? cell.bias : cell.rrb);
      ComparisonRow row;
      row.learner = to_string(cell.learner);
      row.method = to_string(cell.method);
      row.metric = metric;
      row.measured_mean = metric == "bias" ? std::abs(agg.mean) : agg.mean;
      row.measured_stddev = agg.stddev;
      row.reference_mean = ref->first;
      row.reference_stddev = ref->second;
      row.abs_delta = std::abs(row.measured_mean - row.reference_mean);
      result.comparison.push_back(row);
    }
  }
  CsvTable cmp;
  cmp.header = {"learner",       "method",        "metric",           "measured_mean",
                "measured_stddev", "reference_mean", "reference_stddev", "abs_delta"};
  for (const auto& row : result.comparison) {
    cmp.rows.push_back({row.learner, row.method, row.metric, format_double(row.measured_mean),
                        format_double(row.measured_stddev), format_double(row.reference_mean),
                        format_double(row.reference_stddev), format_double(row.abs_delta)});
  }
  const std::string cmp_path = config.output_dir + "/comparison_" + dataset + ".csv";
  cmp.save(cmp_path);
  result.written_files.push_back(cmp_path);

  // Trial-0 diagnostics: trade-off curves per learner and the boosting
  // confidence histogram on the test split.
  {
    const auto loaded = load_dataset(config.data_paths, config.schema());
    const std::uint64_t trial_seed = derive_seed(config.master_seed, Stream::Trial, 0);
    const auto triple = split(loaded.data, config.ratios, derive_seed(trial_seed, Stream::Split));
    const Dataset& fit =
        config.sdb_fit_split == FitSplit::Train ? triple.train : triple.model_select;
    for (auto learner : config.learners) {
      const auto model = train_trial_model(config, learner, triple.train, fit,
                                           derive_seed(trial_seed, Stream::Pipeline));
      const auto curve = sweep_lambda(*model, triple.test);
      const std::string curve_path =
          config.output_dir + "/tradeoff_" + dataset + "_" + to_string(learner) + ".csv";
      curve.to_csv().save(curve_path);
      result.written_files.push_back(curve_path);

      if (learner == LearnerKind::Boost) {
        const auto hist = margin_histogram(model->confidences(triple.test.x), triple.test.labels);
        CsvTable hist_csv;
        hist_csv.header = {"bin_left", "count", "mislabeled_count"};
        for (std::size_t b = 0; b < hist.bin_left.size(); ++b) {
          hist_csv.rows.push_back({format_double(hist.bin_left[b]), std::to_string(hist.count[b]),
                                   std::to_string(hist.mislabeled[b])});
        }
        const std::string hist_path = config.output_dir + "/margins_" + dataset + "_boost.csv";
        hist_csv.save(hist_path);
        result.written_files.push_back(hist_path);
      }
    }
  }

  return result;
}

}  // namespace fairshift
