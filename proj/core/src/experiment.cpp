#include "fairshift/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "fairshift/metrics.hpp"
#include "fairshift/rng.hpp"

namespace fairshift {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config: bad boolean for '" + key + "': " + v);
}

int learner_id(LearnerKind k) { return static_cast<int>(k); }

}  // namespace

std::string to_string(FairnessMethod m) {
  switch (m) {
    case FairnessMethod::None: return "none";
    case FairnessMethod::Sdb: return "sdb";
    case FairnessMethod::Rr: return "rr";
    case FairnessMethod::Rm: return "rm";
    case FairnessMethod::Fwl: return "fwl";
  }
  throw Error("unknown fairness method");
}

FairnessMethod method_from_string(const std::string& name) {
  if (name == "none") return FairnessMethod::None;
  if (name == "sdb") return FairnessMethod::Sdb;
  if (name == "rr") return FairnessMethod::Rr;
  if (name == "rm") return FairnessMethod::Rm;
  if (name == "fwl") return FairnessMethod::Fwl;
  throw Error("unknown fairness method: " + name);
}

void ExperimentConfig::apply_line(const std::string& key, const std::string& value) {
  if (key == "schema") {
    schema_path = value;
  } else if (key == "data") {
    data_paths.push_back(value);
  } else if (key == "ratios") {
    const auto parts = split_ws(value);
    if (parts.size() != 3) throw Error("config: ratios wants three fractions");
    for (int i = 0; i < 3; ++i) ratios[i] = std::stod(parts[i]);
  } else if (key == "seed") {
    master_seed = std::stoull(value);
  } else if (key == "trials") {
    trials = std::stoi(value);
  } else if (key == "learners") {
    learners.clear();
    for (const auto& name : split_ws(value)) learners.push_back(learner_from_string(name));
  } else if (key == "methods") {
    methods.clear();
    for (const auto& name : split_ws(value)) methods.push_back(method_from_string(name));
  } else if (key == "boost.rounds") {
    settings.boost.rounds = std::stoi(value);
  } else if (key == "fwl.bias_weight") {
    settings.fwl_bias_weight = std::stod(value);
  } else if (key == "svm.kernel") {
    if (value == "linear") {
      settings.svm.kernel.kind = KernelSpec::Kind::Linear;
    } else if (value == "gaussian") {
      settings.svm.kernel.kind = KernelSpec::Kind::Gaussian;
    } else {
      throw Error("config: svm.kernel must be linear or gaussian");
    }
  } else if (key == "svm.C") {
    settings.svm.C = std::stod(value);
  } else if (key == "svm.gamma") {
    settings.svm.kernel.gamma = std::stod(value);
  } else if (key == "svm.tol") {
    settings.svm.tol = std::stod(value);
  } else if (key == "svm.max_iter") {
    settings.svm.max_iter = std::stol(value);
  } else if (key == "svm.subsample_cap") {
    settings.svm.subsample_cap = std::stoi(value);
  } else if (key == "svm.cache_mb") {
    settings.svm.cache_mb = static_cast<std::size_t>(std::stoul(value));
  } else if (key == "svm.rescale") {
    settings.svm_rescale = parse_bool(value, key);
  } else if (key == "logreg.reg") {
    settings.logreg.reg = std::stod(value);
  } else if (key == "logreg.tol") {
    settings.logreg.tol = std::stod(value);
  } else if (key == "logreg.max_iter") {
    settings.logreg.max_iter = std::stoi(value);
  } else if (key == "sdb.epsilon") {
    sdb_epsilon = std::stod(value);
  } else if (key == "sdb.fit_split") {
    if (value == "train") {
      sdb_fit_split = FitSplit::Train;
    } else if (value == "model_select") {
      sdb_fit_split = FitSplit::ModelSelect;
    } else {
      throw Error("config: sdb.fit_split must be train or model_select");
    }
  } else if (key == "rrb.enabled") {
    rrb_enabled = parse_bool(value, key);
  } else if (key == "rrb.eta") {
    rrb_eta = std::stod(value);
  } else if (key == "rrb.trials") {
    rrb_trials = std::stoi(value);
  } else if (key == "output_dir") {
    output_dir = value;
  } else if (key == "run_name") {
    run_name = value;
  } else if (key == "workers") {
    workers = std::stoi(value);
  } else {
    throw Error("config: unknown key '" + key + "'");
  }
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    config.apply_line(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  if (!schema_path.empty()) {
    out << "schema = " << schema_path << "\n";
  } else {
    out << "# schema embedded; fnv1a64 = " << fnv1a64(schema_text) << "\n";
  }
  for (const auto& p : data_paths) out << "data = " << p << "\n";
  out << "ratios = " << format_double(ratios[0]) << " " << format_double(ratios[1]) << " "
      << format_double(ratios[2]) << "\n";
  out << "seed = " << master_seed << "\n";
  out << "trials = " << trials << "\n";
  out << "learners =";
  for (auto l : learners) out << " " << to_string(l);
  out << "\nmethods =";
  for (auto m : methods) out << " " << to_string(m);
  out << "\n";
  out << "boost.rounds = " << settings.boost.rounds << "\n";
  out << "fwl.bias_weight = " << format_double(settings.fwl_bias_weight) << "\n";
  out << "svm.kernel = " << (settings.svm.kernel.kind == KernelSpec::Kind::Linear ? "linear" : "gaussian")
      << "\n";
  out << "svm.C = " << format_double(settings.svm.C) << "\n";
  out << "svm.gamma = " << format_double(settings.svm.kernel.gamma) << "\n";
  out << "svm.tol = " << format_double(settings.svm.tol) << "\n";
  out << "svm.max_iter = " << settings.svm.max_iter << "\n";
  out << "svm.subsample_cap = " << settings.svm.subsample_cap << "\n";
  out << "svm.cache_mb = " << settings.svm.cache_mb << "\n";
  out << "svm.rescale = " << (settings.svm_rescale ? "true" : "false") << "\n";
  out << "logreg.reg = " << format_double(settings.logreg.reg) << "\n";
  out << "logreg.tol = " << format_double(settings.logreg.tol) << "\n";
  out << "logreg.max_iter = " << settings.logreg.max_iter << "\n";
  out << "sdb.epsilon = " << format_double(sdb_epsilon) << "\n";
  out << "sdb.fit_split = " << (sdb_fit_split == FitSplit::Train ? "train" : "model_select") << "\n";
  out << "rrb.enabled = " << (rrb_enabled ? "true" : "false") << "\n";
  out << "rrb.eta = " << format_double(rrb_eta) << "\n";
  out << "rrb.trials = " << rrb_trials << "\n";
  out << "output_dir = " << output_dir << "\n";
  out << "run_name = " << run_name << "\n";
  out << "workers = " << workers << "\n";
  return out.str();
}

DatasetSchema ExperimentConfig::schema() const {
  if (!schema_path.empty()) return DatasetSchema::load_file(schema_path);
  if (schema_text.empty()) throw Error("config: no schema given");
  return DatasetSchema::parse(schema_text);
}

void MetricAgg::finalize() {
  std::vector<double> good;
  for (double v : raw) {
    if (!std::isnan(v)) good.push_back(v);
  }
  mean = sample_mean(good);
  stddev = sample_stddev(good);
}

const CellResult* ResultTable::find(LearnerKind l, FairnessMethod m) const {
  for (const auto& cell : cells) {
    if (cell.learner == l && cell.method == m) return &cell;
  }
  return nullptr;
}

CsvTable ResultTable::to_csv() const {
  std::size_t max_raw = 0;
  auto consider = [&](const MetricAgg& agg) { max_raw = std::max(max_raw, agg.raw.size()); };
  for (const auto& cell : cells) {
    consider(cell.error);
    consider(cell.bias);
    if (cell.has_rrb) consider(cell.rrb);
    if (cell.has_lambda) consider(cell.lambda);
    if (cell.has_flip_p) consider(cell.flip_p);
  }

  CsvTable csv;
  csv.header = {"learner", "method", "metric", "mean", "stddev"};
  for (std::size_t t = 0; t < max_raw; ++t) csv.header.push_back("t" + std::to_string(t));

  auto emit = [&](const CellResult& cell, const std::string& metric, const MetricAgg& agg) {
    std::vector<std::string> row{to_string(cell.learner), to_string(cell.method), metric,
                                 format_double(agg.mean), format_double(agg.stddev)};
    for (double v : agg.raw) row.push_back(format_double(v));
    row.resize(csv.header.size(), "");
    csv.rows.push_back(std::move(row));
  };

  for (const auto& cell : cells) {
    emit(cell, "error", cell.error);
    emit(cell, "bias", cell.bias);
    if (cell.has_rrb) emit(cell, "rrb", cell.rrb);
    if (cell.has_lambda) emit(cell, "lambda", cell.lambda);
    if (cell.has_flip_p) emit(cell, "flip_p", cell.flip_p);
  }
  return csv;
}

CsvTable TradeoffCurve::to_csv() const {
  CsvTable csv;
  csv.header = {"lambda", "bias", "error"};
  for (const auto& p : points) {
    csv.rows.push_back({format_double(p.lambda), format_double(p.bias), format_double(p.error)});
  }
  return csv;
}

void parallel_for(int tasks, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, tasks));
  if (workers == 1) {
    for (int t = 0; t < tasks; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= tasks) return;
        try {
          fn(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

/// Lazily trains and caches the base learners of one trial so every cell of
/// the grid reuses them. Training depends only on (data, pipeline_seed), so a
/// cache hit is bitwise identical to retraining.
class TrialContext {
 public:
  TrialContext(const ExperimentConfig& config, const Dataset& train, const Dataset& fit,
               std::uint64_t pipeline_seed)
      : config_(config), train_(train), fit_(fit), seed_(pipeline_seed) {}

  const ExperimentConfig& config() const { return config_; }
  const Dataset& train() const { return train_; }
  const Dataset& fit() const { return fit_; }
  std::uint64_t seed() const { return seed_; }

  std::shared_ptr<const ConfidenceModel> base(LearnerKind learner) {
    auto& slot = base_cache_[learner];
    if (!slot) slot = train_base(learner, train_);
    return slot;
  }

  std::shared_ptr<const ConfidenceModel> train_base(LearnerKind learner, const Dataset& data) {
    std::shared_ptr<ConfidenceModel> model;
    switch (learner) {
      case LearnerKind::Boost: {
        BoostConfig cfg = config_.settings.boost;
        cfg.fwl_bias_weight = 0.0;
        model = std::make_shared<ConfidenceModel>(train_adaboost(data, cfg));
        break;
      }
      case LearnerKind::Svm: {
        SvmConfig cfg = config_.settings.svm;
        cfg.subsample_seed = derive_seed(seed_, Stream::SvmSubsample);
        model = std::make_shared<ConfidenceModel>(train_svm(data, cfg));
        if (config_.settings.svm_rescale) {
          const auto confs = model->confidences(fit_.x);
          double peak = 0.0;
          for (double c : confs) peak = std::max(peak, std::abs(c));
          if (peak > 0.0) model->svm().confidence_scale = peak;
        }
        break;
      }
      case LearnerKind::LogReg: {
        model = std::make_shared<ConfidenceModel>(train_logreg(data, config_.settings.logreg));
        break;
      }
    }
    // Range metadata only; a capped sample keeps the extra kernel pass cheap.
    const Matrix sample = data.x.topRows(std::min<long>(data.x.rows(), 2048));
    const auto train_confs = model->confidences(sample);
    const auto [lo, hi] = std::minmax_element(train_confs.begin(), train_confs.end());
    model->scale = ConfidenceScale{*lo, *hi};
    return model;
  }

 private:
  const ExperimentConfig& config_;
  const Dataset& train_;
  const Dataset& fit_;
  std::uint64_t seed_;
  std::map<LearnerKind, std::shared_ptr<const ConfidenceModel>> base_cache_;
};

struct CellEval {
  std::vector<int> predictions;
  double lambda = kNaN;
  double flip_p = kNaN;
};

CellEval eval_cell(TrialContext& ctx, LearnerKind learner, FairnessMethod method,
                   const Dataset& eval) {
  CellEval out;
  switch (method) {
    case FairnessMethod::None: {
      out.predictions = ctx.base(learner)->predict(eval.x);
      break;
    }
    case FairnessMethod::Sdb: {
      auto model = ctx.base(learner);
      const auto fit_confs = model->confidences(ctx.fit().x);
      const SdbFit fit =
          fit_sdb(fit_confs, ctx.fit().labels, ctx.fit().protected_mask, ctx.config().sdb_epsilon);
      out.predictions = apply_sdb(model, fit.lambda, fit.swapped).predict(eval);
      out.lambda = fit.lambda;
      break;
    }
    case FairnessMethod::Rr: {
      auto model = ctx.base(learner);
      const double p = fit_rr(model->predict(ctx.fit().x), ctx.fit().protected_mask);
      const auto rr = apply_rr(model, p,
                               derive_seed(ctx.seed(), Stream::RrApply, learner_id(learner)));
      out.predictions = rr.predict(eval);
      out.flip_p = p;
      break;
    }
    case FairnessMethod::Rm: {
      const auto massaged =
          rm_massage(ctx.train(), derive_seed(ctx.seed(), Stream::Massage, learner_id(learner)));
      out.predictions = ctx.train_base(learner, massaged.data)->predict(eval.x);
      out.flip_p = massaged.p;
      break;
    }
    case FairnessMethod::Fwl: {
      if (learner != LearnerKind::Boost) throw Error("fwl applies to boosting only");
      const auto model = train_fwl_adaboost(ctx.train(), ctx.config().settings.boost.rounds,
                                            ctx.config().settings.fwl_bias_weight);
      out.predictions = model.predict(eval.x);
      break;
    }
  }
  return out;
}

struct CellKey {
  LearnerKind learner;
  FairnessMethod method;
};

std::vector<CellKey> enumerate_cells(const ExperimentConfig& config) {
  std::vector<CellKey> cells;
  for (auto learner : config.learners) {
    for (auto method : config.methods) {
      if (method == FairnessMethod::Fwl && learner != LearnerKind::Boost) continue;
      cells.push_back({learner, method});
    }
  }
  if (cells.empty()) throw Error("config: empty learner/method grid");
  return cells;
}

}  // namespace

Predictor make_cell_predictor(LearnerKind learner, FairnessMethod method,
                              const ExperimentConfig& config, const Dataset& train,
                              const Dataset& fit_split, std::uint64_t pipeline_seed) {
  auto ctx = std::make_shared<TrialContext>(config, train, fit_split, pipeline_seed);
  return [ctx, learner, method](const Dataset& eval) {
    return eval_cell(*ctx, learner, method, eval).predictions;
  };
}

std::shared_ptr<const ConfidenceModel> train_trial_model(const ExperimentConfig& config,
                                                         LearnerKind learner, const Dataset& train,
                                                         const Dataset& fit_split,
                                                         std::uint64_t pipeline_seed) {
  TrialContext ctx(config, train, fit_split, pipeline_seed);
  return ctx.base(learner);
}

ResultTable run_experiment(const ExperimentConfig& config) {
  if (config.trials < 1) throw Error("config: trials must be >= 1");
  const auto loaded = load_dataset(config.data_paths, config.schema());
  const Dataset& ds = loaded.data;
  const auto cells = enumerate_cells(config);
  const int n_cells = static_cast<int>(cells.size());
  const int T = config.trials;

  ResultTable table;
  table.trials = T;
  table.rrb_enabled = config.rrb_enabled;
  table.rrb_trials = config.rrb_enabled ? config.rrb_trials : 0;
  table.cells.resize(cells.size());
  for (int c = 0; c < n_cells; ++c) {
    auto& cell = table.cells[c];
    cell.learner = cells[c].learner;
    cell.method = cells[c].method;
    cell.error.raw.assign(T, kNaN);
    cell.bias.raw.assign(T, kNaN);
    cell.lambda.raw.assign(T, kNaN);
    cell.flip_p.raw.assign(T, kNaN);
    cell.has_lambda = cells[c].method == FairnessMethod::Sdb;
    cell.has_flip_p =
        cells[c].method == FairnessMethod::Rr || cells[c].method == FairnessMethod::Rm;
    if (config.rrb_enabled) {
      cell.rrb.raw.assign(config.rrb_trials, kNaN);
      cell.has_rrb = true;
    }
  }
  std::mutex failure_mutex;

  info("run_experiment: " + std::to_string(n_cells) + " cells x " + std::to_string(T) + " trials on " +
       std::to_string(ds.n()) + " rows");

  parallel_for(T, config.workers, [&](int t) {
    const std::uint64_t trial_seed = derive_seed(config.master_seed, Stream::Trial, t);
    const auto triple = split(ds, config.ratios, derive_seed(trial_seed, Stream::Split));
    const Dataset& fit =
        config.sdb_fit_split == FitSplit::Train ? triple.train : triple.model_select;
    TrialContext ctx(config, triple.train, fit, derive_seed(trial_seed, Stream::Pipeline));
    for (int c = 0; c < n_cells; ++c) {
      auto& cell = table.cells[c];
      try {
        const CellEval ev = eval_cell(ctx, cells[c].learner, cells[c].method, triple.test);
        cell.error.raw[t] = label_error(ev.predictions, triple.test.labels);
        cell.bias.raw[t] = signed_bias(ev.predictions, triple.test.protected_mask);
        cell.lambda.raw[t] = ev.lambda;
        cell.flip_p.raw[t] = ev.flip_p;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        ++cell.failed_trials;
        if (cell.first_failure.empty()) cell.first_failure = e.what();
        warn("trial " + std::to_string(t) + " cell " + to_string(cells[c].learner) + "/" +
             to_string(cells[c].method) + " failed: " + e.what());
      }
    }
  });

  if (config.rrb_enabled) {
    info("run_experiment: rrb pass, " + std::to_string(config.rrb_trials) + " trials at eta = " +
         format_double(config.rrb_eta));
    parallel_for(config.rrb_trials, config.workers, [&](int r) {
      const std::uint64_t trial_seed = derive_seed(config.master_seed, Stream::RrbTrial, r);
      const auto biased =
          inject_random_bias(ds, config.rrb_eta, derive_seed(trial_seed, Stream::BiasInject));
      const auto triple = split(biased.data, config.ratios, derive_seed(trial_seed, Stream::Split));
      const Dataset& fit =
          config.sdb_fit_split == FitSplit::Train ? triple.train : triple.model_select;
      TrialContext ctx(config, triple.train, fit, derive_seed(trial_seed, Stream::Pipeline));
      for (int c = 0; c < n_cells; ++c) {
        auto& cell = table.cells[c];
        try {
          const CellEval ev = eval_cell(ctx, cells[c].learner, cells[c].method, triple.test);
          cell.rrb.raw[r] =
              rrb_trial_score(ev.predictions, biased.original_labels, biased.bit, triple.test_idx);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          ++cell.failed_trials;
          if (cell.first_failure.empty()) cell.first_failure = e.what();
          warn("rrb trial " + std::to_string(r) + " cell " + to_string(cells[c].learner) + "/" +
               to_string(cells[c].method) + " failed: " + e.what());
        }
      }
    });
  }

  for (auto& cell : table.cells) {
    cell.error.finalize();
    cell.bias.finalize();
    cell.rrb.finalize();
    cell.lambda.finalize();
    cell.flip_p.finalize();
  }
  return table;
}

TradeoffCurve sweep_lambda(const ConfidenceModel& model, const Dataset& eval,
                           const std::vector<double>& grid) {
  eval.check();
  const long prot = eval.protected_count();
  if (prot == 0) throw Error("sweep_lambda: empty protected group");
  const auto confs = model.confidences(eval.x);

  std::vector<double> lambdas = grid;
  if (lambdas.empty()) {
    std::vector<double> values;
    for (int i = 0; i < eval.n(); ++i) {
      if (eval.protected_mask[i] && confs[i] < 0.0) values.push_back(confs[i]);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    lambdas.push_back(0.0);
    for (std::size_t j = 0; j < values.size(); ++j) {
      double half_gap;
      if (j > 0) {
        half_gap = 0.5 * (values[j] - values[j - 1]);
      } else {
        double up = std::numeric_limits<double>::infinity();
        for (int i = 0; i < eval.n(); ++i) {
          if (eval.protected_mask[i] && confs[i] > values[0]) up = std::min(up, confs[i]);
        }
        half_gap = std::isfinite(up) ? 0.5 * (up - values[0]) : 0.5 * std::max(1.0, std::abs(values[0]));
      }
      lambdas.push_back(-values[j] + half_gap);
    }
  }
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  if (!lambdas.empty() && lambdas.front() < 0.0) throw Error("sweep_lambda: negative shift in grid");

  TradeoffCurve curve;
  double prev_bias = std::numeric_limits<double>::infinity();
  for (double lambda : lambdas) {
    const auto preds = shift_predictions(confs, eval.protected_mask, lambda);
    TradeoffPoint point;
    point.lambda = lambda;
    point.bias = signed_bias(preds, eval.protected_mask);
    point.error = label_error(preds, eval.labels);
    if (point.bias > prev_bias + 1e-12) {
      throw Error("sweep_lambda: bias increased along the grid");
    }
    prev_bias = point.bias;
    curve.points.push_back(point);
  }
  return curve;
}

}  // namespace fairshift
