#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fairshift/adaboost.hpp"
#include "fairshift/logreg.hpp"
#include "fairshift/svm.hpp"

namespace fairshift {

enum class LearnerKind { Boost, Svm, LogReg };

std::string to_string(LearnerKind kind);
LearnerKind learner_from_string(const std::string& name);

/// Observed confidence range on the training split; recorded so consumers of
/// a serialized model know the scale (SVM confidences are unbounded).
struct ConfidenceScale {
  double min_conf = 0.0;
  double max_conf = 0.0;
};

/// A trained learner behind the uniform signed-confidence interface:
/// the prediction is the sign of confidence(x), with 0 resolving to +1.
class ConfidenceModel {
 public:
  explicit ConfidenceModel(BoostModel m) : model_(std::move(m)) {}
  explicit ConfidenceModel(SvmModel m) : model_(std::move(m)) {}
  explicit ConfidenceModel(LinModel m) : model_(std::move(m)) {}

  LearnerKind kind() const;
  double confidence_row(RowRef row) const;
  std::vector<double> confidences(const Matrix& x) const;
  std::vector<int> predict(const Matrix& x) const;

  const BoostModel& boost() const { return std::get<BoostModel>(model_); }
  const SvmModel& svm() const { return std::get<SvmModel>(model_); }
  SvmModel& svm() { return std::get<SvmModel>(model_); }
  const LinModel& logreg() const { return std::get<LinModel>(model_); }

  ConfidenceScale scale;

  nlohmann::json to_json() const;
  static ConfidenceModel from_json(const nlohmann::json& j);

 private:
  std::variant<BoostModel, SvmModel, LinModel> model_;
};

/// Fitted post-processing parameters that travel with a serialized model.
struct FairnessAttachment {
  std::string method = "none";  // none | sdb | rr
  double lambda = 0.0;
  bool shift_complement = false;
  double flip_p = 0.0;
  std::uint64_t rr_seed = 0;
};

/// How a model was produced; enough to re-run the training exactly.
struct Provenance {
  std::string config;  // canonical experiment config text
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  int trial = 0;
};

/// Versioned on-disk document: model + the preprocessing needed to evaluate
/// raw data files (frozen schema, train-split standardizer) + fairness
/// parameters. This is the CLI's train/evaluate hand-off format.
struct ModelDocument {
  ConfidenceModel model;
  DatasetSchema schema;          // frozen (categories fitted)
  Standardizer standardizer;
  std::vector<FeatureInfo> features;
  FairnessAttachment fairness;
  Provenance provenance;

  void save(const std::string& path) const;
  static ModelDocument load(const std::string& path);
};

}  // namespace fairshift
