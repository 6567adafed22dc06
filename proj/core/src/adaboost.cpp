#include "fairshift/adaboost.hpp"

#include <algorithm>
#include <cmath>

namespace fairshift {

namespace {
constexpr double kErrorClampLo = 1e-10;
constexpr double kErrorClampHi = 1.0 - 1e-10;
}  // namespace

double BoostModel::confidence_row(RowRef row) const {
  double vote = 0.0;
  for (std::size_t t = 0; t < stumps.size(); ++t) vote += alphas[t] * stumps[t].predict_row(row);
  return alpha_sum > 0.0 ? vote / alpha_sum : 0.0;
}

std::vector<double> BoostModel::confidences(const Matrix& x) const {
  std::vector<double> out(x.rows(), 0.0);
  for (std::size_t t = 0; t < stumps.size(); ++t) {
    const Stump& s = stumps[t];
    const double a = alphas[t];
    for (long i = 0; i < x.rows(); ++i) out[i] += a * s.predict_value(x(i, s.feature));
  }
  if (alpha_sum > 0.0) {
    for (double& c : out) c /= alpha_sum;
  }
  return out;
}

std::vector<int> BoostModel::predict(const Matrix& x) const {
  auto confs = confidences(x);
  std::vector<int> preds(confs.size());
  for (std::size_t i = 0; i < confs.size(); ++i) preds[i] = predict_from_confidence(confs[i]);
  return preds;
}

BoostModel train_adaboost(const Dataset& train, const BoostConfig& cfg) {
  train.check();
  if (cfg.rounds < 1) throw Error("train_adaboost: rounds must be >= 1");
  const int n = train.n();
  if (n == 0) throw Error("train_adaboost: empty dataset");
  const long positives = train.positive_count();
  if (positives == 0 || positives == n) {
    throw Error("train_adaboost: degenerate dataset with a single label value");
  }

  StumpSearch search(train.x);
  StumpSearch::Objective objective;
  objective.bias_weight = cfg.fwl_bias_weight;
  objective.mask = cfg.fwl_bias_weight > 0.0 ? &train.protected_mask : nullptr;

  std::vector<double> w(n, 1.0 / n);
  BoostModel model;
  model.fwl_bias_weight = cfg.fwl_bias_weight;

  for (int t = 0; t < cfg.rounds; ++t) {
    const auto found = search.best(train.labels, w, objective);
    const double raw_error = found.weighted_error;
    const double eps = std::clamp(raw_error, kErrorClampLo, kErrorClampHi);
    const double alpha = 0.5 * std::log((1.0 - eps) / eps);

    model.stumps.push_back(found.stump);
    model.alphas.push_back(alpha);
    model.round_errors.push_back(raw_error);

    if (raw_error <= 0.0) break;  // perfect stump; voting with it alone suffices

    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const int h = found.stump.predict_value(train.x(i, found.stump.feature));
      w[i] *= std::exp(-alpha * train.labels[i] * h);
      sum += w[i];
    }
    for (int i = 0; i < n; ++i) w[i] /= sum;
  }

  model.alpha_sum = 0.0;
  for (double a : model.alphas) model.alpha_sum += a;
  return model;
}

}  // namespace fairshift
