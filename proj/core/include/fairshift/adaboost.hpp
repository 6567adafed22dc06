#pragma once

#include <vector>

#include "fairshift/dataset.hpp"
#include "fairshift/stump.hpp"

namespace fairshift {

struct BoostConfig {
  int rounds = 20;
  /// 0 gives plain AdaBoost; > 0 makes the weak learner minimize
  /// weighted error + fwl_bias_weight * |stump bias| (fair weak learning).
  double fwl_bias_weight = 0.0;
};

/// Weighted vote over decision stumps. The signed confidence is the
/// normalized vote sum(alpha_t h_t(x)) / sum(alpha_t), in [-1, 1].
struct BoostModel {
  std::vector<Stump> stumps;
  std::vector<double> alphas;
  double alpha_sum = 0.0;
  std::vector<double> round_errors;  // weighted error of each accepted stump
  double fwl_bias_weight = 0.0;

  double confidence_row(RowRef row) const;
  std::vector<double> confidences(const Matrix& x) const;
  std::vector<int> predict(const Matrix& x) const;
  int rounds() const { return static_cast<int>(stumps.size()); }
};

/// Standard AdaBoost over exhaustive decision stumps. Round weights are
/// alpha_t = 0.5 ln((1-e_t)/e_t) with e_t clamped into [1e-10, 1-1e-10];
/// example weights are renormalized every round; training stops early if a
/// stump is perfect (its stump is still recorded).
BoostModel train_adaboost(const Dataset& train, const BoostConfig& cfg = {});

}  // namespace fairshift
