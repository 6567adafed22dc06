#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fairshift/adaboost.hpp"
#include "fairshift/dataset.hpp"
#include "fairshift/model.hpp"

namespace fairshift {

/// Result of fitting the decision-boundary shift. When no candidate meets
/// the |bias| <= epsilon constraint, feasible is false and the selection
/// falls back to the candidates of minimal |bias| (then minimal error, then
/// smallest lambda); best_achievable_bias reports how close that got.
struct SdbFit {
  double lambda = 0.0;
  double fit_error = 0.0;  // 0/1 error of the shifted classifier on the fitting data
  double fit_bias = 0.0;   // its signed bias
  bool feasible = true;
  bool swapped = false;  // protected group was advantaged; roles swapped internally
  double best_achievable_bias = 0.0;
  int candidate_count = 0;
  int flipped = 0;  // protected examples whose prediction the shift flips
};

/// Chooses the minimal-error shift lambda whose classifier meets the bias
/// tolerance on the supplied fitting data. Candidates are lambda = 0 plus,
/// for each distinct negative confidence v among protected examples, the
/// shift flipping {conf >= v}: the midpoint between v and the next lower
/// distinct protected confidence (the lowest candidate pads by half the gap
/// to the next higher one). If the base classifier's signed bias is negative
/// the group roles are swapped internally and `swapped` is set.
SdbFit fit_sdb(const std::vector<double>& confs, const std::vector<int>& labels,
               const std::vector<std::uint8_t>& protected_mask, double epsilon);

/// Predictions of the shifted classifier h_lambda given confidences:
/// members of `mask` are predicted +1 iff conf >= -lambda (boundary
/// inclusive); everyone else keeps sign(conf).
std::vector<int> shift_predictions(const std::vector<double>& confs,
                                   const std::vector<std::uint8_t>& mask, double lambda);

/// A ConfidenceModel with the boundary shift applied to the protected group
/// (or to its complement when the fit swapped roles).
struct ShiftedClassifier {
  std::shared_ptr<const ConfidenceModel> base;
  double lambda = 0.0;
  bool shift_complement = false;

  std::vector<int> predict(const Dataset& ds) const;
};

ShiftedClassifier apply_sdb(std::shared_ptr<const ConfidenceModel> base, double lambda,
                            bool shift_complement = false);

/// Flip probability that zeroes the expected bias of a prediction vector:
/// p = bias / (fraction of protected predicted -1), clamped into [0, 1].
/// Throws when the bias is positive but no protected example is predicted -1.
double fit_rr(const std::vector<int>& predictions, const std::vector<std::uint8_t>& mask);

/// Row-stable randomized flips: protected examples predicted -1 flip to +1
/// independently with probability p. Deterministic given (seed, row index).
std::vector<int> rr_flip(const std::vector<int>& predictions,
                         const std::vector<std::uint8_t>& mask, double p, std::uint64_t seed);

struct RandomizedRelabeler {
  std::shared_ptr<const ConfidenceModel> base;
  double p = 0.0;
  std::uint64_t seed = 0;

  std::vector<int> predict(const Dataset& ds) const;
};

RandomizedRelabeler apply_rr(std::shared_ptr<const ConfidenceModel> base, double p,
                             std::uint64_t seed);

/// Random massaging: copies the training set and flips protected -1 labels
/// to +1 with the probability that zeroes the label bias in expectation.
struct MassageResult {
  Dataset data;
  double p = 0.0;
  std::vector<int> flipped_rows;
};
MassageResult rm_massage(const Dataset& train, std::uint64_t seed);

/// Boosting whose weak learner minimizes weighted error plus
/// bias_weight * |signed bias of the stump's predictions| (unweighted, over
/// the whole training set). bias_weight = 0 reproduces plain AdaBoost
/// bit for bit.
BoostModel train_fwl_adaboost(const Dataset& train, int rounds, double bias_weight = 1.0);

}  // namespace fairshift
