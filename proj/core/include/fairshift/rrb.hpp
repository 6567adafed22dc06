#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "fairshift/dataset.hpp"

namespace fairshift {

/// A trained end-to-end pipeline: maps an evaluation dataset to predictions.
using Predictor = std::function<std::vector<int>(const Dataset&)>;

/// Builds a Predictor from a (possibly biased) training split, the split
/// post-processing parameters are fitted on, and a seed for any internal
/// randomness. Training must be deterministic given these three inputs.
using PipelineFactory =
    std::function<Predictor(const Dataset& train, const Dataset& fit_split, std::uint64_t seed)>;

struct RrbOptions {
  std::array<double, 3> ratios{0.5, 0.25, 0.25};
  /// Hand the training split (rather than model_select) to the factory as
  /// the fit split, mirroring the harness's SDB fit-split switch.
  bool fit_on_train = false;
};

struct RrbResult {
  double mean = 0.0;
  double stddev = 0.0;  // sample stddev over trials
  std::vector<double> per_trial;
  long min_eligible = 0;  // smallest per-trial count of evaluated rows
};

/// Estimates resilience to random bias: per trial, a fresh random bit column
/// is added and positive labels of the bit==0 group are flipped to -1 with
/// probability eta; the pipeline trains on the biased labels with the
/// synthetic group as the protected group; the score is the fraction of test
/// rows with bit==0 and ORIGINAL label +1 that the pipeline predicts +1.
/// Trial t uses seed derive_seed(seed, Stream::RrbTrial, t), so results are
/// a pure function of (seed, eta, trials, options, pipeline).
RrbResult rrb_estimate(const PipelineFactory& pipeline, const Dataset& ds, double eta, int trials,
                       std::uint64_t seed, const RrbOptions& options = {});

/// One RRB trial given pre-derived artifacts; exposed so the experiment
/// harness can share trained models across cells while staying bitwise
/// identical to rrb_estimate.
double rrb_trial_score(const std::vector<int>& test_predictions,
                       const std::vector<int>& original_labels,
                       const std::vector<std::uint8_t>& bit, const std::vector<int>& test_idx);

double sample_mean(const std::vector<double>& values);
double sample_stddev(const std::vector<double>& values);

}  // namespace fairshift
