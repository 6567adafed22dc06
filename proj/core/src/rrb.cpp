#include "fairshift/rrb.hpp"

#include <cmath>

#include "fairshift/rng.hpp"

namespace fairshift {

double sample_mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / double(values.size());
}

double sample_stddev(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double mean = sample_mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / double(values.size() - 1));
}

double rrb_trial_score(const std::vector<int>& test_predictions,
                       const std::vector<int>& original_labels,
                       const std::vector<std::uint8_t>& bit, const std::vector<int>& test_idx) {
  long eligible = 0, recovered = 0;
  for (std::size_t k = 0; k < test_idx.size(); ++k) {
    const int row = test_idx[k];
    if (bit[row] == 0 && original_labels[row] == +1) {
      ++eligible;
      if (test_predictions[k] == +1) ++recovered;
    }
  }
  if (eligible == 0) throw Error("rrb: no test rows with bit=0 and original label +1");
  return double(recovered) / double(eligible);
}

RrbResult rrb_estimate(const PipelineFactory& pipeline, const Dataset& ds, double eta, int trials,
                       std::uint64_t seed, const RrbOptions& options) {
  if (eta < 0.0 || eta >= 0.5) throw Error("rrb_estimate: eta must be in [0, 1/2)");
  if (trials < 1) throw Error("rrb_estimate: trials must be >= 1");

  RrbResult result;
  result.min_eligible = ds.n();
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(seed, Stream::RrbTrial, t);
    const auto biased = inject_random_bias(ds, eta, derive_seed(trial_seed, Stream::BiasInject));
    const auto triple = split(biased.data, options.ratios, derive_seed(trial_seed, Stream::Split));
    const Dataset& fit_split = options.fit_on_train ? triple.train : triple.model_select;
    Predictor predictor =
        pipeline(triple.train, fit_split, derive_seed(trial_seed, Stream::Pipeline));
    const auto preds = predictor(triple.test);

    long eligible = 0;
    for (int row : triple.test_idx) {
      if (biased.bit[row] == 0 && biased.original_labels[row] == +1) ++eligible;
    }
    result.min_eligible = std::min(result.min_eligible, eligible);
    result.per_trial.push_back(
        rrb_trial_score(preds, biased.original_labels, biased.bit, triple.test_idx));
  }
  result.mean = sample_mean(result.per_trial);
  result.stddev = sample_stddev(result.per_trial);
  return result;
}

}  // namespace fairshift
