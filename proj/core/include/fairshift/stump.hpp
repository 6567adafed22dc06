#pragma once

#include <cstdint>
#include <vector>

#include "fairshift/common.hpp"
#include "fairshift/dataset.hpp"

namespace fairshift {

/// Axis-aligned decision stump: predicts `polarity` where value > threshold,
/// -polarity otherwise.
struct Stump {
  int feature = 0;
  double threshold = 0.0;
  int polarity = +1;

  int predict_value(double value) const { return value > threshold ? polarity : -polarity; }
  int predict_row(RowRef row) const { return predict_value(row[feature]); }
  bool operator==(const Stump&) const = default;
};

/// Exhaustive stump search over (feature, midpoint threshold, polarity)
/// triples. Thresholds are the midpoints between consecutive distinct values
/// of a feature plus one sentinel below its minimum (which yields the two
/// constant classifiers). Per-feature sort orders are computed once and
/// reused across boosting rounds.
///
/// Ties are broken by scan order: lowest feature index, then lowest
/// threshold, then polarity +1 before -1.
class StumpSearch {
 public:
  explicit StumpSearch(const Matrix& x);

  struct Objective {
    /// When > 0, adds bias_weight * |signed bias of the stump's predictions|
    /// (unweighted, over all rows) to the weighted 0/1 error.
    double bias_weight = 0.0;
    const std::vector<std::uint8_t>* mask = nullptr;  // required when bias_weight > 0
  };

  struct Result {
    Stump stump;
    double weighted_error = 0.0;  // under the supplied weights
    double objective = 0.0;       // weighted_error + bias penalty
  };

  Result best(const std::vector<int>& labels, const std::vector<double>& weights,
              const Objective& objective) const;
  Result best(const std::vector<int>& labels, const std::vector<double>& weights) const {
    return best(labels, weights, Objective{});
  }

  const Matrix& data() const { return *x_; }

 private:
  const Matrix* x_;
  std::vector<std::vector<int>> order_;  // per feature, row indices ascending by value
};

/// Weights must be nonnegative and sum to 1 (within 1e-9).
Stump train_stump(const Dataset& ds, const std::vector<double>& weights);

}  // namespace fairshift
