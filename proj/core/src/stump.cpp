#include "fairshift/stump.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairshift {

StumpSearch::StumpSearch(const Matrix& x) : x_(&x) {
  if (x.rows() == 0) throw Error("stump search: empty dataset");
  order_.resize(x.cols());
  for (long f = 0; f < x.cols(); ++f) {
    auto& ord = order_[f];
    ord.resize(x.rows());
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(),
                     [&](int a, int b) { return x(a, f) < x(b, f); });
  }
}

StumpSearch::Result StumpSearch::best(const std::vector<int>& labels,
                                      const std::vector<double>& weights,
                                      const Objective& objective) const {
  const Matrix& x = *x_;
  const long n = x.rows();
  if (static_cast<long>(labels.size()) != n || static_cast<long>(weights.size()) != n) {
    throw Error("stump search: labels/weights size mismatch");
  }
  const bool with_bias = objective.bias_weight > 0.0;
  if (with_bias && objective.mask == nullptr) {
    throw Error("stump search: bias objective needs a protected mask");
  }

  double w_pos_total = 0.0, w_neg_total = 0.0;
  for (long i = 0; i < n; ++i) {
    if (weights[i] < 0.0) throw Error("stump search: negative weight");
    (labels[i] == +1 ? w_pos_total : w_neg_total) += weights[i];
  }

  long n_prot = 0, n_comp = 0;
  if (with_bias) {
    for (long i = 0; i < n; ++i) (*objective.mask)[i] ? ++n_prot : ++n_comp;
    if (n_prot == 0 || n_comp == 0) {
      warn("stump search: degenerate protected mask; bias term is 0");
    }
  }

  Result best_result;
  bool have_best = false;

  for (long f = 0; f < x.cols(); ++f) {
    const auto& ord = order_[f];
    // Left accumulators cover rows with value <= current threshold.
    double w_pos_left = 0.0, w_neg_left = 0.0;
    long prot_left = 0, comp_left = 0;

    auto consider = [&](double threshold) {
      // polarity +1: predict +1 where value > threshold.
      const double err_pos = w_pos_left + (w_neg_total - w_neg_left);
      const double err_neg = w_neg_left + (w_pos_total - w_pos_left);
      double bias_abs = 0.0;
      if (with_bias && n_prot > 0 && n_comp > 0) {
        // Signed bias of the polarity-+1 stump; the -1 stump negates it, so
        // the penalty |bias| is shared.
        const double b = double(prot_left) / double(n_prot) - double(comp_left) / double(n_comp);
        bias_abs = std::abs(b);
      }
      for (int polarity : {+1, -1}) {
        const double err = polarity == +1 ? err_pos : err_neg;
        const double obj = err + objective.bias_weight * bias_abs;
        if (!have_best || obj < best_result.objective) {
          best_result.stump = Stump{static_cast<int>(f), threshold, polarity};
          best_result.weighted_error = err;
          best_result.objective = obj;
          have_best = true;
        }
      }
    };

    consider(x(ord[0], f) - 1.0);  // sentinel below the minimum: constant stumps
    for (long k = 0; k < n; ++k) {
      const int row = ord[k];
      (labels[row] == +1 ? w_pos_left : w_neg_left) += weights[row];
      if (with_bias) ((*objective.mask)[row] ? prot_left : comp_left) += 1;
      if (k + 1 < n) {
        const double v = x(row, f);
        const double next = x(ord[k + 1], f);
        if (next > v) consider(0.5 * (v + next));
      }
    }
  }
  return best_result;
}

Stump train_stump(const Dataset& ds, const std::vector<double>& weights) {
  if (ds.n() == 0) throw Error("train_stump: empty dataset");
  if (static_cast<int>(weights.size()) != ds.n()) throw Error("train_stump: weights length mismatch");
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) throw Error("train_stump: weights must sum to 1");
  StumpSearch search(ds.x);
  return search.best(ds.labels, weights).stump;
}

}  // namespace fairshift
