#include "fairshift/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "fairshift/metrics.hpp"
#include "fairshift/rng.hpp"

namespace fairshift {

std::vector<int> shift_predictions(const std::vector<double>& confs,
                                   const std::vector<std::uint8_t>& mask, double lambda) {
  if (confs.size() != mask.size()) throw Error("shift_predictions: length mismatch");
  std::vector<int> preds(confs.size());
  for (std::size_t i = 0; i < confs.size(); ++i) {
    if (mask[i]) {
      preds[i] = confs[i] >= -lambda ? +1 : -1;
    } else {
      preds[i] = predict_from_confidence(confs[i]);
    }
  }
  return preds;
}

SdbFit fit_sdb(const std::vector<double>& confs, const std::vector<int>& labels,
               const std::vector<std::uint8_t>& protected_mask, double epsilon) {
  const std::size_t n = confs.size();
  if (labels.size() != n || protected_mask.size() != n) throw Error("fit_sdb: length mismatch");
  if (epsilon < 0.0) throw Error("fit_sdb: epsilon must be >= 0");

  const long prot = std::count(protected_mask.begin(), protected_mask.end(), std::uint8_t{1});
  if (prot == 0 || prot == static_cast<long>(n)) {
    throw Error("fit_sdb: protected group and its complement must both be non-empty");
  }

  SdbFit fit;
  std::vector<std::uint8_t> mask = protected_mask;
  {
    std::vector<int> base(n);
    for (std::size_t i = 0; i < n; ++i) base[i] = predict_from_confidence(confs[i]);
    if (signed_bias(base, mask) < 0.0) {
      // Protected group already advantaged: shift the complement instead.
      fit.swapped = true;
      for (auto& m : mask) m = m ? 0 : 1;
      warn("fit_sdb: base bias is negative; swapping group roles for the shift");
    }
  }

  // Distinct negative confidences of (effective) protected examples,
  // ascending. Flipping everything at or above v_j is realized by the
  // midpoint shift between v_j and v_{j-1}.
  std::set<double> distinct;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i] && confs[i] < 0.0) distinct.insert(confs[i]);
  }
  std::vector<double> values(distinct.begin(), distinct.end());

  // Next higher protected confidence overall (possibly positive), used to pad
  // the lowest candidate.
  auto next_higher_protected = [&](double v) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[i] && confs[i] > v) best = std::min(best, confs[i]);
    }
    return best;
  };

  std::vector<double> candidates{0.0};
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double v = values[j];
    double half_gap;
    if (j > 0) {
      half_gap = 0.5 * (v - values[j - 1]);
    } else {
      const double up = next_higher_protected(v);
      half_gap = std::isfinite(up) ? 0.5 * (up - v) : 0.5 * std::max(1.0, std::abs(v));
    }
    candidates.push_back(-v + half_gap);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  fit.candidate_count = static_cast<int>(candidates.size());

  // Incremental sweep over the ascending candidates: growing the shift only
  // ever flips further protected examples to +1, so error and group counts
  // update in one pass over the protected negatives sorted by confidence
  // (descending = flip order). Counts match shift_predictions exactly.
  long n_prot = 0, n_comp = 0, prot_pos = 0, comp_pos = 0, wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int pred = predict_from_confidence(confs[i]);
    if (mask[i]) {
      ++n_prot;
      prot_pos += pred == +1;
    } else {
      ++n_comp;
      comp_pos += pred == +1;
    }
    wrong += pred != labels[i];
  }
  struct FlipRow {
    double conf;
    int label;
  };
  std::vector<FlipRow> flip_order;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i] && confs[i] < 0.0) flip_order.push_back({confs[i], labels[i]});
  }
  std::sort(flip_order.begin(), flip_order.end(),
            [](const FlipRow& a, const FlipRow& b) { return a.conf > b.conf; });

  struct Scored {
    double lambda, error, bias;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  std::size_t flipped = 0;
  long last_protected_pos = -1;
  for (double lambda : candidates) {
    while (flipped < flip_order.size() && flip_order[flipped].conf >= -lambda) {
      wrong += flip_order[flipped].label == +1 ? -1 : +1;
      ++prot_pos;
      ++flipped;
    }
    if (prot_pos < last_protected_pos) throw Error("fit_sdb: non-monotone candidate sweep");
    last_protected_pos = prot_pos;
    const double err = double(wrong) / double(n);
    const double bias = double(comp_pos) / double(n_comp) - double(prot_pos) / double(n_prot);
    scored.push_back({lambda, err, bias});
  }

  auto better = [](const Scored& a, const Scored& b) {
    if (a.error != b.error) return a.error < b.error;
    return a.lambda < b.lambda;
  };

  const Scored* chosen = nullptr;
  for (const auto& s : scored) {
    if (std::abs(s.bias) <= epsilon && (chosen == nullptr || better(s, *chosen))) chosen = &s;
  }
  fit.feasible = chosen != nullptr;
  if (!fit.feasible) {
    // Fall back to the candidates closest to parity.
    double best_abs = std::numeric_limits<double>::infinity();
    for (const auto& s : scored) best_abs = std::min(best_abs, std::abs(s.bias));
    for (const auto& s : scored) {
      if (std::abs(s.bias) <= best_abs + 1e-15 && (chosen == nullptr || better(s, *chosen))) {
        chosen = &s;
      }
    }
    fit.best_achievable_bias = chosen->bias;
    warn("fit_sdb: no shift meets |bias| <= " + std::to_string(epsilon) +
         "; best achievable bias is " + std::to_string(chosen->bias));
  }

  fit.lambda = chosen->lambda;
  fit.fit_error = chosen->error;
  fit.fit_bias = chosen->bias;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i] && confs[i] < 0.0 && confs[i] >= -fit.lambda) ++fit.flipped;
  }
  return fit;
}

std::vector<int> ShiftedClassifier::predict(const Dataset& ds) const {
  const auto confs = base->confidences(ds.x);
  std::vector<std::uint8_t> mask = ds.protected_mask;
  if (shift_complement) {
    for (auto& m : mask) m = m ? 0 : 1;
  }
  return shift_predictions(confs, mask, lambda);
}

ShiftedClassifier apply_sdb(std::shared_ptr<const ConfidenceModel> base, double lambda,
                            bool shift_complement) {
  if (lambda < 0.0) throw Error("apply_sdb: lambda must be >= 0");
  return ShiftedClassifier{std::move(base), lambda, shift_complement};
}

double fit_rr(const std::vector<int>& predictions, const std::vector<std::uint8_t>& mask) {
  const double bias = signed_bias(predictions, mask);
  if (bias <= 0.0) return 0.0;
  long prot = 0, prot_neg = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (mask[i]) {
      ++prot;
      if (predictions[i] == -1) ++prot_neg;
    }
  }
  if (prot_neg == 0) {
    throw Error("fit_rr: positive bias but no protected example is predicted -1");
  }
  const double neg_fraction = double(prot_neg) / double(prot);
  return std::clamp(bias / neg_fraction, 0.0, 1.0);
}

std::vector<int> rr_flip(const std::vector<int>& predictions,
                         const std::vector<std::uint8_t>& mask, double p, std::uint64_t seed) {
  if (p < 0.0 || p > 1.0) throw Error("rr_flip: p must be in [0,1]");
  if (predictions.size() != mask.size()) throw Error("rr_flip: length mismatch");
  std::vector<int> out = predictions;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i] && out[i] == -1 && hashed_bernoulli(seed, i, p)) out[i] = +1;
  }
  return out;
}

std::vector<int> RandomizedRelabeler::predict(const Dataset& ds) const {
  return rr_flip(base->predict(ds.x), ds.protected_mask, p, seed);
}

RandomizedRelabeler apply_rr(std::shared_ptr<const ConfidenceModel> base, double p,
                             std::uint64_t seed) {
  if (p < 0.0 || p > 1.0) throw Error("apply_rr: p must be in [0,1]");
  return RandomizedRelabeler{std::move(base), p, seed};
}

MassageResult rm_massage(const Dataset& train, std::uint64_t seed) {
  train.check();
  const double bias = signed_bias(train.labels, train.protected_mask);
  if (bias < 0.0) {
    throw Error("rm_massage: training bias is negative; massaging assumes a disadvantaged group");
  }
  MassageResult result;
  result.data = train;
  if (bias == 0.0) return result;

  long prot = 0, prot_neg = 0;
  for (std::size_t i = 0; i < train.labels.size(); ++i) {
    if (train.protected_mask[i]) {
      ++prot;
      if (train.labels[i] == -1) ++prot_neg;
    }
  }
  if (prot_neg == 0) throw Error("rm_massage: positive bias but no protected -1 labels");
  result.p = std::clamp(bias / (double(prot_neg) / double(prot)), 0.0, 1.0);

  for (std::size_t i = 0; i < result.data.labels.size(); ++i) {
    if (result.data.protected_mask[i] && result.data.labels[i] == -1 &&
        hashed_bernoulli(seed, i, result.p)) {
      result.data.labels[i] = +1;
      result.flipped_rows.push_back(static_cast<int>(i));
    }
  }
  return result;
}

BoostModel train_fwl_adaboost(const Dataset& train, int rounds, double bias_weight) {
  BoostConfig cfg;
  cfg.rounds = rounds;
  cfg.fwl_bias_weight = bias_weight;
  return train_adaboost(train, cfg);
}

}  // namespace fairshift
