#include "fairshift/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fairshift/common.hpp"

namespace fairshift {

double signed_bias(const std::vector<int>& predictions, const std::vector<std::uint8_t>& mask) {
  if (predictions.size() != mask.size()) throw Error("signed_bias: length mismatch");
  long n_prot = 0, n_comp = 0, pos_prot = 0, pos_comp = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (mask[i]) {
      ++n_prot;
      if (predictions[i] == +1) ++pos_prot;
    } else {
      ++n_comp;
      if (predictions[i] == +1) ++pos_comp;
    }
  }
  if (n_prot == 0 || n_comp == 0) {
    warn("signed_bias: empty protected group or complement; reporting 0");
    return 0.0;
  }
  return double(pos_comp) / double(n_comp) - double(pos_prot) / double(n_prot);
}

double label_error(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) throw Error("label_error: length mismatch");
  if (predictions.empty()) return 0.0;
  long wrong = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] != labels[i]) ++wrong;
  }
  return double(wrong) / double(predictions.size());
}

EvalResult evaluate(const std::vector<int>& predictions, const std::vector<int>& labels,
                    const std::vector<std::uint8_t>& mask) {
  EvalResult r;
  r.error = label_error(predictions, labels);
  r.bias = signed_bias(predictions, mask);
  r.n = static_cast<int>(predictions.size());
  r.protected_n = static_cast<int>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
  return r;
}

std::vector<double> margin_cdf(const std::vector<double>& confs, const std::vector<int>& labels,
                               const std::vector<double>& thetas) {
  if (confs.size() != labels.size()) throw Error("margin_cdf: length mismatch");
  if (!std::is_sorted(thetas.begin(), thetas.end())) {
    throw Error("margin_cdf: thetas must be sorted ascending");
  }
  std::vector<double> margins(confs.size());
  for (std::size_t i = 0; i < confs.size(); ++i) margins[i] = labels[i] * confs[i];
  std::sort(margins.begin(), margins.end());
  std::vector<double> cdf;
  cdf.reserve(thetas.size());
  for (double theta : thetas) {
    const auto it = std::upper_bound(margins.begin(), margins.end(), theta);
    cdf.push_back(margins.empty() ? 0.0 : double(it - margins.begin()) / double(margins.size()));
  }
  return cdf;
}

long confidence_band_count(const std::vector<double>& confs, const std::vector<std::uint8_t>& mask,
                           double lambda, double theta) {
  if (confs.size() != mask.size()) throw Error("confidence_band_count: length mismatch");
  long count = 0;
  for (std::size_t i = 0; i < confs.size(); ++i) {
    if (mask[i] && confs[i] >= -lambda && confs[i] <= -theta) ++count;
  }
  return count;
}

MarginHistogram margin_histogram(const std::vector<double>& confs, const std::vector<int>& labels,
                                 int bins, double lo, double hi) {
  if (confs.size() != labels.size()) throw Error("margin_histogram: length mismatch");
  if (bins < 1 || !(hi > lo)) throw Error("margin_histogram: bad bin spec");
  MarginHistogram h;
  h.bin_width = (hi - lo) / bins;
  h.bin_left.resize(bins);
  h.count.assign(bins, 0);
  h.mislabeled.assign(bins, 0);
  for (int b = 0; b < bins; ++b) h.bin_left[b] = lo + b * h.bin_width;
  for (std::size_t i = 0; i < confs.size(); ++i) {
    int b = static_cast<int>(std::floor((confs[i] - lo) / h.bin_width));
    b = std::clamp(b, 0, bins - 1);
    ++h.count[b];
    if (predict_from_confidence(confs[i]) != labels[i]) ++h.mislabeled[b];
  }
  return h;
}

}  // namespace fairshift
