#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace fairshift {

struct EvalResult {
  double error = 0.0;  // in [0,1]
  double bias = 0.0;   // signed, in [-1,1]
  int n = 0;
  int protected_n = 0;
  std::optional<double> rrb;
};

/// Signed statistical-parity bias of a prediction (or label) vector:
/// (fraction of non-protected predicted +1) - (fraction of protected
/// predicted +1). Positive means the protected group is disadvantaged.
/// An empty group or empty complement yields 0 with a warning.
double signed_bias(const std::vector<int>& predictions, const std::vector<std::uint8_t>& mask);

/// Fraction of disagreements.
double label_error(const std::vector<int>& predictions, const std::vector<int>& labels);

EvalResult evaluate(const std::vector<int>& predictions, const std::vector<int>& labels,
                    const std::vector<std::uint8_t>& mask);

/// Empirical CDF of margins y*conf at each theta: Pr[y*conf <= theta].
/// Thetas must be sorted ascending.
std::vector<double> margin_cdf(const std::vector<double>& confs, const std::vector<int>& labels,
                               const std::vector<double>& thetas);

/// Count of protected examples whose confidence lies in [-lambda, -theta].
long confidence_band_count(const std::vector<double>& confs, const std::vector<std::uint8_t>& mask,
                           double lambda, double theta);

/// Equal-width confidence histogram with a parallel count of misclassified
/// examples per bin. Values outside [lo, hi] are clamped into the end bins.
struct MarginHistogram {
  std::vector<double> bin_left;
  std::vector<long> count;
  std::vector<long> mislabeled;
  double bin_width = 0.0;
};
MarginHistogram margin_histogram(const std::vector<double>& confs, const std::vector<int>& labels,
                                 int bins = 40, double lo = -1.0, double hi = 1.0);

}  // namespace fairshift
