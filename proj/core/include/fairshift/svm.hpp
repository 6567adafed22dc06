#pragma once

#include <cstdint>
#include <vector>

#include "fairshift/dataset.hpp"

namespace fairshift {

struct KernelSpec {
  enum class Kind { Linear, Gaussian };
  Kind kind = Kind::Linear;
  /// Gaussian bandwidth. <= 0 requests the heuristic
  /// 1 / (d * pooled feature variance), fitted on the training split.
  double gamma = 0.0;
};

struct SvmConfig {
  KernelSpec kernel;
  double C = 1.0;
  double tol = 1e-3;       // stop when the max KKT violation drops below this
  long max_iter = 0;       // 0 -> max(100000, 60*n)
  int subsample_cap = 5000;  // uniform training subsample for kernel tractability; <=0 disables
  std::uint64_t subsample_seed = 0;
  std::size_t cache_mb = 256;
};

/// Soft-margin kernel SVM trained by pairwise working-set optimization
/// (maximal-violating-pair SMO). The signed confidence is the decision value
/// sum_i coef_i K(sv_i, x) + intercept, an unbounded real; optionally divided
/// by confidence_scale (see SvmConfig users).
struct SvmModel {
  KernelSpec kernel;  // gamma resolved to its fitted value
  Matrix support_vectors;
  std::vector<double> coef;  // alpha_i * y_i per support vector
  double intercept = 0.0;
  double C = 1.0;
  double confidence_scale = 1.0;

  bool converged = false;
  long iterations = 0;
  double kkt_violation = 0.0;
  double dual_objective = 0.0;
  long trained_rows = 0;  // after subsampling

  double confidence_row(RowRef row) const;
  std::vector<double> confidences(const Matrix& x) const;
  std::vector<int> predict(const Matrix& x) const;
};

SvmModel train_svm(const Dataset& train, const SvmConfig& cfg = {});

double kernel_value(const KernelSpec& k, RowRef a, RowRef b);

/// 0.5*|w|^2 + C * sum hinge(y * f(x)) over the given rows; used with the
/// rows the model was trained on to certify the duality gap.
double svm_primal_objective(const Matrix& x, const std::vector<int>& y, const SvmModel& model);

}  // namespace fairshift
