#pragma once

#include <vector>

#include "fairshift/dataset.hpp"

namespace fairshift {

struct LogRegConfig {
  double reg = 1e-4;   // L2 strength on the non-intercept weights
  double tol = 1e-6;   // stop when the gradient 2-norm drops below this
  int max_iter = 500;
};

/// L2-regularized logistic ERM. The signed confidence is 2*phi(w.x + b) - 1,
/// in (-1, 1), so the decision boundary sits at confidence 0 like the other
/// learners.
struct LinModel {
  Eigen::VectorXd w;
  double intercept = 0.0;
  double reg = 0.0;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  double objective = 0.0;

  double margin_row(RowRef row) const { return row.dot(w) + intercept; }
  double confidence_row(RowRef row) const;
  std::vector<double> confidences(const Matrix& x) const;
  std::vector<int> predict(const Matrix& x) const;
};

/// Objective and gradient of mean logistic loss + 0.5*reg*|w|^2 with the
/// intercept as the LAST coordinate of `w_full` (unpenalized). Exposed so
/// tests can check the analytic gradient against finite differences.
double logreg_objective(const Matrix& x, const std::vector<int>& y,
                        const Eigen::VectorXd& w_full, double reg,
                        Eigen::VectorXd* grad = nullptr);

/// Deterministic L-BFGS minimization from w = 0.
LinModel train_logreg(const Dataset& train, const LogRegConfig& cfg = {});

}  // namespace fairshift
