#include "fairshift/logreg.hpp"

#include <cmath>
#include <deque>

namespace fairshift {

namespace {

inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
inline double log1p_exp(double t) {
  if (t > 35.0) return t;
  if (t < -35.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

}  // namespace

double LinModel::confidence_row(RowRef row) const { return 2.0 * logistic(margin_row(row)) - 1.0; }

std::vector<double> LinModel::confidences(const Matrix& x) const {
  Eigen::VectorXd z = x * w;
  std::vector<double> out(x.rows());
  for (long i = 0; i < x.rows(); ++i) out[i] = 2.0 * logistic(z[i] + intercept) - 1.0;
  return out;
}

std::vector<int> LinModel::predict(const Matrix& x) const {
  auto confs = confidences(x);
  std::vector<int> preds(confs.size());
  for (std::size_t i = 0; i < confs.size(); ++i) preds[i] = predict_from_confidence(confs[i]);
  return preds;
}

double logreg_objective(const Matrix& x, const std::vector<int>& y,
                        const Eigen::VectorXd& w_full, double reg, Eigen::VectorXd* grad) {
  const long n = x.rows();
  const long d = x.cols();
  if (w_full.size() != d + 1) throw Error("logreg_objective: weight vector must have d+1 entries");
  const double intercept = w_full[d];
  Eigen::VectorXd z = x * w_full.head(d);
  z.array() += intercept;

  double loss = 0.0;
  Eigen::VectorXd residual(n);  // -y * phi(-y z) / n, so grad = X^T residual
  for (long i = 0; i < n; ++i) {
    const double yz = y[i] * z[i];
    loss += log1p_exp(-yz);
    residual[i] = -y[i] * logistic(-yz) / double(n);
  }
  loss /= double(n);
  loss += 0.5 * reg * w_full.head(d).squaredNorm();

  if (grad != nullptr) {
    grad->resize(d + 1);
    grad->head(d) = x.transpose() * residual + reg * w_full.head(d);
    (*grad)[d] = residual.sum();
  }
  return loss;
}

LinModel train_logreg(const Dataset& train, const LogRegConfig& cfg) {
  train.check();
  if (cfg.reg < 0.0) throw Error("train_logreg: reg must be >= 0");
  const long n = train.x.rows();
  const long d = train.x.cols();
  if (n == 0) throw Error("train_logreg: empty dataset");

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd grad(d + 1);
  double f = logreg_objective(train.x, train.labels, w, cfg.reg, &grad);

  // L-BFGS two-loop recursion with Armijo backtracking.
  constexpr int kHistory = 10;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  int iter = 0;
  for (; iter < cfg.max_iter && grad.norm() > cfg.tol; ++iter) {
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(s_hist.size());
    for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) {
      const auto& s = s_hist.back();
      const auto& yv = y_hist.back();
      q *= s.dot(yv) / yv.squaredNorm();
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(q);
      q += (alpha[k] - beta) * s_hist[k];
    }
    Eigen::VectorXd direction = -q;
    double dir_deriv = grad.dot(direction);
    if (dir_deriv >= 0.0) {  // not a descent direction; fall back to steepest
      direction = -grad;
      dir_deriv = -grad.squaredNorm();
    }

    double step = 1.0;
    Eigen::VectorXd w_new;
    Eigen::VectorXd grad_new(d + 1);
    double f_new = f;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      w_new = w + step * direction;
      f_new = logreg_objective(train.x, train.labels, w_new, cfg.reg, &grad_new);
      if (f_new <= f + 1e-4 * step * dir_deriv) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no progress at the smallest step

    Eigen::VectorXd s = w_new - w;
    Eigen::VectorXd yv = grad_new - grad;
    const double sy = s.dot(yv);
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > kHistory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    w = std::move(w_new);
    grad = std::move(grad_new);
    f = f_new;
  }

  LinModel model;
  model.w = w.head(d);
  model.intercept = w[d];
  model.reg = cfg.reg;
  model.iterations = iter;
  model.grad_norm = grad.norm();
  model.objective = f;
  model.converged = model.grad_norm <= cfg.tol;
  if (!model.converged) {
    warn("train_logreg: stopped after " + std::to_string(iter) + " iterations with gradient norm " +
         std::to_string(model.grad_norm));
  }
  return model;
}

}  // namespace fairshift
