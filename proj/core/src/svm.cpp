#include "fairshift/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <unordered_map>

#include "fairshift/rng.hpp"

namespace fairshift {

namespace {

constexpr double kAlphaEps = 1e-12;

/// LRU cache of full kernel rows for the active training matrix.
class KernelCache {
 public:
  KernelCache(const Matrix& x, const KernelSpec& kernel, std::size_t cache_mb)
      : x_(x), kernel_(kernel) {
    const std::size_t row_bytes = sizeof(double) * static_cast<std::size_t>(x.rows());
    capacity_ = std::max<std::size_t>(2, cache_mb * (1 << 20) / std::max<std::size_t>(1, row_bytes));
    if (kernel_.kind == KernelSpec::Kind::Gaussian) {
      sq_norms_ = x.rowwise().squaredNorm();
    }
  }

  const Eigen::VectorXd& row(long i) {
    auto it = map_.find(i);
    if (it != map_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.lru_it);
      return it->second.row;
    }
    if (map_.size() >= capacity_) {
      map_.erase(lru_.back());
      lru_.pop_back();
    }
    Eigen::VectorXd r;
    if (kernel_.kind == KernelSpec::Kind::Linear) {
      r = x_ * x_.row(i).transpose();
    } else {
      r = (-kernel_.gamma *
           (sq_norms_.array() + sq_norms_[i] - 2.0 * (x_ * x_.row(i).transpose()).array()))
              .exp()
              .matrix();
    }
    lru_.push_front(i);
    auto [pos, _] = map_.emplace(i, Entry{std::move(r), lru_.begin()});
    return pos->second.row;
  }

 private:
  struct Entry {
    Eigen::VectorXd row;
    std::list<long>::iterator lru_it;
  };
  const Matrix& x_;
  KernelSpec kernel_;
  Eigen::VectorXd sq_norms_;
  std::size_t capacity_;
  std::unordered_map<long, Entry> map_;
  std::list<long> lru_;
};

double resolve_gamma(const Matrix& x, const KernelSpec& kernel) {
  if (kernel.kind != KernelSpec::Kind::Gaussian || kernel.gamma > 0.0) return kernel.gamma;
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / double(x.size());
  const double denom = double(x.cols()) * var;
  if (denom <= 1e-24) throw Error("train_svm: cannot fit gaussian bandwidth on constant data");
  return 1.0 / denom;
}

}  // namespace

double kernel_value(const KernelSpec& k, RowRef a, RowRef b) {
  if (k.kind == KernelSpec::Kind::Linear) return a.dot(b);
  return std::exp(-k.gamma * (a - b).squaredNorm());
}

double SvmModel::confidence_row(RowRef row) const {
  double f = intercept;
  for (long i = 0; i < support_vectors.rows(); ++i) {
    f += coef[i] * kernel_value(kernel, support_vectors.row(i), row);
  }
  return f / confidence_scale;
}

std::vector<double> SvmModel::confidences(const Matrix& x) const {
  std::vector<double> out(x.rows(), intercept);
  if (support_vectors.rows() == 0) {
    for (double& v : out) v /= confidence_scale;
    return out;
  }
  Eigen::Map<const Eigen::VectorXd> coef_vec(coef.data(), static_cast<long>(coef.size()));
  Eigen::VectorXd f;
  if (kernel.kind == KernelSpec::Kind::Linear) {
    const Eigen::VectorXd w = support_vectors.transpose() * coef_vec;
    f = x * w;
  } else {
    const Eigen::VectorXd sv_sq = support_vectors.rowwise().squaredNorm();
    const Eigen::VectorXd x_sq = x.rowwise().squaredNorm();
    // dist^2(t, i) = |x_t|^2 + |sv_i|^2 - 2 x_t.sv_i, one block at a time to
    // bound memory on large evaluation sets.
    const long block = 4096;
    f.resize(x.rows());
    for (long start = 0; start < x.rows(); start += block) {
      const long count = std::min(block, x.rows() - start);
      Matrix cross = x.middleRows(start, count) * support_vectors.transpose();
      for (long t = 0; t < count; ++t) {
        double acc = 0.0;
        for (long i = 0; i < support_vectors.rows(); ++i) {
          acc += coef[i] * std::exp(-kernel.gamma * (x_sq[start + t] + sv_sq[i] - 2.0 * cross(t, i)));
        }
        f[start + t] = acc;
      }
    }
  }
  for (long t = 0; t < x.rows(); ++t) out[t] = (f[t] + intercept) / confidence_scale;
  return out;
}

std::vector<int> SvmModel::predict(const Matrix& x) const {
  auto confs = confidences(x);
  std::vector<int> preds(confs.size());
  for (std::size_t i = 0; i < confs.size(); ++i) preds[i] = predict_from_confidence(confs[i]);
  return preds;
}

SvmModel train_svm(const Dataset& train, const SvmConfig& cfg) {
  train.check();
  if (cfg.C <= 0.0) throw Error("train_svm: C must be positive");
  if (cfg.kernel.kind == KernelSpec::Kind::Gaussian && cfg.kernel.gamma < 0.0) {
    throw Error("train_svm: gaussian bandwidth must be positive (or 0 for the heuristic)");
  }
  if (train.n() == 0) throw Error("train_svm: empty dataset");
  const long positives = train.positive_count();
  if (positives == 0 || positives == train.n()) {
    throw Error("train_svm: degenerate dataset with a single label value");
  }

  KernelSpec kernel = cfg.kernel;
  kernel.gamma = resolve_gamma(train.x, kernel);

  // Uniform subsample for kernel tractability on large splits.
  Matrix x;
  std::vector<int> y;
  if (cfg.subsample_cap > 0 && train.n() > cfg.subsample_cap) {
    std::vector<int> idx(train.n());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(cfg.subsample_seed);
    rng.shuffle(idx);
    idx.resize(cfg.subsample_cap);
    std::sort(idx.begin(), idx.end());
    x.resize(cfg.subsample_cap, train.x.cols());
    y.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      x.row(static_cast<long>(i)) = train.x.row(idx[i]);
      y.push_back(train.labels[idx[i]]);
    }
    info("train_svm: subsampled " + std::to_string(cfg.subsample_cap) + " of " +
         std::to_string(train.n()) + " rows");
  } else {
    x = train.x;
    y = train.labels;
  }
  const long n = x.rows();
  const double C = cfg.C;
  const long max_iter = cfg.max_iter > 0 ? cfg.max_iter : std::max<long>(100000, 60 * n);

  KernelCache cache(x, kernel, cfg.cache_mb);
  std::vector<double> alpha(n, 0.0);
  // g[t] = sum_j alpha_j y_j K(x_j, x_t); the decision value without intercept.
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);

  auto in_up = [&](long t) { return y[t] == +1 ? alpha[t] < C - kAlphaEps : alpha[t] > kAlphaEps; };
  auto in_low = [&](long t) { return y[t] == +1 ? alpha[t] > kAlphaEps : alpha[t] < C - kAlphaEps; };

  long iter = 0;
  int stalls = 0;
  double violation = std::numeric_limits<double>::infinity();
  for (; iter < max_iter; ++iter) {
    long i = -1, j = -1;
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (long t = 0; t < n; ++t) {
      const double v = y[t] - g[t];
      if (in_up(t) && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low(t) && v < m_low) {
        m_low = v;
        j = t;
      }
    }
    if (i < 0 || j < 0) {  // every multiplier is pinned at a bound
      violation = 0.0;
      break;
    }
    violation = m_up - m_low;
    if (violation <= cfg.tol) break;
    if (stalls >= 2) break;  // maximal pair cannot move; numerically stuck

    const Eigen::VectorXd& ki = cache.row(i);
    const Eigen::VectorXd kj_copy = cache.row(j);  // row(i) may evict row(j)
    const double kii = ki[i], kjj = kj_copy[j], kij = ki[j];

    const double s = double(y[i]) * double(y[j]);
    double lo, hi;
    if (y[i] != y[j]) {
      lo = std::max(0.0, alpha[j] - alpha[i]);
      hi = std::min(C, C + alpha[j] - alpha[i]);
    } else {
      lo = std::max(0.0, alpha[i] + alpha[j] - C);
      hi = std::min(C, alpha[i] + alpha[j]);
    }
    if (hi - lo < kAlphaEps) {
      ++stalls;
      continue;
    }

    const double e_i = g[i] - y[i];
    const double e_j = g[j] - y[j];
    const double quad = kii + kjj - 2.0 * kij;
    double aj_new;
    if (quad > 1e-12) {
      aj_new = std::clamp(alpha[j] + y[j] * (e_i - e_j) / quad, lo, hi);
    } else {
      // Flat direction: move to the endpoint that lowers the objective.
      const double slope = y[j] * (e_i - e_j);
      aj_new = slope > 0.0 ? hi : lo;
    }
    const double dj = aj_new - alpha[j];
    if (std::abs(dj) < kAlphaEps) {
      ++stalls;
      continue;
    }
    stalls = 0;
    const double di = -s * dj;
    alpha[i] += di;
    alpha[j] = aj_new;

    g += (di * y[i]) * ki + (dj * y[j]) * kj_copy;
  }

  const bool converged = violation <= cfg.tol;
  if (!converged) {
    warn("train_svm: SMO stopped at iteration cap " + std::to_string(max_iter) +
         " with KKT violation " + std::to_string(violation));
  }

  // Intercept from free support vectors; fall back to the violation midpoint.
  double b = 0.0;
  long free_count = 0;
  for (long t = 0; t < n; ++t) {
    if (alpha[t] > kAlphaEps && alpha[t] < C - kAlphaEps) {
      b += y[t] - g[t];
      ++free_count;
    }
  }
  if (free_count > 0) {
    b /= double(free_count);
  } else {
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (long t = 0; t < n; ++t) {
      const double v = y[t] - g[t];
      if (in_up(t)) m_up = std::max(m_up, v);
      if (in_low(t)) m_low = std::min(m_low, v);
    }
    b = 0.5 * (m_up + m_low);
  }

  SvmModel model;
  model.kernel = kernel;
  model.C = C;
  model.intercept = b;
  model.converged = converged;
  model.iterations = iter;
  model.kkt_violation = violation;
  model.trained_rows = n;

  double dual = 0.0;  // sum alpha - 0.5 * alpha^T Q alpha
  for (long t = 0; t < n; ++t) dual += alpha[t] - 0.5 * alpha[t] * y[t] * g[t];
  model.dual_objective = dual;

  std::vector<long> sv;
  for (long t = 0; t < n; ++t) {
    if (alpha[t] > kAlphaEps) sv.push_back(t);
  }
  model.support_vectors.resize(static_cast<long>(sv.size()), x.cols());
  model.coef.reserve(sv.size());
  for (std::size_t k = 0; k < sv.size(); ++k) {
    model.support_vectors.row(static_cast<long>(k)) = x.row(sv[k]);
    model.coef.push_back(alpha[sv[k]] * y[sv[k]]);
  }
  return model;
}

double svm_primal_objective(const Matrix& x, const std::vector<int>& y, const SvmModel& model) {
  // |w|^2 in feature space from the dual coefficients.
  double w_sq = 0.0;
  for (long i = 0; i < model.support_vectors.rows(); ++i) {
    for (long j = 0; j < model.support_vectors.rows(); ++j) {
      w_sq += model.coef[i] * model.coef[j] *
              kernel_value(model.kernel, model.support_vectors.row(i), model.support_vectors.row(j));
    }
  }
  double hinge = 0.0;
  for (long t = 0; t < x.rows(); ++t) {
    const double f = model.confidence_row(x.row(t)) * model.confidence_scale;
    hinge += std::max(0.0, 1.0 - y[t] * f);
  }
  return 0.5 * w_sq + model.C * hinge;
}

}  // namespace fairshift
