#include <doctest.h>

#include <cmath>

#include "fairshift/svm.hpp"
#include "test_util.hpp"

using namespace fairshift;

TEST_CASE("train_svm: symmetric two-point problem") {
  const auto ds = testutil::make_dataset({{-1.0}, {1.0}}, {-1, +1}, {0, 1});
  SvmConfig cfg;
  cfg.C = 100.0;
  cfg.tol = 1e-6;
  const auto model = train_svm(ds, cfg);
  CHECK(model.converged);

  Matrix probe(3, 1);
  probe << 0.0, 0.5, -0.5;
  const auto confs = model.confidences(probe);
  CHECK(confs[0] == doctest::Approx(0.0).epsilon(1e-6));  // boundary at the midpoint
  CHECK(confs[1] > 0.0);
  CHECK(confs[2] < 0.0);
}

TEST_CASE("train_svm: dual objective matches the enumeration QP oracle") {
  Rng rng(53);
  for (int rep = 0; rep < 12; ++rep) {
    // 6 random 2-D points with both classes present.
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) {
      rows.push_back({rng.uniform01() * 4 - 2, rng.uniform01() * 4 - 2});
      labels.push_back(rng.bernoulli(0.5) ? +1 : -1);
    }
    labels[0] = +1;
    labels[1] = -1;
    std::vector<std::uint8_t> mask(6, 0);
    mask[0] = 1;
    const auto ds = testutil::make_dataset(rows, labels, mask);

    SvmConfig cfg;
    cfg.C = 1.0;
    cfg.tol = 1e-8;
    if (rep % 2 == 1) {
      cfg.kernel.kind = KernelSpec::Kind::Gaussian;
      cfg.kernel.gamma = 0.7;
    }
    const auto model = train_svm(ds, cfg);
    CHECK(model.converged);

    KernelSpec resolved = cfg.kernel;
    resolved.gamma = model.kernel.gamma;
    const double oracle = testutil::brute_svm_dual(ds.x, ds.labels, resolved, cfg.C);
    CHECK(std::abs(model.dual_objective - oracle) <= 1e-4);
  }
}

TEST_CASE("train_svm: duplicate points exercise the flat pairwise direction") {
  // Identical rows make K_ii + K_jj - 2K_ij collapse to 0 under the linear
  // kernel, forcing the endpoint step; the oracle keeps the solver honest.
  const auto ds = testutil::make_dataset(
      {{1.0, 0.0}, {1.0, 0.0}, {-1.0, 0.5}, {-1.0, 0.5}, {0.2, -0.4}, {0.2, -0.4}},
      {+1, +1, -1, -1, +1, -1}, {1, 0, 0, 0, 0, 0});
  SvmConfig cfg;
  cfg.tol = 1e-8;
  cfg.C = 1.0;
  const auto model = train_svm(ds, cfg);
  const double oracle = testutil::brute_svm_dual(ds.x, ds.labels, model.kernel, cfg.C);
  CHECK(std::abs(model.dual_objective - oracle) <= 1e-4);
}

TEST_CASE("train_svm: dual equality constraint and KKT residual") {
  Rng rng(57);
  const auto ds = testutil::random_dataset(rng, 80, 3);
  SvmConfig cfg;
  cfg.tol = 1e-4;
  const auto model = train_svm(ds, cfg);
  CHECK(model.converged);
  CHECK(model.kkt_violation <= cfg.tol);
  // sum(alpha_i y_i) = 0 within tolerance: the coef vector stores alpha*y.
  double sum = 0.0;
  for (double c : model.coef) sum += c;
  CHECK(std::abs(sum) < 1e-9);
}

TEST_CASE("train_svm: free support vectors sit on the margin") {
  Rng rng(59);
  const auto ds = testutil::random_dataset(rng, 60, 2, 0.05);
  SvmConfig cfg;
  cfg.C = 1.0;
  cfg.tol = 1e-6;
  const auto model = train_svm(ds, cfg);
  CHECK(model.converged);
  long free_svs = 0;
  for (long i = 0; i < model.support_vectors.rows(); ++i) {
    const double a = std::abs(model.coef[i]);
    if (a > 1e-8 && a < model.C - 1e-8) {
      ++free_svs;
      CHECK(std::abs(model.confidence_row(model.support_vectors.row(i))) ==
            doctest::Approx(1.0).epsilon(1e-4));
    }
  }
  CHECK(free_svs > 0);
}

TEST_CASE("train_svm: duality gap certifies the solution") {
  Rng rng(61);
  for (int rep = 0; rep < 5; ++rep) {
    const auto ds = testutil::random_dataset(rng, 50, 2);
    SvmConfig cfg;
    cfg.tol = 1e-6;
    if (rep % 2 == 1) cfg.kernel.kind = KernelSpec::Kind::Gaussian;
    const auto model = train_svm(ds, cfg);
    CHECK(model.converged);
    const double primal = svm_primal_objective(ds.x, ds.labels, model);
    CHECK(primal + 1e-9 >= model.dual_objective);
    CHECK((primal - model.dual_objective) / std::max(1.0, std::abs(primal)) <= 1e-3);
  }
}

TEST_CASE("svm confidence: gaussian decays to the intercept far away") {
  Rng rng(63);
  const auto ds = testutil::random_dataset(rng, 40, 2);
  SvmConfig cfg;
  cfg.kernel.kind = KernelSpec::Kind::Gaussian;
  cfg.kernel.gamma = 0.5;
  const auto model = train_svm(ds, cfg);

  const double reach = 10.0 / std::sqrt(model.kernel.gamma);
  Matrix far(1, 2);
  far << reach, reach;
  CHECK(model.confidences(far)[0] == doctest::Approx(model.intercept).epsilon(1e-9));
}

TEST_CASE("train_svm: subsampling is deterministic and capped") {
  Rng rng(67);
  const auto ds = testutil::random_dataset(rng, 400, 2);
  SvmConfig cfg;
  cfg.subsample_cap = 150;
  cfg.subsample_seed = 9;
  const auto m1 = train_svm(ds, cfg);
  const auto m2 = train_svm(ds, cfg);
  CHECK(m1.trained_rows == 150);
  CHECK(m1.coef == m2.coef);
  CHECK(m1.intercept == m2.intercept);
  cfg.subsample_seed = 10;
  const auto m3 = train_svm(ds, cfg);
  CHECK(m1.coef != m3.coef);
}

TEST_CASE("train_svm: validation errors") {
  const auto ds = testutil::make_dataset({{0.0}, {1.0}}, {+1, -1}, {1, 0});
  SvmConfig cfg;
  cfg.C = 0.0;
  CHECK_THROWS_AS(train_svm(ds, cfg), Error);
  const auto degenerate = testutil::make_dataset({{0.0}, {1.0}}, {+1, +1}, {1, 0});
  CHECK_THROWS_AS(train_svm(degenerate, SvmConfig{}), Error);
}
