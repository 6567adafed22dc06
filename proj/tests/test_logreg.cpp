#include <doctest.h>

#include <cmath>

#include "fairshift/logreg.hpp"
#include "fairshift/metrics.hpp"
#include "test_util.hpp"

using namespace fairshift;

TEST_CASE("train_logreg: symmetric pair gives positive slope, zero intercept") {
  const auto ds = testutil::make_dataset({{-1.0}, {1.0}}, {-1, +1}, {0, 1});
  const auto model = train_logreg(ds, {0.1, 1e-9, 2000});
  CHECK(model.converged);
  CHECK(model.w[0] > 0.0);
  CHECK(std::abs(model.intercept) < 1e-6);
}

TEST_CASE("logreg gradient matches central finite differences") {
  Rng rng(41);
  const auto ds = testutil::random_dataset(rng, 120, 6);
  const double reg = 0.05;
  const double h = 1e-6;

  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd w(ds.dim() + 1);
    for (long j = 0; j < w.size(); ++j) w[j] = rng.uniform01() * 2.0 - 1.0;
    Eigen::VectorXd grad;
    logreg_objective(ds.x, ds.labels, w, reg, &grad);
    for (long j = 0; j < w.size(); ++j) {
      Eigen::VectorXd wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      const double fd =
          (logreg_objective(ds.x, ds.labels, wp, reg) - logreg_objective(ds.x, ds.labels, wm, reg)) /
          (2.0 * h);
      const double denom = std::max(std::abs(fd), 1e-8);
      CHECK(std::abs(grad[j] - fd) / denom < 1e-5);
    }
  }
}

TEST_CASE("train_logreg: huge regularization shrinks the weights away") {
  Rng rng(43);
  const auto ds = testutil::random_dataset(rng, 200, 4);
  const auto model = train_logreg(ds, {1e6, 1e-8, 2000});
  CHECK(model.w.norm() < 1e-5);
}

TEST_CASE("logreg confidence: recentered logistic value") {
  LinModel model;
  model.w = Eigen::VectorXd::Ones(1);
  model.intercept = 0.0;

  Matrix x(3, 1);
  x << 0.0, std::log(3.0), -std::log(3.0);
  const auto confs = model.confidences(x);
  CHECK(confs[0] == doctest::Approx(0.0));        // phi(0) = 1/2
  CHECK(confs[1] == doctest::Approx(0.5));        // phi(ln 3) = 3/4
  CHECK(confs[2] == doctest::Approx(-0.5));
  // Strictly increasing in the margin, bounded by (-1, 1).
  double prev = -1.0;
  for (double z = -20.0; z <= 20.0; z += 0.5) {
    Matrix one(1, 1);
    one(0, 0) = z;
    const double c = model.confidences(one)[0];
    CHECK(c > prev);
    CHECK(c > -1.0);
    CHECK(c < 1.0);
    prev = c;
  }
}

TEST_CASE("train_logreg: objective never exceeds the w=0 value ln 2") {
  Rng rng(47);
  for (int rep = 0; rep < 10; ++rep) {
    const auto ds = testutil::random_dataset(rng, 100, 3);
    const auto model = train_logreg(ds, {0.01, 1e-7, 1000});
    CHECK(model.objective <= std::log(2.0) + 1e-12);
    // Sign consistency of predictions.
    const auto confs = model.confidences(ds.x);
    const auto preds = model.predict(ds.x);
    for (std::size_t i = 0; i < confs.size(); ++i) {
      CHECK(preds[i] == predict_from_confidence(confs[i]));
    }
  }
}

TEST_CASE("train_logreg: validation") {
  const auto ds = testutil::make_dataset({{0.0}, {1.0}}, {+1, -1}, {1, 0});
  CHECK_THROWS_AS(train_logreg(ds, {-1.0, 1e-6, 100}), Error);
}
