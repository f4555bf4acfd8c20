#include "sfzsl/regressors.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace sfzsl;
using testing::random_matrix;

namespace {

struct Fit {
  Matrix w;
  RowVector b;
};

// Ridge with an unpenalized intercept by direct normal equations.
Fit ridge_direct(const Matrix& x, const Matrix& y, double alpha) {
  const RowVector xm = x.colwise().mean(), ym = y.colwise().mean();
  const Matrix xc = x.rowwise() - xm, yc = y.rowwise() - ym;
  Matrix a = xc.transpose() * xc;
  a.diagonal().array() += alpha;
  Fit f{a.ldlt().solve(xc.transpose() * yc), RowVector()};
  f.b = ym - xm * f.w;
  return f;
}

// Leave each row out, refit, and score the held-out row.
double loo_bruteforce(const Matrix& x, const Matrix& y, double alpha) {
  double total = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Matrix xs(x.rows() - 1, x.cols()), ys(y.rows() - 1, y.cols());
    for (Eigen::Index r = 0, o = 0; r < x.rows(); ++r) {
      if (r == i) continue;
      xs.row(o) = x.row(r);
      ys.row(o++) = y.row(r);
    }
    const Fit f = ridge_direct(xs, ys, alpha);
    total += (x.row(i) * f.w + f.b - y.row(i)).squaredNorm();
  }
  return total / static_cast<double>(x.rows());
}

Matrix least_squares(const Matrix& x, const Matrix& y) { return ridge_direct(x, y, 0.0).w; }

}  // namespace

TEST_CASE("ridge recovers a noiseless linear target") {
  Rng rng(41);
  const Matrix x = random_matrix(rng, 60, 5);
  const Matrix w = random_matrix(rng, 5, 3);
  RowVector b(3);
  b << 1, -2, 0.5;
  const Matrix y = (x * w).rowwise() + b;
  const LinearAttributeMap m = fit_ridge_cv(x, y, {1e-10});
  CHECK((predict_attributes(m, x) - y).norm() / y.norm() < 1e-6);
  const LinearAttributeMap grid = fit_ridge_cv(x, y);
  CHECK(grid.alpha == 0.1);  // least shrinkage wins on a realizable target
}

TEST_CASE("single-value grid equals a direct ridge solve") {
  Rng rng(42);
  const Matrix x = random_matrix(rng, 30, 6), y = random_matrix(rng, 30, 4);
  const LinearAttributeMap m = fit_ridge_cv(x, y, {2.5});
  const Fit f = ridge_direct(x, y, 2.5);
  CHECK((m.weights - f.w).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((m.intercept - f.b).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(m.alpha == 2.5);
}

TEST_CASE("ridge alpha choice matches a brute-force leave-one-out scan") {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 15 + static_cast<int>(rng.below(20)), d = 3 + static_cast<int>(rng.below(8));
    const Matrix x = random_matrix(rng, n, d);
    const Matrix y = x * random_matrix(rng, d, 2, 0.3) + random_matrix(rng, n, 2, 1.0);
    const LinearAttributeMap m = fit_ridge_cv(x, y);
    double best = std::numeric_limits<double>::infinity();
    double best_alpha = 0;
    for (std::size_t a = 0; a < kDefaultRidgeAlphas.size(); ++a) {
      const double oracle = loo_bruteforce(x, y, kDefaultRidgeAlphas[a]);
      CHECK(m.alpha_scores[a] == doctest::Approx(oracle).epsilon(1e-9));
      CHECK(ridge_loo_error(x, y, kDefaultRidgeAlphas[a]) == doctest::Approx(oracle).epsilon(1e-9));
      if (oracle < best) best = oracle, best_alpha = kDefaultRidgeAlphas[a];
    }
    CHECK(m.alpha == best_alpha);
  }
}

TEST_CASE("ridge weights are no worse than gradient descent on the ridge objective") {
  Rng rng(44);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = random_matrix(rng, 20, 4), y = random_matrix(rng, 20, 1);
    const LinearAttributeMap m = fit_ridge_cv(x, y, {1.0});
    const Matrix xc = x.rowwise() - x.colwise().mean();
    const Matrix yc = y.rowwise() - y.colwise().mean();
    auto objective = [&](const Matrix& w) { return (xc * w - yc).squaredNorm() + w.squaredNorm(); };
    Matrix w = Matrix::Zero(4, 1);
    const double step = 1.0 / (2.0 * ((xc.transpose() * xc).norm() + 1.0));
    for (int it = 0; it < 200000; ++it) w -= step * (2.0 * xc.transpose() * (xc * w - yc) + 2.0 * w);
    CHECK(objective(m.weights) <= objective(w) + 1e-8);
  }
}

TEST_CASE("ridge grid validation") {
  const Matrix x = Matrix::Ones(3, 2), y = Matrix::Ones(3, 1);
  CHECK_THROWS_AS(fit_ridge_cv(x, y, {}), ValidationError);
  CHECK_THROWS_AS(fit_ridge_cv(x, y, {1.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(fit_ridge_cv(Matrix::Ones(1, 2), Matrix::Ones(1, 1)), ValidationError);
}

TEST_CASE("lasso satisfies the KKT conditions") {
  Rng rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 30 + static_cast<int>(rng.below(30)), d = 4 + static_cast<int>(rng.below(10));
    const Matrix x = random_matrix(rng, n, d);
    Matrix w_true = random_matrix(rng, d, 2);
    for (int j = 0; j < d; j += 2) w_true.row(j).setZero();
    const Matrix y = x * w_true + random_matrix(rng, n, 2, 0.5);
    const double alpha = 0.05 + 0.2 * rng.uniform();
    const LinearAttributeMap m = fit_lasso(x, y, alpha);
    REQUIRE(m.converged);
    const Matrix xc = x.rowwise() - x.colwise().mean();
    const Matrix yc = y.rowwise() - y.colwise().mean();
    const Matrix grad = xc.transpose() * (yc - xc * m.weights) / n;  // negative gradient of the smooth part
    for (Eigen::Index k = 0; k < 2; ++k)
      for (Eigen::Index j = 0; j < d; ++j) {
        const double wj = m.weights(j, k);
        if (wj == 0.0) CHECK(std::abs(grad(j, k)) <= alpha + 1e-6);
        else CHECK(std::abs(grad(j, k) - alpha * (wj > 0 ? 1.0 : -1.0)) <= 1e-6);
      }
  }
}

TEST_CASE("lasso at the shrinkage threshold returns exact zeros") {
  Rng rng(46);
  const Matrix x = random_matrix(rng, 40, 6), y = random_matrix(rng, 40, 3);
  const Matrix xc = x.rowwise() - x.colwise().mean();
  const Matrix yc = y.rowwise() - y.colwise().mean();
  const double threshold = (xc.transpose() * yc).cwiseAbs().maxCoeff() / 40.0;
  const LinearAttributeMap m = fit_lasso(x, y, threshold);
  CHECK(m.weights.isZero(0.0));
  CHECK((m.intercept - y.colwise().mean()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_FALSE(fit_lasso(x, y, threshold * 0.9).weights.isZero(0.0));
}

TEST_CASE("lasso with a tiny penalty approaches least squares") {
  Rng rng(47);
  const Matrix x = random_matrix(rng, 80, 5);
  const Matrix y = x * random_matrix(rng, 5, 2) + random_matrix(rng, 80, 2, 0.1);
  const LinearAttributeMap m = fit_lasso(x, y, 1e-7, 1e-12);
  CHECK((m.weights - least_squares(x, y)).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("lasso reports non-convergence") {
  Rng rng(48);
  const Matrix base = random_matrix(rng, 30, 1);
  Matrix x(30, 3);
  x << base, base + 1e-6 * random_matrix(rng, 30, 1), random_matrix(rng, 30, 1);
  const LinearAttributeMap m = fit_lasso(x, random_matrix(rng, 30, 1), 1e-6, 1e-15, 3);
  CHECK_FALSE(m.converged);
  CHECK(m.iterations[0] == 3);
  CHECK_THROWS_AS(fit_lasso(x, x, 0.0), ValidationError);
}

TEST_CASE("bayesian ridge on a noiseless target is close to least squares") {
  Rng rng(49);
  const Matrix x = random_matrix(rng, 50, 6);
  const Matrix y = (x * random_matrix(rng, 6, 2)).array() + 0.3;
  const LinearAttributeMap m = fit_bayes_ridge(x, y);
  CHECK((m.weights - least_squares(x, y)).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("bayesian ridge shrinks a pure-noise fit") {
  Rng rng(50);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = random_matrix(rng, 25, 8), y = random_matrix(rng, 25, 1);
    const LinearAttributeMap m = fit_bayes_ridge(x, y);
    CHECK(m.weights.norm() < least_squares(x, y).norm());
  }
}

TEST_CASE("bayesian ridge weights are the posterior mean at the returned precisions") {
  Rng rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = random_matrix(rng, 40, 5);
    const Matrix y = x * random_matrix(rng, 5, 3) + random_matrix(rng, 40, 3, 0.7);
    const LinearAttributeMap m = fit_bayes_ridge(x, y);
    CHECK(m.converged);
    for (Eigen::Index k = 0; k < 3; ++k) {
      const Vector again = bayes_posterior_mean(x, y.col(k), m.noise_precision[k], m.weight_precision[k]);
      CHECK((again - m.weights.col(k)).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(m.iterations[k] <= 300);
    }
  }
}

TEST_CASE("bayesian ridge precisions satisfy the evidence update") {
  Rng rng(52);
  const Matrix x = random_matrix(rng, 60, 4);
  const Matrix y = x * random_matrix(rng, 4, 1) + random_matrix(rng, 60, 1, 0.5);
  BayesRidgeOptions opt;
  opt.tol = 1e-12;
  opt.max_iter = 10000;
  const LinearAttributeMap m = fit_bayes_ridge(x, y, opt);
  const Matrix xc = x.rowwise() - x.colwise().mean();
  const Vector yc = (y.rowwise() - y.colwise().mean()).col(0);
  const double a = m.noise_precision[0], l = m.weight_precision[0];
  const Vector s = Eigen::SelfAdjointEigenSolver<Matrix>(xc.transpose() * xc).eigenvalues();
  const double gamma = (a * s.array() / (l + a * s.array())).sum();
  const Vector w = m.weights.col(0);
  CHECK(l == doctest::Approx((gamma + 2e-6) / (w.squaredNorm() + 2e-6)).epsilon(1e-8));
  CHECK(a == doctest::Approx((60 - gamma + 2e-6) / ((yc - xc * w).squaredNorm() + 2e-6)).epsilon(1e-8));
}

TEST_CASE("predict_attributes") {
  LinearAttributeMap m;
  m.weights = Matrix::Zero(3, 2);
  m.intercept = RowVector(2);
  m.intercept << 4, -1;
  Rng rng(53);
  const Matrix x = random_matrix(rng, 5, 3);
  const Matrix p = predict_attributes(m, x);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(p.row(i) == m.intercept);

  m.weights = Matrix::Identity(3, 3);
  m.intercept = RowVector::Constant(3, 0.5);
  CHECK((predict_attributes(m, x) - (x.array() + 0.5).matrix()).cwiseAbs().maxCoeff() == 0.0);

  m.weights = random_matrix(rng, 3, 2);
  m.intercept = random_matrix(rng, 1, 2);
  const Matrix q = predict_attributes(m, x);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index k = 0; k < 2; ++k) {
      double v = m.intercept(k);
      for (Eigen::Index j = 0; j < 3; ++j) v += x(i, j) * m.weights(j, k);
      CHECK(q(i, k) == doctest::Approx(v).epsilon(1e-14));
    }
  const Matrix x2 = random_matrix(rng, 5, 3);
  const double a = 0.3, b = 1.9;
  const Matrix lhs = predict_attributes(m, a * x + b * x2);
  const Matrix rhs = (a * predict_attributes(m, x) + b * predict_attributes(m, x2)).rowwise() - (a + b - 1) * m.intercept;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(predict_attributes(m, Matrix::Zero(1, 4)), ShapeError);
}

TEST_CASE("fits are deterministic and serialize losslessly") {
  Rng rng(54);
  const Matrix x = random_matrix(rng, 30, 4), y = random_matrix(rng, 30, 2);
  for (const LinearAttributeMap& m : {fit_lasso(x, y), fit_ridge_cv(x, y), fit_bayes_ridge(x, y)}) {
    const LinearAttributeMap back = linear_map_from_json(to_json(m));
    CHECK(back.method == m.method);
    CHECK(back.weights == m.weights);
    CHECK(back.intercept == m.intercept);
    CHECK(back.alpha == m.alpha);
  }
  CHECK(fit_lasso(x, y).weights == fit_lasso(x, y).weights);
  CHECK(fit_bayes_ridge(x, y).weights == fit_bayes_ridge(x, y).weights);
  CHECK(regressor_method_from_string("bayes-ridge") == RegressorMethod::BayesRidge);
  CHECK_THROWS(linear_map_from_json(nlohmann::json::object()));
}
