#include "sfzsl/attribute_space.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace sfzsl;
using testing::random_matrix;

namespace {

// Plain gradient descent on the ridge objective, run to a tiny gradient norm.
RowVector ridge_by_descent(const Matrix& seen, const RowVector& target, double lambda) {
  const Matrix g = seen * seen.transpose();
  const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(g).eigenvalues().maxCoeff();
  const double step = 1.0 / (2.0 * (lmax + lambda));
  const RowVector rhs = target * seen.transpose();
  RowVector beta = RowVector::Zero(seen.rows());
  for (int it = 0; it < 2000000; ++it) {
    const RowVector grad = 2.0 * (beta * g - rhs) + 2.0 * lambda * beta;
    if (grad.norm() < 1e-12) break;
    beta -= step * grad;
  }
  return beta;
}

}  // namespace

TEST_CASE("ridge correlation matches gradient descent") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int s = 3 + static_cast<int>(rng.below(6)), u = 1 + static_cast<int>(rng.below(3));
    const int k = 4 + static_cast<int>(rng.below(10));
    const Matrix seen = random_matrix(rng, s, k);
    const Matrix unseen = random_matrix(rng, u, k);
    const CorrelationMatrix corr = ridge_correlation(seen, unseen, 1.0);
    REQUIRE(corr.coefficients.rows() == u);
    REQUIRE(corr.coefficients.cols() == s);
    for (int r = 0; r < u; ++r) {
      const RowVector oracle = ridge_by_descent(seen, unseen.row(r), 1.0);
      CHECK((corr.coefficients.row(r) - oracle).cwiseAbs().maxCoeff() < 1e-6);
      CHECK(ridge_correlation_objective(seen, unseen.row(r), corr.coefficients.row(r), 1.0) <=
            ridge_correlation_objective(seen, unseen.row(r), oracle, 1.0) + 1e-8);
    }
  }
}

TEST_CASE("ridge coefficient norm shrinks as lambda grows") {
  Rng rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix seen = random_matrix(rng, 5, 8);
    const Matrix unseen = random_matrix(rng, 2, 8);
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0, 1e4, 1e8}) {
      const double norm = ridge_correlation(seen, unseen, lambda).coefficients.norm();
      CHECK(norm < previous);
      previous = norm;
    }
    CHECK(previous < 1e-6);
  }
}

TEST_CASE("ridge correlation input checks") {
  const Matrix seen = Matrix::Ones(2, 3);
  CHECK_THROWS_AS(ridge_correlation(seen, Matrix::Ones(1, 4), 1.0), ShapeError);
  CHECK_THROWS_AS(ridge_correlation(seen, Matrix::Ones(1, 3), -1.0), ValidationError);
  CHECK_THROWS(ridge_correlation(seen, Matrix::Ones(1, 3), 0.0));  // duplicate seen rows: singular Gram
  CHECK_NOTHROW(ridge_correlation(seen, Matrix::Ones(1, 3), 1.0));
}

TEST_CASE("an unseen class equal to a seen class at lambda 0 gets a unit coefficient") {
  Matrix seen(3, 4);
  seen << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1;
  const CorrelationMatrix c = ridge_correlation(seen, seen.row(1), 0.0);
  CHECK(c.coefficients(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(c.coefficients(0, 0)) < 1e-12);
}

TEST_CASE("seen prototypes are class means") {
  Matrix z(4, 2);
  z << 1, 2, 3, 4, 10, 10, -1, 0;
  const PrototypeSet p = latent_prototypes_seen(z, std::vector<int>{0, 0, 1, 0}, {"a", "b"});
  CHECK(p.vectors(0, 0) == doctest::Approx(1.0));
  CHECK(p.vectors(0, 1) == doctest::Approx(2.0));
  CHECK(p.vectors(1, 0) == 10.0);
  CHECK_THROWS_AS(latent_prototypes_seen(z, std::vector<int>{0, 0, 0, 0}, {"a", "b"}), ValidationError);
}

TEST_CASE("prototype transfer is linear") {
  Rng rng(33);
  CorrelationMatrix corr{random_matrix(rng, 3, 5), 1.0};
  const std::vector<std::string> seen{"a", "b", "c", "d", "e"}, unseen{"x", "y", "z"};
  const PrototypeSet p1{seen, random_matrix(rng, 5, 4)};
  const PrototypeSet p2{seen, random_matrix(rng, 5, 4)};
  const double a = 0.7, b = -2.3;
  const PrototypeSet mix{seen, a * p1.vectors + b * p2.vectors};
  const Matrix lhs = latent_prototypes_unseen(corr, mix, unseen).vectors;
  const Matrix rhs = a * latent_prototypes_unseen(corr, p1, unseen).vectors + b * latent_prototypes_unseen(corr, p2, unseen).vectors;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cosine similarity") {
  RowVector a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  CHECK(cosine_similarity(a, a) == 1.0);
  CHECK(cosine_similarity(a, b) == 0.0);
  Rng rng(34);
  for (int i = 0; i < 100; ++i) {
    const RowVector u = random_matrix(rng, 1, 6), v = random_matrix(rng, 1, 6);
    CHECK(std::abs(cosine_similarity(7.0 * u, v) - cosine_similarity(u, v)) < 1e-12);
    CHECK(std::abs(cosine_similarity(u, 7.0 * v) - cosine_similarity(u, v)) < 1e-12);
    const double c = cosine_similarity(u, v);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
  }
  CHECK_THROWS_AS(cosine_similarity(RowVector::Zero(2), a), NumericError);
}

TEST_CASE("predict_latent") {
  Rng rng(35);
  const Matrix protos = random_matrix(rng, 4, 5);
  CHECK(predict_latent(protos.row(2), protos) == 2);
  CHECK(predict_latent(3.0 * protos.row(1), protos) == 1);
  for (int trial = 0; trial < 200; ++trial) {
    const RowVector q = random_matrix(rng, 1, 5);
    std::size_t best = 0;
    double best_sim = -2;
    for (Eigen::Index c = 0; c < protos.rows(); ++c) {
      const double s = q.dot(protos.row(c)) / (q.norm() * protos.row(c).norm());
      if (s > best_sim) best_sim = s, best = static_cast<std::size_t>(c);
    }
    CHECK(predict_latent(q, protos) == best);
  }
  Matrix zero = protos;
  zero.row(0).setZero();
  CHECK_THROWS_AS(predict_latent(protos.row(1), zero), NumericError);
}

TEST_CASE("ties go to the first class") {
  Matrix protos(3, 2);
  protos << 0, 1, 1, 0, 2, 0;
  RowVector q(2);
  q << 1, 0;
  CHECK(predict_latent(q, protos) == 1);
  RowVector row(4);
  row << 0.5, 0.9, 0.9, 0.1;
  CHECK(argmax_first(row) == 1);
}

TEST_CASE("predict_combined") {
  Rng rng(36);
  const Matrix attrs = random_matrix(rng, 4, 6);
  const Matrix protos = random_matrix(rng, 4, 5);
  SUBCASE("both terms agree") { CHECK(predict_combined(attrs.row(3), protos.row(3), attrs, protos) == 3); }
  SUBCASE("uniform semantic term reduces to the latent rule") {
    Matrix same(4, 6);
    for (int c = 0; c < 4; ++c) same.row(c) = attrs.row(0);
    for (int trial = 0; trial < 100; ++trial) {
      const RowVector z = random_matrix(rng, 1, 5);
      CHECK(predict_combined(attrs.row(1), z, same, protos) == predict_latent(z, protos));
    }
  }
  SUBCASE("brute force") {
    for (int trial = 0; trial < 200; ++trial) {
      const RowVector s = random_matrix(rng, 1, 6), z = random_matrix(rng, 1, 5);
      std::size_t best = 0;
      double best_score = -10;
      for (int c = 0; c < 4; ++c) {
        const double score = cosine_similarity(s, attrs.row(c)) + cosine_similarity(z, protos.row(c));
        if (score > best_score) best_score = score, best = static_cast<std::size_t>(c);
      }
      CHECK(predict_combined(s, z, attrs, protos) == best);
    }
  }
  CHECK_THROWS_AS(predict_combined(attrs.row(0), protos.row(0), attrs.topRows(3), protos), ShapeError);
}

TEST_CASE("cosine matrix agrees with pairwise cosine") {
  Rng rng(37);
  const Matrix q = random_matrix(rng, 5, 3), t = random_matrix(rng, 4, 3);
  const Matrix m = cosine_matrix(q, t);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) CHECK(m(i, j) == doctest::Approx(cosine_similarity(q.row(i), t.row(j))).epsilon(1e-14));
}
