#include "sfzsl/losses.hpp"
#include "sfzsl/tensor.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace sfzsl;
using testing::flatten;
using testing::random_matrix;
using testing::unflatten;

namespace {

// Straight transcription of batch-hard selection, used as the oracle.
double triplet_oracle(const Matrix& z, const std::vector<int>& labels, double margin) {
  double total = 0;
  int anchors = 0;
  for (Eigen::Index a = 0; a < z.rows(); ++a) {
    double far_pos = -1, near_neg = -1;
    for (Eigen::Index j = 0; j < z.rows(); ++j) {
      if (j == a) continue;
      const double d = (z.row(a) - z.row(j)).squaredNorm();
      if (labels[a] == labels[j]) far_pos = std::max(far_pos, d);
      else if (near_neg < 0 || d < near_neg) near_neg = d;
    }
    if (far_pos < 0 || near_neg < 0) continue;
    total += std::max(0.0, far_pos - near_neg + margin);
    ++anchors;
  }
  return total / anchors;
}

std::vector<int> random_labels(Rng& rng, int n, int classes) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i < classes ? i : static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  return labels;
}

}  // namespace

TEST_CASE("triplet loss of identical latents equals the margin") {
  const Matrix z = Matrix::Constant(6, 3, 0.7);
  const std::vector<int> labels{0, 0, 1, 1, 2, 2};
  const LossAndGrad r = triplet_loss(z, labels, 1.5);
  CHECK(r.loss == doctest::Approx(1.5));
}

TEST_CASE("triplet loss vanishes for well separated classes") {
  Matrix z(4, 2);
  z << 0, 0, 0.1, 0, 10, 0, 10.1, 0;
  const LossAndGrad r = triplet_loss(z, std::vector<int>{0, 0, 1, 1}, 1.0);
  CHECK(r.loss == 0.0);
  CHECK(r.grad.isZero());
}

TEST_CASE("triplet loss rejects a batch without a valid triplet") {
  const Matrix z = Matrix::Zero(3, 2);
  CHECK_THROWS_AS(triplet_loss(z, std::vector<int>{0, 1, 2}, 1.0), DegenerateBatch);
  CHECK_THROWS_AS(triplet_loss(z, std::vector<int>{4, 4, 4}, 1.0), DegenerateBatch);
  CHECK_THROWS_AS(triplet_loss(z, std::vector<int>{0, 0}, 1.0), ShapeError);
  CHECK_THROWS_AS(triplet_loss(Matrix::Zero(2, 2), std::vector<int>{0, 0}, 0.0), ValidationError);
}

TEST_CASE("triplet loss matches the selection oracle and finite differences") {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 8 + static_cast<int>(rng.below(8));
    const Matrix z = random_matrix(rng, n, 5);
    const auto labels = random_labels(rng, n, 3);
    const LossAndGrad r = triplet_loss(z, labels, 1.0);
    CHECK(r.loss == doctest::Approx(triplet_oracle(z, labels, 1.0)).epsilon(1e-12));
    const double err = grad_check([&](const Vector& v) { return triplet_loss(unflatten(v, n, 5), labels, 1.0).loss; },
                                  flatten(z), flatten(r.grad));
    CHECK(err < 1e-5);
  }
}

TEST_CASE("attention loss with equal scores is ln 2") {
  Matrix sem(1, 2), att(1, 2), attrs(2, 2);
  sem << 1, 1;
  att << 0.5, 0.5;
  attrs << 1, 0, 0, 1;
  const AttentionLoss r = attention_loss(sem, att, attrs, std::vector<int>{0});
  CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("attention loss with zero attention is ln S") {
  Rng rng(3);
  const Matrix sem = random_matrix(rng, 4, 6);
  const Matrix attrs = random_matrix(rng, 5, 6);
  const AttentionLoss r = attention_loss(sem, Matrix::Zero(4, 6), attrs, std::vector<int>{0, 1, 4, 2});
  CHECK(r.loss == doctest::Approx(std::log(5.0)).epsilon(1e-14));
}

TEST_CASE("attention loss rejects labels outside the candidates") {
  const Matrix m = Matrix::Ones(1, 2);
  CHECK_THROWS_AS(attention_loss(m, m, Matrix::Ones(2, 2), std::vector<int>{2}), ValidationError);
  CHECK_THROWS_AS(attention_loss(m, m, Matrix::Ones(2, 2), std::vector<int>{-1}), ValidationError);
}

TEST_CASE("attention loss gradients match finite differences") {
  Rng rng(22);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(5)), k = 4, s = 3 + static_cast<int>(rng.below(4));
    const Matrix sem = random_matrix(rng, n, k, 2.0);
    const Matrix att = softmax_rows(random_matrix(rng, n, k));
    const Matrix attrs = testing::random_uniform(rng, s, k);
    std::vector<int> y;
    for (int i = 0; i < n; ++i) y.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(s))));
    const AttentionLoss r = attention_loss(sem, att, attrs, y);
    CHECK(grad_check([&](const Vector& v) { return attention_loss(unflatten(v, n, k), att, attrs, y).loss; },
                     flatten(sem), flatten(r.grad_sem)) < 1e-5);
    CHECK(grad_check([&](const Vector& v) { return attention_loss(sem, unflatten(v, n, k), attrs, y).loss; },
                     flatten(att), flatten(r.grad_attention)) < 1e-5);
  }
}

TEST_CASE("bce reference values") {
  const LossAndGrad half = bce_with_logits(Matrix::Zero(2, 3), Matrix::Constant(2, 3, 0.5));
  CHECK(half.loss == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const LossAndGrad sat = bce_with_logits(Matrix::Constant(1, 1, 40.0), Matrix::Ones(1, 1));
  CHECK(sat.loss < 1e-12);
  CHECK(sat.loss >= 0.0);
  Matrix extreme(1, 2);
  extreme << 700, -700;
  const LossAndGrad big = bce_with_logits(extreme, Matrix::Zero(1, 2));
  CHECK(std::isfinite(big.loss));
  CHECK(big.loss == doctest::Approx(350.0).epsilon(1e-12));
  CHECK(big.grad.allFinite());
}

TEST_CASE("bce rejects targets outside [0, 1] and shape mismatch") {
  CHECK_THROWS_AS(bce_with_logits(Matrix::Zero(1, 1), Matrix::Constant(1, 1, 1.5)), ValidationError);
  CHECK_THROWS_AS(bce_with_logits(Matrix::Zero(1, 1), Matrix::Constant(1, 1, -0.1)), ValidationError);
  CHECK_THROWS_AS(bce_with_logits(Matrix::Zero(1, 2), Matrix::Zero(1, 1)), ShapeError);
}

TEST_CASE("bce gradient matches finite differences") {
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    const Matrix z = random_matrix(rng, 4, 5, 3.0);
    const Matrix t = testing::random_uniform(rng, 4, 5);
    const LossAndGrad r = bce_with_logits(z, t);
    CHECK(grad_check([&](const Vector& v) { return bce_with_logits(unflatten(v, 4, 5), t).loss; }, flatten(z),
                     flatten(r.grad)) < 1e-5);
  }
}

TEST_CASE("combined loss weights") {
  CHECK(combined_loss(1.0, 2.0, 3.0, 1.0, 0.1) == doctest::Approx(3.3));
  CHECK(combined_loss(1.0, 2.0, 3.0, 0.0, 0.0) == 1.0);
}
