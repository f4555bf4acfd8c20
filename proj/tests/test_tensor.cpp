#include "sfzsl/rng.hpp"
#include "sfzsl/tensor.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace sfzsl;
using testing::flatten;
using testing::random_matrix;
using testing::unflatten;

TEST_CASE("rng is reproducible and in range") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    differs |= u != c.uniform();
  }
  CHECK(differs);
  for (int i = 0; i < 1000; ++i) CHECK(a.below(7) < 7);
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("normal draws have unit moments") {
  Rng rng(9);
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("dense apply") {
  Dense d(2, 3);
  d.weight << 1, 2, 3, 4, 5, 6;
  d.bias << 0.5, 0, -1;
  Matrix x(1, 2);
  x << 1, -1;
  Matrix expected(1, 3);
  expected << -2.5, -3, -4;
  CHECK(d.apply(x) == expected);
  CHECK_THROWS_AS(d.apply(Matrix::Zero(1, 3)), ShapeError);
}

TEST_CASE("glorot init stays in its bound") {
  Rng rng(1);
  const Dense d = Dense::glorot(30, 10, rng);
  const double bound = std::sqrt(6.0 / 40.0);
  CHECK(d.weight.cwiseAbs().maxCoeff() <= bound);
  CHECK(d.bias.isZero());
}

TEST_CASE("zero network gives zero activations") {
  const Mlp m = Mlp::zeros({4, 5, 3});
  Rng rng(2);
  const auto acts = m.forward(random_matrix(rng, 6, 4));
  REQUIRE(acts.size() == 2);
  CHECK(acts[0].isZero());
  CHECK(acts[1].isZero());
}

TEST_CASE("identity single layer returns its input") {
  Dense d(3, 3);
  d.weight = Matrix::Identity(3, 3);
  d.bias.setZero();
  const Mlp m({d});
  Rng rng(3);
  const Matrix x = random_matrix(rng, 4, 3);
  CHECK(m.forward(x).back() == x);
}

TEST_CASE("mlp forward matches a straight-line evaluation") {
  Rng rng(4);
  const Mlp m({5, 7, 3}, rng);
  const Matrix x = random_matrix(rng, 6, 5);
  const auto acts = m.forward(x);
  const auto& l0 = m.layers()[0];
  const auto& l1 = m.layers()[1];
  for (int i = 0; i < 6; ++i) {
    for (int o = 0; o < 3; ++o) {
      double out = l1.bias(0, o);
      for (int h = 0; h < 7; ++h) {
        double pre = l0.bias(0, h);
        for (int j = 0; j < 5; ++j) pre += x(i, j) * l0.weight(j, h);
        const double act = pre > 0 ? pre : 0.0;
        CHECK(acts[0](i, h) == doctest::Approx(act).epsilon(1e-13));
        out += act * l1.weight(h, o);
      }
      CHECK(acts[1](i, o) == doctest::Approx(out).epsilon(1e-12));
    }
  }
}

TEST_CASE("mlp backward matches finite differences") {
  Rng rng(5);
  Mlp m({4, 6, 5, 3}, rng);
  const Matrix x = random_matrix(rng, 7, 4);
  const Matrix g_out = random_matrix(rng, 7, 3);
  const Matrix g_hidden = random_matrix(rng, 7, 5);
  // L = <g_out, out> + <g_hidden, second hidden activation>
  auto loss = [&](const Mlp& net, const Matrix& in) {
    const auto acts = net.forward(in);
    return (acts[2].cwiseProduct(g_out)).sum() + (acts[1].cwiseProduct(g_hidden)).sum();
  };
  const auto acts = m.forward(x);
  std::vector<Dense> grads;
  for (const auto& l : m.layers()) grads.push_back(Dense::zeros_like(l));
  const Matrix gx = m.backward(x, acts, {Matrix(), g_hidden, g_out}, grads);

  CHECK(grad_check([&](const Vector& v) { return loss(m, unflatten(v, 7, 4)); }, flatten(x), flatten(gx)) < 1e-6);
  for (std::size_t l = 0; l < m.depth(); ++l) {
    Matrix& w = m.layers()[l].weight;
    const auto rows = w.rows(), cols = w.cols();
    const Matrix saved = w;
    const double err = grad_check(
        [&](const Vector& v) {
          w = unflatten(v, rows, cols);
          return loss(m, x);
        },
        flatten(saved), flatten(grads[l].weight));
    w = saved;
    CHECK(err < 1e-6);
    Matrix& b = m.layers()[l].bias;
    const Matrix saved_b = b;
    const double err_b = grad_check(
        [&](const Vector& v) {
          b = unflatten(v, 1, saved_b.cols());
          return loss(m, x);
        },
        flatten(saved_b), flatten(grads[l].bias));
    b = saved_b;
    CHECK(err_b < 1e-6);
  }
}

TEST_CASE("adam step matches a hand computation") {
  Matrix p(1, 2);
  p << 1.0, -2.0;
  Matrix g(1, 2);
  g << 0.5, -0.25;
  AdamState st;
  st.lr = 0.1;
  std::vector<Matrix*> params{&p};
  std::vector<Matrix> grads{g};
  adam_step(params, grads, st);
  const double p1 = p(0, 0);
  // First step with bias correction moves each coordinate by lr * sign(g) (up to eps).
  CHECK(p(0, 0) == doctest::Approx(1.0 - 0.1).epsilon(1e-7));
  CHECK(p(0, 1) == doctest::Approx(-2.0 + 0.1).epsilon(1e-7));
  adam_step(params, grads, st);
  CHECK(st.step == 2);
  const double m = 0.9 * 0.1 * 0.5 + 0.1 * 0.5;
  const double v = 0.999 * 0.001 * 0.25 + 0.001 * 0.25;
  const double mhat = m / (1 - 0.81), vhat = v / (1 - 0.999 * 0.999);
  CHECK(p(0, 0) == doctest::Approx(p1 - 0.1 * mhat / (std::sqrt(vhat) + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam rejects non-finite gradients and layout changes") {
  Matrix p = Matrix::Zero(2, 2);
  AdamState st;
  std::vector<Matrix*> params{&p};
  std::vector<Matrix> grads{Matrix::Constant(2, 2, std::nan(""))};
  CHECK_THROWS_AS(adam_step(params, grads, st), NumericError);
  CHECK(p.isZero());
  std::vector<Matrix> ok{Matrix::Ones(2, 2)};
  adam_step(params, ok, st);
  std::vector<Matrix> wrong{Matrix::Ones(3, 2)};
  CHECK_THROWS_AS(adam_step(params, wrong, st), ShapeError);
}

TEST_CASE("softmax rows") {
  Rng rng(6);
  const Matrix z = random_matrix(rng, 5, 4, 30.0);
  const Matrix p = softmax_rows(z);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.minCoeff() >= 0.0);
  CHECK(softmax_rows(Matrix::Zero(1, 4)).isApprox(Matrix::Constant(1, 4, 0.25)));
  Matrix huge(1, 2);
  huge << 1000, 999;
  CHECK(softmax_rows(huge).allFinite());

  const Matrix small = random_matrix(rng, 3, 4);
  const Matrix g = random_matrix(rng, 3, 4);
  const Matrix analytic = softmax_rows_backward(softmax_rows(small), g);
  const double err = grad_check([&](const Vector& v) { return softmax_rows(unflatten(v, 3, 4)).cwiseProduct(g).sum(); },
                                flatten(small), flatten(analytic));
  CHECK(err < 1e-6);
}

TEST_CASE("sigmoid is stable at extremes") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) == 0.0);
  CHECK(std::isfinite(sigmoid(-745.0)));
}

TEST_CASE("grad_check flags a wrong gradient") {
  auto f = [](const Vector& v) { return v.squaredNorm(); };
  Vector x(3);
  x << 1, -2, 0.5;
  CHECK(grad_check(f, x, 2 * x) < 1e-8);
  CHECK(grad_check(f, x, 3 * x) > 0.1);
}
