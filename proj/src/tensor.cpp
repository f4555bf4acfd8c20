#include "sfzsl/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace sfzsl {

Dense::Dense(Eigen::Index in_dim, Eigen::Index out_dim)
    : weight(Matrix::Zero(in_dim, out_dim)), bias(Matrix::Zero(1, out_dim)) {}

Matrix Dense::apply(const Matrix& x) const {
  require_shape(x.cols() == in_dim(), "dense layer expects " + std::to_string(in_dim()) +
                                          " inputs, got " + std::to_string(x.cols()));
  Matrix y = x * weight;
  y.rowwise() += bias.row(0);
  return y;
}

Dense Dense::glorot(Eigen::Index in_dim, Eigen::Index out_dim, Rng& rng) {
  Dense layer(in_dim, out_dim);
  const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  for (Eigen::Index i = 0; i < in_dim; ++i)
    for (Eigen::Index j = 0; j < out_dim; ++j) layer.weight(i, j) = rng.uniform(-limit, limit);
  return layer;
}

Dense Dense::zeros_like(const Dense& other) { return Dense(other.in_dim(), other.out_dim()); }

Mlp::Mlp(std::vector<Dense> layers) : layers_(std::move(layers)) {
  require_shape(!layers_.empty(), "an MLP needs at least one layer");
  for (std::size_t l = 1; l < layers_.size(); ++l)
    require_shape(layers_[l].in_dim() == layers_[l - 1].out_dim(),
                  "MLP layer " + std::to_string(l) + " input does not match previous output");
}

Mlp::Mlp(const std::vector<int>& dims, Rng& rng) {
  require_shape(dims.size() >= 2, "an MLP needs at least input and output dims");
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    layers_.push_back(Dense::glorot(dims[l], dims[l + 1], rng));
}

Mlp Mlp::zeros(const std::vector<int>& dims) {
  require_shape(dims.size() >= 2, "an MLP needs at least input and output dims");
  std::vector<Dense> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) layers.emplace_back(dims[l], dims[l + 1]);
  return Mlp(std::move(layers));
}

std::vector<int> Mlp::dims() const {
  std::vector<int> out;
  if (layers_.empty()) return out;
  out.push_back(static_cast<int>(layers_.front().in_dim()));
  for (const auto& layer : layers_) out.push_back(static_cast<int>(layer.out_dim()));
  return out;
}

std::vector<Matrix> Mlp::forward(const Matrix& x) const {
  std::vector<Matrix> acts;
  acts.reserve(layers_.size());
  const Matrix* input = &x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = layers_[l].apply(*input);
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
    input = &acts.back();
  }
  return acts;
}

Matrix Mlp::backward(const Matrix& x, const std::vector<Matrix>& acts,
                     std::vector<Matrix> grad_acts, std::vector<Dense>& grads) const {
  require_shape(acts.size() == layers_.size() && grad_acts.size() == layers_.size(),
                "MLP backward expects one activation and gradient slot per layer");
  if (grads.size() != layers_.size()) {
    grads.clear();
    for (const auto& layer : layers_) grads.push_back(Dense::zeros_like(layer));
  }
  Matrix upstream;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    Matrix g = grad_acts[l].size() ? std::move(grad_acts[l]) : Matrix::Zero(acts[l].rows(), acts[l].cols());
    if (upstream.size()) g += upstream;
    if (l + 1 < layers_.size()) g = g.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    const Matrix& input = l == 0 ? x : acts[l - 1];
    grads[l].weight.noalias() += input.transpose() * g;
    grads[l].bias += g.colwise().sum();
    upstream = g * layers_[l].weight.transpose();
  }
  return upstream;
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state) {
  require_shape(params.size() == grads.size(), "adam: parameter/gradient count mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    require_shape(params[i]->rows() == grads[i].rows() && params[i]->cols() == grads[i].cols(),
                  "adam: gradient shape does not match parameter " + std::to_string(i));
    if (!grads[i].allFinite()) throw NumericError("adam: non-finite gradient in block " + std::to_string(i));
  }
  if (state.first_moment.empty()) {
    for (const auto* p : params) {
      state.first_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.second_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  require_shape(state.first_moment.size() == params.size(), "adam: state layout changed");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    require_shape(m.rows() == grads[i].rows() && m.cols() == grads[i].cols(), "adam: state layout changed");
    m = state.beta1 * m + (1.0 - state.beta1) * grads[i];
    v = state.beta2 * v + (1.0 - state.beta2) * grads[i].cwiseAbs2();
    params[i]->array() -= state.lr * (m.array() / correction1) /
                          ((v.array() / correction2).sqrt() + state.epsilon);
  }
}

double grad_check(const std::function<double(const Vector&)>& f, const Vector& point,
                  const Vector& analytic, double step) {
  require_shape(point.size() == analytic.size(), "grad_check: gradient length mismatch");
  double worst = 0.0;
  Vector probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + step;
    const double up = f(probe);
    probe[i] = point[i] - step;
    const double down = f(probe);
    probe[i] = point[i];
    const double numeric = (up - down) / (2.0 * step);
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
  }
  return worst;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - mx).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Matrix softmax_rows_backward(const Matrix& probs, const Matrix& grad_probs) {
  const Vector inner = probs.cwiseProduct(grad_probs).rowwise().sum();
  Matrix out = grad_probs;
  out.colwise() -= inner;
  return probs.cwiseProduct(out);
}

}  // namespace sfzsl
