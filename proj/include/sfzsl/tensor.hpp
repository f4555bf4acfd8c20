#pragma once

#include "sfzsl/rng.hpp"
#include "sfzsl/types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace sfzsl {

/// Affine layer y = x * weight + bias. `weight` is in_dim x out_dim, `bias` is 1 x out_dim.
struct Dense {
  Matrix weight;
  Matrix bias;

  Dense() = default;
  Dense(Eigen::Index in_dim, Eigen::Index out_dim);

  Eigen::Index in_dim() const { return weight.rows(); }
  Eigen::Index out_dim() const { return weight.cols(); }
  Matrix apply(const Matrix& x) const;

  /// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero bias.
  static Dense glorot(Eigen::Index in_dim, Eigen::Index out_dim, Rng& rng);
  static Dense zeros_like(const Dense& other);
};

/// Fully connected network: ReLU after every layer except the last, which is identity.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<Dense> layers);
  Mlp(const std::vector<int>& dims, Rng& rng);

  static Mlp zeros(const std::vector<int>& dims);

  std::size_t depth() const { return layers_.size(); }
  Eigen::Index input_dim() const { return layers_.front().in_dim(); }
  Eigen::Index output_dim() const { return layers_.back().out_dim(); }
  std::vector<int> dims() const;

  const std::vector<Dense>& layers() const { return layers_; }
  std::vector<Dense>& layers() { return layers_; }

  /// One matrix per layer: post-ReLU activations for hidden layers, raw output last.
  std::vector<Matrix> forward(const Matrix& x) const;

  /// Backpropagate. `grad_acts[l]` is dL/d(activation l) from outside the network;
  /// an empty matrix means no direct contribution. Accumulates parameter
  /// gradients into `grads` (same layout as layers()) and returns dL/dx.
  Matrix backward(const Matrix& x, const std::vector<Matrix>& acts,
                  std::vector<Matrix> grad_acts, std::vector<Dense>& grads) const;

 private:
  std::vector<Dense> layers_;
};

struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

/// One Adam update with bias correction over a list of parameter blocks.
/// Moments are lazily shaped on the first call. Throws NumericError on a
/// non-finite gradient and ShapeError on a layout change.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state);

/// Max relative error between `analytic` and a central-difference gradient of `f`
/// at `point`. Per coordinate: |a - n| / max(|a|, |n|, 1e-6).
double grad_check(const std::function<double(const Vector&)>& f, const Vector& point,
                  const Vector& analytic, double step = 1e-5);

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits);

/// Backward of row-wise softmax: given probabilities p and dL/dp, returns dL/dlogits.
Matrix softmax_rows_backward(const Matrix& probs, const Matrix& grad_probs);

}  // namespace sfzsl
