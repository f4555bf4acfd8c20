#include "sfzsl/losses.hpp"

#include <cmath>
#include <limits>

namespace sfzsl {

LossAndGrad triplet_loss(const Matrix& latents, std::span<const int> labels, double margin) {
  const Eigen::Index n = latents.rows();
  require_shape(static_cast<Eigen::Index>(labels.size()) == n, "triplet loss: one label per row");
  if (!(margin > 0.0)) throw ValidationError("triplet margin must be positive");

  // Pairwise squared distances.
  const Vector sq = latents.rowwise().squaredNorm();
  Matrix dist = -2.0 * latents * latents.transpose();
  dist.colwise() += sq;
  dist.rowwise() += sq.transpose();

  LossAndGrad out{0.0, Matrix::Zero(latents.rows(), latents.cols())};
  std::size_t anchors = 0;
  for (Eigen::Index a = 0; a < n; ++a) {
    Eigen::Index pos = -1, neg = -1;
    double far_pos = -std::numeric_limits<double>::infinity();
    double near_neg = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == a) continue;
      const auto ua = static_cast<std::size_t>(a), uj = static_cast<std::size_t>(j);
      if (labels[uj] == labels[ua]) {
        if (dist(a, j) > far_pos) far_pos = dist(a, j), pos = j;
      } else if (dist(a, j) < near_neg) {
        near_neg = dist(a, j), neg = j;
      }
    }
    if (pos < 0 || neg < 0) continue;
    ++anchors;
    // Recompute from the rows so loss and gradient use the same values.
    const RowVector ap = latents.row(a) - latents.row(pos);
    const RowVector an = latents.row(a) - latents.row(neg);
    const double hinge = ap.squaredNorm() - an.squaredNorm() + margin;
    if (hinge <= 0.0) continue;
    out.loss += hinge;
    out.grad.row(a) += 2.0 * (latents.row(neg) - latents.row(pos));
    out.grad.row(pos) -= 2.0 * ap;
    out.grad.row(neg) += 2.0 * an;
  }
  if (anchors == 0) throw DegenerateBatch();
  out.loss /= static_cast<double>(anchors);
  out.grad /= static_cast<double>(anchors);
  return out;
}

AttentionLoss attention_loss(const Matrix& sem_pred, const Matrix& attention,
                             const Matrix& class_attributes, std::span<const int> targets) {
  const Eigen::Index n = sem_pred.rows();
  const Eigen::Index classes = class_attributes.rows();
  require_shape(attention.rows() == n && attention.cols() == sem_pred.cols(),
                "attention loss: attention must match sem_pred shape");
  require_shape(class_attributes.cols() == sem_pred.cols(),
                "attention loss: class attribute width must match sem_pred");
  require_shape(static_cast<Eigen::Index>(targets.size()) == n, "attention loss: one target per row");
  for (int t : targets)
    if (t < 0 || t >= classes)
      throw ValidationError("attention loss: label outside the candidate class set");

  const Matrix weighted = sem_pred.cwiseProduct(attention);  // N x K
  const Matrix scores = weighted * class_attributes.transpose();  // N x S

  AttentionLoss out;
  Matrix grad_scores(n, classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = scores.row(i).maxCoeff();
    const RowVector e = (scores.row(i).array() - mx).exp().matrix();
    const double z = e.sum();
    const int t = targets[static_cast<std::size_t>(i)];
    out.loss += -(scores(i, t) - mx - std::log(z));
    grad_scores.row(i) = e / z;
    grad_scores(i, t) -= 1.0;
  }
  out.loss /= static_cast<double>(n);
  grad_scores /= static_cast<double>(n);

  const Matrix grad_weighted = grad_scores * class_attributes;  // N x K
  out.grad_sem = grad_weighted.cwiseProduct(attention);
  out.grad_attention = grad_weighted.cwiseProduct(sem_pred);
  return out;
}

LossAndGrad bce_with_logits(const Matrix& logits, const Matrix& targets) {
  require_shape(logits.rows() == targets.rows() && logits.cols() == targets.cols(),
                "BCE: logits and targets must have equal shapes");
  if ((targets.array() < 0.0).any() || (targets.array() > 1.0).any())
    throw ValidationError("BCE: targets must lie in [0, 1]");
  const double count = static_cast<double>(logits.size());
  LossAndGrad out{0.0, Matrix(logits.rows(), logits.cols())};
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      const double z = logits(i, j);
      const double t = targets(i, j);
      out.loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
      const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
      out.grad(i, j) = (p - t) / count;
    }
  }
  out.loss /= count;
  return out;
}

}  // namespace sfzsl
