#pragma once

#include "sfzsl/types.hpp"

#include <span>

namespace sfzsl {

class DegenerateBatch : public Error {
 public:
  DegenerateBatch() : Error("degenerate batch: no anchor has both a positive and a negative") {}
};

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;
};

/// Batch-hard triplet loss on squared Euclidean distances.
///
/// For every anchor that has at least one positive and one negative in the
/// batch, the farthest positive and the nearest negative are selected and
///   [ |a - p|^2 - |a - n|^2 + margin ]_+
/// is averaged over those anchors. Ties in the selection go to the lowest row.
LossAndGrad triplet_loss(const Matrix& latents, std::span<const int> labels, double margin);

struct AttentionLoss {
  double loss = 0.0;
  Matrix grad_sem;
  Matrix grad_attention;
};

/// Softmax cross-entropy over candidate classes with attention-weighted
/// compatibility scores s_y = sem_i^T diag(att_i) a_y.
/// `targets[i]` indexes a row of `class_attributes`.
AttentionLoss attention_loss(const Matrix& sem_pred, const Matrix& attention,
                             const Matrix& class_attributes, std::span<const int> targets);

/// Element-mean binary cross entropy of logistic(logits) against targets in [0, 1].
LossAndGrad bce_with_logits(const Matrix& logits, const Matrix& targets);

inline double combined_loss(double lat, double att, double bce, double beta1, double beta2) {
  return lat + beta1 * att + beta2 * bce;
}

}  // namespace sfzsl
