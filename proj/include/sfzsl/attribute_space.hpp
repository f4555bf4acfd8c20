#pragma once

#include "sfzsl/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace sfzsl {

/// Ridge coefficients expressing each unseen class's attributes as a
/// combination of seen-class attributes. coefficients is U x S.
struct CorrelationMatrix {
  Matrix coefficients;
  double lambda = 1.0;
};

enum class PrototypeKind { Latent, Visual };

struct PrototypeSet {
  std::vector<std::string> class_names;
  Matrix vectors;  // one row per class
  PrototypeKind kind = PrototypeKind::Latent;
};

/// beta_u = argmin |a_u - sum_c beta_c a_c|^2 + lambda |beta|^2 for every unseen row,
/// via one Cholesky factorization of (A_seen A_seen^T + lambda I).
CorrelationMatrix ridge_correlation(const Matrix& seen_attributes, const Matrix& unseen_attributes,
                                    double lambda = 1.0);

/// Objective value of the ridge problem for one unseen row (used by tests and diagnostics).
double ridge_correlation_objective(const Matrix& seen_attributes, const RowVector& unseen_row,
                                   const RowVector& beta, double lambda);

/// Per-class mean of `latents` rows. `labels[i]` indexes `class_names`.
PrototypeSet latent_prototypes_seen(const Matrix& latents, std::span<const int> labels,
                                    const std::vector<std::string>& class_names,
                                    PrototypeKind kind = PrototypeKind::Latent);

/// Unseen prototypes as beta-weighted sums of seen prototypes.
PrototypeSet latent_prototypes_unseen(const CorrelationMatrix& corr, const PrototypeSet& seen,
                                      const std::vector<std::string>& unseen_names);

double cosine_similarity(const RowVector& u, const RowVector& v);

/// Index of the prototype row with the highest cosine similarity; first wins on ties.
std::size_t predict_latent(const RowVector& latent, const Matrix& prototypes);

/// argmax_y cos(sem_pred, a_y) + cos(latent, proto_y); first wins on ties.
std::size_t predict_combined(const RowVector& sem_pred, const RowVector& latent,
                             const Matrix& class_attributes, const Matrix& prototypes);

/// Cosine similarity of every row of `queries` against every row of `targets` (N x C).
Matrix cosine_matrix(const Matrix& queries, const Matrix& targets);

/// Index of the row maximum, lowest index on ties.
std::size_t argmax_first(const RowVector& row);

}  // namespace sfzsl
