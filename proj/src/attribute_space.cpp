#include "sfzsl/attribute_space.hpp"

#include <algorithm>
#include <cmath>

namespace sfzsl {

CorrelationMatrix ridge_correlation(const Matrix& seen_attributes, const Matrix& unseen_attributes,
                                    double lambda) {
  require_shape(seen_attributes.cols() == unseen_attributes.cols(),
                "ridge correlation: seen and unseen attribute widths differ");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("ridge correlation: lambda must be finite and >= 0");

  const Eigen::Index s = seen_attributes.rows();
  Matrix system = seen_attributes * seen_attributes.transpose();
  system.diagonal().array() += lambda;

  Eigen::LLT<Matrix> llt(system);
  bool ok = llt.info() == Eigen::Success;
  if (ok && lambda == 0.0) {
    // Reject numerically singular Gram matrices rather than return garbage.
    const Vector diag = llt.matrixLLT().diagonal();
    const double ratio = diag.minCoeff() / diag.maxCoeff();
    ok = ratio * ratio > 1e-12;
  }
  if (!ok)
    throw NumericError("ridge correlation: seen-attribute Gram matrix is singular; use lambda > 0");

  CorrelationMatrix out;
  out.lambda = lambda;
  // Solve (G + lambda I) B^T = A_seen A_unseen^T for all unseen rows at once.
  const Matrix rhs = seen_attributes * unseen_attributes.transpose();  // S x U
  out.coefficients = llt.solve(rhs).transpose();
  require_shape(out.coefficients.cols() == s, "ridge correlation: internal shape error");
  return out;
}

double ridge_correlation_objective(const Matrix& seen_attributes, const RowVector& unseen_row,
                                   const RowVector& beta, double lambda) {
  const RowVector residual = unseen_row - beta * seen_attributes;
  return residual.squaredNorm() + lambda * beta.squaredNorm();
}

PrototypeSet latent_prototypes_seen(const Matrix& latents, std::span<const int> labels,
                                    const std::vector<std::string>& class_names, PrototypeKind kind) {
  require_shape(static_cast<Eigen::Index>(labels.size()) == latents.rows(),
                "prototypes: one label per row");
  const auto c = static_cast<Eigen::Index>(class_names.size());
  PrototypeSet out{class_names, Matrix::Zero(c, latents.cols()), kind};
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int label = labels[i];
    if (label < 0 || label >= c) throw ValidationError("prototypes: label index out of range");
    out.vectors.row(label) += latents.row(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(label)];
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0)
      throw ValidationError("prototypes: class '" + class_names[k] + "' has no samples");
    out.vectors.row(static_cast<Eigen::Index>(k)) /= static_cast<double>(counts[k]);
  }
  return out;
}

PrototypeSet latent_prototypes_unseen(const CorrelationMatrix& corr, const PrototypeSet& seen,
                                      const std::vector<std::string>& unseen_names) {
  require_shape(corr.coefficients.cols() == seen.vectors.rows(),
                "prototype transfer: correlation columns do not align with seen prototypes");
  require_shape(corr.coefficients.rows() == static_cast<Eigen::Index>(unseen_names.size()),
                "prototype transfer: correlation rows do not align with unseen classes");
  return PrototypeSet{unseen_names, corr.coefficients * seen.vectors, seen.kind};
}

double cosine_similarity(const RowVector& u, const RowVector& v) {
  require_shape(u.size() == v.size(), "cosine similarity: length mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw NumericError("cosine similarity of a zero vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

std::size_t argmax_first(const RowVector& row) {
  std::size_t best = 0;
  for (Eigen::Index j = 1; j < row.size(); ++j)
    if (row[j] > row[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(j);
  return best;
}

Matrix cosine_matrix(const Matrix& queries, const Matrix& targets) {
  require_shape(queries.cols() == targets.cols(), "cosine matrix: width mismatch");
  const Vector qn = queries.rowwise().norm();
  const Vector tn = targets.rowwise().norm();
  if ((qn.array() == 0.0).any() || (tn.array() == 0.0).any())
    throw NumericError("cosine similarity of a zero vector");
  Matrix out = queries * targets.transpose();
  out.array().colwise() /= qn.array();
  out.array().rowwise() /= tn.transpose().array();
  return out.cwiseMax(-1.0).cwiseMin(1.0);
}

std::size_t predict_latent(const RowVector& latent, const Matrix& prototypes) {
  require_shape(prototypes.rows() >= 1, "predict: no candidate prototypes");
  return argmax_first(cosine_matrix(latent, prototypes).row(0));
}

std::size_t predict_combined(const RowVector& sem_pred, const RowVector& latent,
                             const Matrix& class_attributes, const Matrix& prototypes) {
  require_shape(class_attributes.rows() == prototypes.rows() && prototypes.rows() >= 1,
                "predict: attribute and prototype candidate counts differ");
  const RowVector total = cosine_matrix(sem_pred, class_attributes).row(0) +
                          cosine_matrix(latent, prototypes).row(0);
  return argmax_first(total);
}

}  // namespace sfzsl
