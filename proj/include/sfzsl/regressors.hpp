#pragma once

#include "sfzsl/types.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace sfzsl {

enum class RegressorMethod { Lasso, RidgeCv, BayesRidge };

std::string to_string(RegressorMethod method);
RegressorMethod regressor_method_from_string(const std::string& s);

/// Linear map from visual features to attribute vectors: X * weights + intercept.
struct LinearAttributeMap {
  RegressorMethod method = RegressorMethod::RidgeCv;
  Matrix weights;    // d x K
  RowVector intercept;  // K
  double alpha = 0.0;   // ridge: selected alpha, lasso: penalty
  std::vector<double> alpha_scores;        // ridge: LOO mean squared error per grid entry
  std::vector<double> noise_precision;     // bayes: per output column
  std::vector<double> weight_precision;    // bayes: per output column
  std::vector<int> iterations;             // lasso sweeps / bayes iterations per column
  bool converged = true;
};

inline const std::vector<double> kDefaultRidgeAlphas{0.1, 0.5, 1.0, 5.0, 10.0};

/// Closed-form ridge on centered data for every alpha in the grid; the alpha with the
/// lowest exact leave-one-out squared error (summed over outputs) is refit on all rows.
/// Ties go to the earlier grid entry.
LinearAttributeMap fit_ridge_cv(const Matrix& x, const Matrix& y,
                                const std::vector<double>& alphas = kDefaultRidgeAlphas);

/// Exact leave-one-out mean squared error of ridge at one alpha (intercept unpenalized).
double ridge_loo_error(const Matrix& x, const Matrix& y, double alpha);

/// Per output column, cyclic coordinate descent on
///   1/(2N) |Xc w - yc|^2 + alpha |w|_1
/// with Xc, yc centered. Stops when the largest coordinate change in a sweep is
/// below `tol` or after `max_sweeps`; `converged` reports which happened.
LinearAttributeMap fit_lasso(const Matrix& x, const Matrix& y, double alpha = 0.001,
                             double tol = 1e-8, int max_sweeps = 10000);

struct BayesRidgeOptions {
  int max_iter = 300;
  double tol = 1e-3;  // relative change of both precisions
  // Gamma hyperpriors; small values are uninformative.
  double alpha_1 = 1e-6, alpha_2 = 1e-6, lambda_1 = 1e-6, lambda_2 = 1e-6;
};

/// Bayesian ridge by evidence maximization over noise precision (alpha) and
/// weight precision (lambda), per output column. Weights are the posterior mean
/// at the final precisions.
LinearAttributeMap fit_bayes_ridge(const Matrix& x, const Matrix& y, const BayesRidgeOptions& options = {});

/// Posterior-mean weights of Bayesian ridge for one column at fixed precisions.
Vector bayes_posterior_mean(const Matrix& x, const Vector& y, double noise_precision, double weight_precision);

Matrix predict_attributes(const LinearAttributeMap& map, const Matrix& x);

nlohmann::json to_json(const LinearAttributeMap& map);
LinearAttributeMap linear_map_from_json(const nlohmann::json& j);

}  // namespace sfzsl
