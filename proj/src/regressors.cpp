#include "sfzsl/regressors.hpp"

#include <cmath>
#include <limits>

namespace sfzsl {

namespace {

struct Centered {
  Matrix x;
  Matrix y;
  RowVector x_mean;
  RowVector y_mean;
};

Centered center(const Matrix& x, const Matrix& y) {
  require_shape(x.rows() == y.rows(), "regression: X and Y row counts differ");
  if (x.rows() < 2) throw ValidationError("regression: need at least 2 samples");
  if (!x.allFinite() || !y.allFinite()) throw NumericError("regression: non-finite input");
  Centered c;
  c.x_mean = x.colwise().mean();
  c.y_mean = y.colwise().mean();
  c.x = x.rowwise() - c.x_mean;
  c.y = y.rowwise() - c.y_mean;
  return c;
}

void finish(LinearAttributeMap& map, const Centered& c) {
  map.intercept = c.y_mean - c.x_mean * map.weights;
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

nlohmann::json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw ParseError("matrix size mismatch", 0);
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

}  // namespace

std::string to_string(RegressorMethod method) {
  switch (method) {
    case RegressorMethod::Lasso: return "lasso";
    case RegressorMethod::RidgeCv: return "ridge-cv";
    case RegressorMethod::BayesRidge: return "bayes-ridge";
  }
  return "unknown";
}

RegressorMethod regressor_method_from_string(const std::string& s) {
  if (s == "lasso") return RegressorMethod::Lasso;
  if (s == "ridge-cv") return RegressorMethod::RidgeCv;
  if (s == "bayes-ridge") return RegressorMethod::BayesRidge;
  throw ValidationError("unknown regressor method '" + s + "'");
}

double ridge_loo_error(const Matrix& x, const Matrix& y, double alpha) {
  const Centered c = center(x, y);
  Matrix system = c.x.transpose() * c.x;
  system.diagonal().array() += alpha;
  const Eigen::LDLT<Matrix> ldlt(system);
  const Matrix w = ldlt.solve(c.x.transpose() * c.y);
  const Matrix hat_inner = c.x * ldlt.solve(c.x.transpose());
  const double n = static_cast<double>(x.rows());
  const Matrix resid = c.y - c.x * w;
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double leverage = 1.0 / n + hat_inner(i, i);
    total += (resid.row(i) / (1.0 - leverage)).squaredNorm();
  }
  return total / n;
}

LinearAttributeMap fit_ridge_cv(const Matrix& x, const Matrix& y, const std::vector<double>& alphas) {
  if (alphas.empty()) throw ValidationError("ridge: alpha grid is empty");
  for (double a : alphas)
    if (!(a > 0.0)) throw ValidationError("ridge: every alpha must be > 0");
  const Centered c = center(x, y);
  const double n = static_cast<double>(x.rows());

  // One eigendecomposition of Xc^T Xc serves every alpha.
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(c.x.transpose() * c.x);
  const Vector s = eig.eigenvalues().cwiseMax(0.0);
  const Matrix& v = eig.eigenvectors();
  const Matrix xv = c.x * v;                  // N x d
  const Matrix vt_xty = v.transpose() * (c.x.transpose() * c.y);  // d x K
  const Matrix xv_sq = xv.cwiseAbs2();

  LinearAttributeMap map;
  map.method = RegressorMethod::RidgeCv;
  double best = std::numeric_limits<double>::infinity();
  Matrix best_weights;
  for (double alpha : alphas) {
    const Vector inv = (s.array() + alpha).inverse().matrix();
    const Matrix w = v * inv.asDiagonal() * vt_xty;
    const Vector leverage = (xv_sq * inv).array() + 1.0 / n;
    const Matrix resid = c.y - c.x * w;
    double total = 0.0;
    for (Eigen::Index i = 0; i < resid.rows(); ++i)
      total += (resid.row(i) / (1.0 - leverage[i])).squaredNorm();
    const double score = total / n;
    map.alpha_scores.push_back(score);
    if (score < best) {
      best = score;
      map.alpha = alpha;
      best_weights = w;
    }
  }
  map.weights = std::move(best_weights);
  finish(map, c);
  return map;
}

LinearAttributeMap fit_lasso(const Matrix& x, const Matrix& y, double alpha, double tol, int max_sweeps) {
  if (!(alpha > 0.0)) throw ValidationError("lasso: alpha must be > 0");
  const Centered c = center(x, y);
  const double n = static_cast<double>(x.rows());
  const Eigen::Index d = x.cols();
  const Matrix gram = (c.x.transpose() * c.x) / n;
  const Matrix corr = (c.x.transpose() * c.y) / n;

  LinearAttributeMap map;
  map.method = RegressorMethod::Lasso;
  map.alpha = alpha;
  map.weights = Matrix::Zero(d, y.cols());
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    Vector w = Vector::Zero(d);
    Vector q = Vector::Zero(d);  // gram * w
    int sweep = 0;
    bool done = false;
    while (sweep < max_sweeps && !done) {
      ++sweep;
      double max_change = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double g = gram(j, j);
        if (g <= 0.0) continue;
        const double rho = corr(j, k) - (q[j] - g * w[j]);
        const double updated = soft_threshold(rho, alpha) / g;
        const double delta = updated - w[j];
        if (delta != 0.0) {
          q += delta * gram.col(j);
          w[j] = updated;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      done = max_change < tol;
    }
    map.iterations.push_back(sweep);
    if (!done) map.converged = false;
    map.weights.col(k) = w;
  }
  finish(map, c);
  return map;
}

Vector bayes_posterior_mean(const Matrix& x, const Vector& y, double noise_precision, double weight_precision) {
  Matrix ym(y.size(), 1);
  ym.col(0) = y;
  const Centered c = center(x, ym);
  Matrix system = c.x.transpose() * c.x;
  system.diagonal().array() += weight_precision / noise_precision;
  return system.ldlt().solve(c.x.transpose() * c.y.col(0));
}

LinearAttributeMap fit_bayes_ridge(const Matrix& x, const Matrix& y, const BayesRidgeOptions& opt) {
  const Centered c = center(x, y);
  const double n = static_cast<double>(x.rows());
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(c.x.transpose() * c.x);
  const Vector s = eig.eigenvalues().cwiseMax(0.0);
  const Matrix& v = eig.eigenvectors();
  const Matrix vt_xty = v.transpose() * (c.x.transpose() * c.y);

  LinearAttributeMap map;
  map.method = RegressorMethod::BayesRidge;
  map.weights = Matrix::Zero(x.cols(), y.cols());
  const double eps = std::numeric_limits<double>::epsilon();

  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    const Vector yk = c.y.col(k);
    double alpha = 1.0 / (yk.squaredNorm() / n + eps);
    double lambda = 1.0;
    auto weights_at = [&](double a, double l) -> Vector {
      return v * ((s.array() + l / a).inverse() * vt_xty.col(k).array()).matrix();
    };
    int iter = 0;
    bool converged = false;
    while (iter < opt.max_iter && !converged) {
      ++iter;
      const Vector w = weights_at(alpha, lambda);
      const double sse = (yk - c.x * w).squaredNorm();
      const double gamma = (alpha * s.array() / (lambda + alpha * s.array())).sum();
      const double new_lambda = (gamma + 2.0 * opt.lambda_1) / (w.squaredNorm() + 2.0 * opt.lambda_2);
      const double new_alpha = (n - gamma + 2.0 * opt.alpha_1) / (sse + 2.0 * opt.alpha_2);
      converged = std::abs(new_alpha - alpha) <= opt.tol * alpha &&
                  std::abs(new_lambda - lambda) <= opt.tol * lambda;
      alpha = new_alpha;
      lambda = new_lambda;
    }
    map.weights.col(k) = weights_at(alpha, lambda);
    map.noise_precision.push_back(alpha);
    map.weight_precision.push_back(lambda);
    map.iterations.push_back(iter);
    if (!converged) map.converged = false;
  }
  finish(map, c);
  return map;
}

Matrix predict_attributes(const LinearAttributeMap& map, const Matrix& x) {
  require_shape(x.cols() == map.weights.rows(), "attribute regressor expects d=" +
                                                    std::to_string(map.weights.rows()) + ", got " +
                                                    std::to_string(x.cols()));
  Matrix out = x * map.weights;
  out.rowwise() += map.intercept;
  return out;
}

nlohmann::json to_json(const LinearAttributeMap& map) {
  return {{"method", to_string(map.method)},
          {"weights", matrix_json(map.weights)},
          {"intercept", std::vector<double>(map.intercept.data(), map.intercept.data() + map.intercept.size())},
          {"alpha", map.alpha},
          {"alpha_scores", map.alpha_scores},
          {"noise_precision", map.noise_precision},
          {"weight_precision", map.weight_precision},
          {"iterations", map.iterations},
          {"converged", map.converged}};
}

LinearAttributeMap linear_map_from_json(const nlohmann::json& j) {
  try {
    LinearAttributeMap map;
    map.method = regressor_method_from_string(j.at("method").get<std::string>());
    map.weights = matrix_from_json(j.at("weights"));
    const auto b = j.at("intercept").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(b.size()) != map.weights.cols()) throw ParseError("intercept size mismatch", 0);
    map.intercept = Eigen::Map<const RowVector>(b.data(), static_cast<Eigen::Index>(b.size()));
    map.alpha = j.at("alpha").get<double>();
    map.alpha_scores = j.at("alpha_scores").get<std::vector<double>>();
    map.noise_precision = j.at("noise_precision").get<std::vector<double>>();
    map.weight_precision = j.at("weight_precision").get<std::vector<double>>();
    map.iterations = j.at("iterations").get<std::vector<int>>();
    map.converged = j.at("converged").get<bool>();
    return map;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed attribute map: ") + e.what(), 0);
  }
}

}  // namespace sfzsl
