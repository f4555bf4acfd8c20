#include "sfzsl/eval.hpp"

#include "sfzsl/dataset.hpp"
#include "sfzsl/rng.hpp"

#include <cmath>
#include <fstream>
#include <map>

namespace sfzsl {

std::vector<std::vector<std::size_t>> confusion_matrix(const std::vector<std::string>& predictions,
                                                       const std::vector<std::string>& truths,
                                                       const std::vector<std::string>& classes) {
  require_shape(predictions.size() == truths.size(), "confusion: predictions and labels differ in length");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;
  auto lookup = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw ValidationError("unknown label '" + name + "'");
    return it->second;
  };
  std::vector<std::vector<std::size_t>> out(classes.size(), std::vector<std::size_t>(classes.size(), 0));
  for (std::size_t i = 0; i < truths.size(); ++i) ++out[lookup(truths[i])][lookup(predictions[i])];
  return out;
}

EvalReport mean_per_class_top1(const std::vector<std::string>& predictions,
                               const std::vector<std::string>& truths,
                               const std::vector<std::string>& classes) {
  EvalReport report;
  report.classes = classes;
  report.confusion = confusion_matrix(predictions, truths, classes);
  std::size_t correct = 0;
  double sum = 0.0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    ClassScore score{classes[c], report.confusion[c][c], 0, 0.0};
    for (std::size_t v : report.confusion[c]) score.count += v;
    if (score.count == 0) {
      report.warnings.push_back("class '" + classes[c] + "' has no samples; excluded from the mean");
      continue;
    }
    score.accuracy = static_cast<double>(score.correct) / static_cast<double>(score.count);
    sum += score.accuracy;
    correct += score.correct;
    report.per_class.push_back(score);
  }
  if (!report.per_class.empty()) report.mean_per_class = sum / static_cast<double>(report.per_class.size());
  if (!truths.empty()) report.overall = static_cast<double>(correct) / static_cast<double>(truths.size());
  return report;
}

namespace {

// Leading eigenvector of a symmetric PSD matrix, kept orthogonal to `against`.
Vector power_iteration(const Matrix& scatter, const Matrix& against, double tol, Rng& rng) {
  const Eigen::Index d = scatter.rows();
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal();
  auto orthogonalize = [&](Vector& u) {
    for (Eigen::Index c = 0; c < against.cols(); ++c) u -= against.col(c).dot(u) * against.col(c);
  };
  orthogonalize(v);
  if (v.norm() == 0.0) return Vector::Zero(d);
  v.normalize();
  for (int iter = 0; iter < 100000; ++iter) {
    Vector next = scatter * v;
    orthogonalize(next);
    const double norm = next.norm();
    if (norm == 0.0) return v;  // no variance left; any orthogonal direction will do
    next /= norm;
    const double change = (next - v).norm();
    v = next;
    if (change < tol) break;
  }
  return v;
}

}  // namespace

Projection2d project_2d(const Matrix& features, double tol) {
  if (features.rows() < 3) throw ValidationError("project_2d needs at least 3 rows");
  const Matrix centered = features.rowwise() - features.colwise().mean();
  const Matrix scatter = centered.transpose() * centered;
  const Eigen::Index d = features.cols();

  Projection2d out;
  out.axes = Matrix::Zero(d, 2);
  out.variances = Vector::Zero(2);
  Rng rng(0x2d);
  Matrix found(d, 0);
  for (int axis = 0; axis < 2 && axis < d; ++axis) {
    const Vector v = power_iteration(scatter, found, tol, rng);
    const double variance = v.dot(scatter * v);
    const double top = axis == 0 ? variance : out.variances[0];
    if (v.norm() == 0.0 || variance <= 1e-12 * std::max(top, 1e-300)) {
      out.rank_deficient = true;
      break;
    }
    out.axes.col(axis) = v;
    out.variances[axis] = variance;
    found.conservativeResize(d, axis + 1);
    found.col(axis) = v;
  }
  if (d < 2) out.rank_deficient = true;
  out.coords = centered * out.axes;
  return out;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json per_class = nlohmann::json::object();
  nlohmann::json counts = nlohmann::json::object();
  nlohmann::json correct = nlohmann::json::object();
  for (const auto& s : r.per_class) {
    per_class[s.name] = s.accuracy;
    counts[s.name] = s.count;
    correct[s.name] = s.correct;
  }
  return {{"mean_per_class", r.mean_per_class},
          {"overall", r.overall},
          {"per_class", per_class},
          {"counts", counts},
          {"correct", correct},
          {"classes", r.classes},
          {"confusion", r.confusion},
          {"warnings", r.warnings},
          {"meta", {{"seed", r.meta.seed}, {"config_digest", r.meta.config_digest}, {"timestamp", r.meta.timestamp}}}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.mean_per_class = j.at("mean_per_class").get<double>();
    r.overall = j.at("overall").get<double>();
    r.classes = j.at("classes").get<std::vector<std::string>>();
    r.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& name : r.classes) {
      if (!j.at("per_class").contains(name)) continue;
      r.per_class.push_back({name, j.at("correct").at(name).get<std::size_t>(),
                             j.at("counts").at(name).get<std::size_t>(), j.at("per_class").at(name).get<double>()});
    }
    const auto& meta = j.at("meta");
    r.meta.seed = meta.at("seed").get<std::uint64_t>();
    r.meta.config_digest = meta.at("config_digest").get<std::string>();
    r.meta.timestamp = meta.at("timestamp").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what(), 0);
  }
}

void emit_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write report to " + path.string());
  if (format == ReportFormat::Json) {
    out << to_json(report).dump(2) << '\n';
  } else {
    out << "class,count,correct,accuracy\n";
    for (const auto& s : report.per_class)
      out << s.name << ',' << s.count << ',' << s.correct << ',' << format_double(s.accuracy) << '\n';
    out << "mean_per_class,,," << format_double(report.mean_per_class) << '\n';
    out << "overall,,," << format_double(report.overall) << '\n';
  }
  out.flush();
  if (!out) throw Error("failed writing report to " + path.string());
}

EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return report_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("report is not valid JSON: ") + e.what(), 0);
  }
}

void emit_grid_csv(const ReportGrid& grid, const std::filesystem::path& path) {
  require_shape(grid.values.size() == grid.methods.size(), "grid: one value row per method");
  std::ofstream out(path);
  if (!out) throw Error("cannot write grid to " + path.string());
  out << "method";
  for (const auto& g : grid.groups) out << ',' << g;
  out << '\n';
  for (std::size_t m = 0; m < grid.methods.size(); ++m) {
    require_shape(grid.values[m].size() == grid.groups.size(), "grid: one value per group");
    out << grid.methods[m];
    for (double v : grid.values[m]) out << ',' << format_double(v);
    out << '\n';
  }
  out.flush();
  if (!out) throw Error("failed writing grid to " + path.string());
}

}  // namespace sfzsl
