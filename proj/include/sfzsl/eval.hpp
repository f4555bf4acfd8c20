#pragma once

#include "sfzsl/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sfzsl {

struct ClassScore {
  std::string name;
  std::size_t correct = 0;
  std::size_t count = 0;
  double accuracy = 0.0;

  bool operator==(const ClassScore&) const = default;
};

struct ReportMeta {
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string timestamp;

  bool operator==(const ReportMeta&) const = default;
};

struct EvalReport {
  std::vector<std::string> classes;  // confusion row/column order
  std::vector<ClassScore> per_class;  // classes with at least one sample
  double mean_per_class = 0.0;
  double overall = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // true x predicted
  std::vector<std::string> warnings;
  ReportMeta meta;

  bool operator==(const EvalReport&) const = default;
};

/// Rows = true class, columns = predicted class, both in `classes` order.
/// Throws ValidationError on a label outside `classes`.
std::vector<std::vector<std::size_t>> confusion_matrix(const std::vector<std::string>& predictions,
                                                       const std::vector<std::string>& truths,
                                                       const std::vector<std::string>& classes);

/// Mean over classes of per-class Top-1 accuracy. Classes without samples are
/// excluded from the mean with a warning.
EvalReport mean_per_class_top1(const std::vector<std::string>& predictions,
                               const std::vector<std::string>& truths,
                               const std::vector<std::string>& classes);

struct Projection2d {
  Matrix coords;  // N x 2
  Matrix axes;    // d x 2
  Vector variances;  // eigenvalues of the scatter matrix along each axis
  bool rank_deficient = false;
};

/// Projection of the centered rows onto the top-2 principal directions, found by
/// power iteration with deflation. A second axis that carries no variance is zero-filled.
Projection2d project_2d(const Matrix& features, double tol = 1e-9);

enum class ReportFormat { Json, Csv };

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

void emit_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format);
EvalReport load_report(const std::filesystem::path& path);

/// Method x group grid of mean per-class accuracies, one row per method.
struct ReportGrid {
  std::vector<std::string> groups;
  std::vector<std::string> methods;
  std::vector<std::vector<double>> values;  // methods x groups
};

void emit_grid_csv(const ReportGrid& grid, const std::filesystem::path& path);

}  // namespace sfzsl
