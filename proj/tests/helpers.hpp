#pragma once

#include "sfzsl/rng.hpp"
#include "sfzsl/types.hpp"

#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

namespace testing {

inline sfzsl::Matrix random_matrix(sfzsl::Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  sfzsl::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

inline sfzsl::Matrix random_uniform(sfzsl::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  sfzsl::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform();
  return m;
}

inline sfzsl::Vector flatten(const sfzsl::Matrix& m) {
  return Eigen::Map<const sfzsl::Vector>(m.data(), m.size());
}

inline sfzsl::Matrix unflatten(const sfzsl::Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const sfzsl::Matrix>(v.data(), rows, cols);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() / ("sfzsl_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace testing
