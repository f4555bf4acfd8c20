#pragma once

#include "sfzsl/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace sfzsl {

/// N feature vectors with optional class-name labels (empty string = unlabeled).
struct FeatureDataset {
  std::vector<std::string> sample_ids;
  Matrix features;
  std::vector<std::string> labels;

  std::size_t size() const { return sample_ids.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  bool has_label(std::size_t i) const { return !labels[i].empty(); }

  /// Rows at `indices`, in the given order.
  FeatureDataset subset(const std::vector<std::size_t>& indices) const;
};

struct ClassAttributeTable {
  std::vector<std::string> class_names;
  Matrix attributes;  // C x K

  std::size_t num_classes() const { return class_names.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(attributes.cols()); }
  std::optional<std::size_t> index_of(const std::string& name) const;
  /// Index of `name`, throwing ValidationError when absent.
  std::size_t require_index(const std::string& name) const;
  /// Attribute rows for the named classes, in the given order.
  Matrix rows_for(const std::vector<std::string>& names) const;
};

struct SplitSpec {
  std::vector<std::string> seen;
  std::vector<std::string> unseen;
};

struct SynthSpec {
  std::uint64_t seed = 7;
  std::size_t n_seen = 8;
  std::size_t n_unseen = 3;
  std::size_t dim = 32;
  std::size_t attr_dim = 16;
  std::size_t samples_per_class = 100;
  double noise_sigma = 0.1;
};

struct SyntheticBundle {
  FeatureDataset features;
  ClassAttributeTable table;
  SplitSpec split;
};

FeatureDataset load_features(const std::filesystem::path& path);
ClassAttributeTable load_attributes(const std::filesystem::path& path);
SplitSpec load_split(const std::filesystem::path& path);

void save_features(const FeatureDataset& data, const std::filesystem::path& path);
void save_attributes(const ClassAttributeTable& table, const std::filesystem::path& path);
void save_split(const SplitSpec& split, const std::filesystem::path& path);

/// Scale every class row to unit Euclidean norm. Throws on an all-zero row.
ClassAttributeTable normalize_attributes(ClassAttributeTable table);

/// Lists every invariant violation of the bundle; empty means usable.
/// `expected_dim`, when set, is checked against the feature width.
std::vector<std::string> validate_bundle(const FeatureDataset& features,
                                         const ClassAttributeTable& table,
                                         const SplitSpec& split,
                                         std::optional<std::size_t> expected_dim = std::nullopt);

SyntheticBundle gen_synthetic(const SynthSpec& spec);

/// Rows whose label is one of `classes`.
std::vector<std::size_t> rows_with_labels(const FeatureDataset& data,
                                          const std::vector<std::string>& classes);
/// Rows that are unlabeled or labeled with one of `classes`.
std::vector<std::size_t> rows_unlabeled_or(const FeatureDataset& data,
                                           const std::vector<std::string>& classes);

/// Format a double so that it parses back to the same value.
std::string format_double(double v);

}  // namespace sfzsl
