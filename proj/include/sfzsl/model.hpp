#pragma once

#include "sfzsl/attribute_space.hpp"
#include "sfzsl/dataset.hpp"
#include "sfzsl/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sfzsl {

/// SfLfgaa carries the semantic embedding module; Lfgaa is the same network without it.
enum class ModelKind { SfLfgaa, Lfgaa };
enum class PredictMode { Latent, Combined };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);
std::string to_string(PredictMode mode);
PredictMode predict_mode_from_string(const std::string& s);

struct TrainConfig {
  int epochs = 50;
  int batch_size = 64;
  std::uint64_t seed = 7;
  double lr = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double margin = 1.0;
  double beta1 = 1.0;   // attention loss weight
  double beta2 = 0.1;   // semantic embedding (BCE) loss weight
  double gamma = 0.01;  // feedback degree
  int warmup_epochs = 5;
  int hidden1 = 256;
  int hidden2 = 128;
  int embed_hidden = 64;
  double correlation_lambda = 1.0;
  bool attention_uses_adjusted = true;
  bool prototypes_use_adjusted = true;

  /// Throws ValidationError describing the first violated constraint.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

struct SfLfgaaModel {
  ModelKind kind = ModelKind::SfLfgaa;
  TrainConfig config;
  Mlp trunk;       // d -> h1 -> h2
  Dense aug_head;  // h2 -> 2K : [sem_pred ; latent]
  Dense att_head;  // (h1 + h2 + K) -> K, softmax
  Mlp sem_embed;   // h2 -> e -> K, logistic output (SfLfgaa only)

  int input_dim() const { return static_cast<int>(trunk.input_dim()); }
  int attr_dim() const { return static_cast<int>(aug_head.out_dim() / 2); }
  bool has_embed() const { return kind == ModelKind::SfLfgaa; }

  /// Parameter blocks in a fixed order: trunk, aug head, attention head, embed module.
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
};

/// Seeded initialization. Parameters shared by both kinds draw identical values
/// for equal seeds; the embedding module draws from its own stream.
SfLfgaaModel init_model(int input_dim, int attr_dim, const TrainConfig& config,
                        ModelKind kind = ModelKind::SfLfgaa);

struct ForwardPass {
  std::vector<Matrix> trunk_acts;  // h1, h2
  Matrix sem_pred;
  Matrix latent;
  Matrix latent_adj;
  Matrix att_input;
  Matrix attention;
  std::vector<Matrix> embed_acts;  // hidden, logits
  Matrix embed;                    // logistic(logits); 0.5-filled for Lfgaa

  const Matrix& h1() const { return trunk_acts[0]; }
  const Matrix& h2() const { return trunk_acts[1]; }
  const Matrix& embed_logits() const { return embed_acts.back(); }
};

/// Full forward pass with feedback degree `gamma` applied to the latents.
ForwardPass forward_full(const SfLfgaaModel& model, const Matrix& x, double gamma);

/// sigma + gamma * (embed - sigma).
Matrix apply_feedback(const Matrix& latent, const Matrix& embed, double gamma);

struct LossBreakdown {
  double lat = 0.0;
  double att = 0.0;
  double bce = 0.0;
  double total = 0.0;
};

/// Loss on one batch plus gradients for every parameter block (same order as
/// parameters()). `targets[i]` indexes a row of `candidate_attributes`;
/// `bce_targets` holds each sample's class attribute row.
LossBreakdown batch_loss(const SfLfgaaModel& model, const Matrix& x, std::span<const int> targets,
                         const Matrix& candidate_attributes, const Matrix& bce_targets, double gamma,
                         std::vector<Matrix>* grads);

struct EpochRecord {
  int epoch = 0;
  double lat = 0.0;
  double att = 0.0;
  double bce = 0.0;
  double total = 0.0;
  int batches = 0;
  int skipped_batches = 0;
  bool feedback_active = false;
};

struct TrainResult {
  SfLfgaaModel model;
  std::vector<EpochRecord> history;
};

/// Train on rows of `x` labeled by attribute-table indices `labels`.
/// The attention softmax ranges over the distinct classes present in `labels`.
TrainResult train(SfLfgaaModel model, const Matrix& x, std::span<const int> labels,
                  const ClassAttributeTable& table);

/// Convenience wrapper: initialize from config and train on the seen-labeled rows of a bundle.
TrainResult train(const FeatureDataset& data, const ClassAttributeTable& table, const SplitSpec& split,
                  const TrainConfig& config, ModelKind kind = ModelKind::SfLfgaa);

/// Everything prediction needs besides the query batch.
struct PrototypeContext {
  std::vector<std::string> seen;
  std::vector<std::string> unseen;
  Matrix seen_attributes;
  Matrix unseen_attributes;
  CorrelationMatrix correlation;
  PrototypeSet seen_prototypes;
  PrototypeSet unseen_prototypes;
};

/// Latent prototypes for seen classes from labeled seen rows, transferred to unseen classes.
PrototypeContext build_prototypes(const SfLfgaaModel& model, const FeatureDataset& seen_data,
                                  const ClassAttributeTable& table, const SplitSpec& split);

/// Unseen classes that have rows in `labeled_unseen` take the mean latent of those rows
/// as their prototype instead of the transferred one. Returns how many classes changed.
std::size_t refine_unseen_prototypes(const SfLfgaaModel& model, PrototypeContext& context,
                                     const FeatureDataset& labeled_unseen);

struct Predictions {
  std::vector<std::string> classes;  // candidate classes, score column order
  std::vector<std::size_t> predicted;
  Matrix scores;                      // N x candidates

  std::string label(std::size_t i) const { return classes[predicted[i]]; }
  double best_score(std::size_t i) const {
    return scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(predicted[i]));
  }
};

/// Zero-shot prediction over the unseen classes of `context`.
Predictions predict_batch(const SfLfgaaModel& model, const Matrix& x, const PrototypeContext& context,
                          PredictMode mode);

/// Prediction restricted to the seen classes, using seen prototypes directly.
Predictions predict_seen(const SfLfgaaModel& model, const Matrix& x, const PrototypeContext& context,
                         PredictMode mode);

/// Pick over explicit candidates: per-class attributes and latent prototypes.
Predictions predict_against(const SfLfgaaModel& model, const Matrix& x,
                            const std::vector<std::string>& classes, const Matrix& attributes,
                            const Matrix& prototypes, PredictMode mode);

constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const SfLfgaaModel& model);
SfLfgaaModel model_from_json(const nlohmann::json& j);
void save_model(const SfLfgaaModel& model, const std::filesystem::path& path);
/// Throws ParseError on truncated/corrupt files and ValidationError on version mismatch.
SfLfgaaModel load_model(const std::filesystem::path& path);

}  // namespace sfzsl
