#pragma once

#include "sfzsl/attribute_space.hpp"
#include "sfzsl/dataset.hpp"
#include "sfzsl/model.hpp"
#include "sfzsl/regressors.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sfzsl {

/// Per-class mean and population standard deviation of visual features.
struct ClassFeatureStats {
  std::vector<std::string> class_names;
  Matrix means;  // C x d
  Matrix stds;   // C x d
};

/// Stats per class; `labels[i]` indexes `class_names`. Every class needs >= 2 samples.
ClassFeatureStats class_feature_stats(const Matrix& features, std::span<const int> labels,
                                      const std::vector<std::string>& class_names);

/// Unseen stats as beta-weighted sums of seen stats; stds clamped at 0.
ClassFeatureStats transfer_stats(const CorrelationMatrix& corr, const ClassFeatureStats& seen,
                                 const std::vector<std::string>& unseen_names);

struct VirtualFeatureSet {
  std::vector<std::string> class_names;
  Matrix features;  // (C * per_class) x d, grouped by class
  std::vector<int> labels;
  Matrix prototypes;
  Matrix stds;
  std::size_t per_class = 0;
};

/// Diagonal-Gaussian draws at each class's (mean, std^2).
VirtualFeatureSet synth_virtual_features(const ClassFeatureStats& unseen, std::size_t per_class,
                                         std::uint64_t seed);

enum class PanelMode { Ensemble, NetworksOnly };

struct EctConfig {
  std::size_t n_virtual = 100;
  int max_iterations = 5;
  int high_threshold = 4;
  int low_threshold = 3;
  int rule_switch_iteration = 4;  // from this iteration on only the low threshold is used
  std::size_t keep = 5;
  std::uint64_t seed = 11;
  double holdout_fraction = 0.2;
  int secondary_hidden1 = 128;
  int secondary_hidden2 = 64;
  std::uint64_t secondary_seed_offset = 1;
  double lasso_alpha = 0.001;
  std::vector<double> ridge_alphas = kDefaultRidgeAlphas;
  PredictMode predict_mode = PredictMode::Latent;
  // NetworksOnly replaces each view's regressors by that view's network (test hook).
  PanelMode panel_mode = PanelMode::Ensemble;

  void validate() const;
};

nlohmann::json to_json(const EctConfig& config);
EctConfig ect_config_from_json(const nlohmann::json& j, EctConfig base = {});

enum class PredictorKind { Network, Regressor };

struct Predictor {
  std::string id;
  int view = 0;
  PredictorKind kind = PredictorKind::Network;
  std::optional<LinearAttributeMap> map;  // regressors only
};

nlohmann::json to_json(const Predictor& p);
Predictor predictor_from_json(const nlohmann::json& j);

/// One trained network plus its derived prediction state.
struct EctView {
  SfLfgaaModel model;
  PrototypeContext context;
  VirtualFeatureSet virtual_features;
};

/// Networks first (one per view), then {lasso, ridge-cv, bayes-ridge} per view.
std::vector<Predictor> build_panel(const std::vector<EctView>& views, const ClassAttributeTable& table,
                                   const SplitSpec& split, const EctConfig& config);

/// Class predictions of every panel member over `x` (rows x members); indices into
/// `candidates`. Networks use native prediction; regressors use nearest attribute by cosine.
std::vector<std::vector<int>> panel_predictions(const std::vector<Predictor>& panel,
                                                const std::vector<EctView>& views, const Matrix& x,
                                                bool seen_candidates, PredictMode mode);

/// Indices of the `keep` highest scores; ties go to the lower panel index. Result is in rank order.
std::vector<std::size_t> select_best_predictors(std::span<const double> scores, std::size_t keep);

/// The class reaching `threshold` votes if exactly one does, else nullopt (unreliable).
std::optional<int> vote_label(std::span<const int> votes, int threshold);
std::optional<std::string> vote_label(std::span<const std::string> votes, int threshold);

/// High threshold (4) when strictly more than half of the pool is reliable at it, else 3.
int choose_threshold(std::size_t reliable_at_high, std::size_t n_unseen_samples, int high = 4, int low = 3);

struct PseudoLabel {
  std::string sample_id;
  std::size_t row = 0;  // row in the unseen pool
  std::string label;
  int votes = 0;
  int iteration = 0;
  int threshold = 0;
  std::vector<std::string> voters;  // retained predictor ids, rank order
  std::vector<std::string> ballots; // their votes
};

struct IterationRecord {
  int iteration = 0;
  int threshold = 0;
  std::size_t reliable_high = 0;
  std::size_t reliable_low = 0;
  std::size_t pseudo_labeled = 0;
  std::vector<std::string> predictor_ids;
  std::vector<double> predictor_scores;
  std::vector<std::string> retained;
  std::vector<std::pair<std::string, std::size_t>> census;
  // Ground-truth diagnostics, present only when pool labels are known.
  std::optional<double> precision_high;
  std::optional<double> precision_low;
  std::optional<double> precision_used;
  std::optional<std::size_t> correct_high;
  std::optional<std::size_t> correct_low;
  std::optional<std::string> error;
};

struct EctResult {
  SfLfgaaModel model;  // primary
  PrototypeContext context;  // primary view; pseudo-labeled unseen classes use their own latent means
  int primary_view = 0;
  std::vector<double> view_holdout_accuracy;
  std::vector<PseudoLabel> pseudo_labels;
  std::vector<IterationRecord> history;
  std::vector<Predictor> final_panel;
  std::vector<std::string> warnings;
};

/// Ensemble co-training. Rows labeled with a seen class are supervision; rows that
/// are unlabeled or labeled with an unseen class form the unlabeled pool (their
/// labels are used only for the precision diagnostics in the history).
EctResult run_ect(const FeatureDataset& data, const ClassAttributeTable& table, const SplitSpec& split,
                  const EctConfig& ect_config, const TrainConfig& train_config);

/// Run manifest: configs, per-iteration records, pseudo-labels, final panel provenance.
nlohmann::json ect_manifest(const EctResult& result, const EctConfig& ect_config, const TrainConfig& train_config);

}  // namespace sfzsl
