#include "sfzsl/ect.hpp"

#include "sfzsl/eval.hpp"
#include "sfzsl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace sfzsl {

namespace {

constexpr std::uint64_t kHoldoutStream = 0x40;
constexpr std::uint64_t kVirtualStream = 0x41;

const char* const kViewSuffix[] = {"a", "b"};

}  // namespace

ClassFeatureStats class_feature_stats(const Matrix& features, std::span<const int> labels,
                                      const std::vector<std::string>& class_names) {
  require_shape(static_cast<Eigen::Index>(labels.size()) == features.rows(), "stats: one label per row");
  const auto c = static_cast<Eigen::Index>(class_names.size());
  ClassFeatureStats out{class_names, Matrix::Zero(c, features.cols()), Matrix::Zero(c, features.cols())};
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= c) throw ValidationError("stats: label index out of range");
    out.means.row(labels[i]) += features.row(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 2)
      throw ValidationError("stats: class '" + class_names[k] + "' needs at least 2 samples");
    out.means.row(static_cast<Eigen::Index>(k)) /= static_cast<double>(counts[k]);
  }
  // Second pass on deviations from the mean.
  for (std::size_t i = 0; i < labels.size(); ++i)
    out.stds.row(labels[i]) +=
        (features.row(static_cast<Eigen::Index>(i)) - out.means.row(labels[i])).cwiseAbs2();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    out.stds.row(row) = (out.stds.row(row) / static_cast<double>(counts[k])).cwiseSqrt();
  }
  return out;
}

ClassFeatureStats transfer_stats(const CorrelationMatrix& corr, const ClassFeatureStats& seen,
                                 const std::vector<std::string>& unseen_names) {
  require_shape(corr.coefficients.cols() == seen.means.rows(),
                "stat transfer: correlation columns do not align with seen classes");
  require_shape(corr.coefficients.rows() == static_cast<Eigen::Index>(unseen_names.size()),
                "stat transfer: correlation rows do not align with unseen classes");
  return ClassFeatureStats{unseen_names, corr.coefficients * seen.means,
                           (corr.coefficients * seen.stds).cwiseMax(0.0)};
}

VirtualFeatureSet synth_virtual_features(const ClassFeatureStats& unseen, std::size_t per_class,
                                         std::uint64_t seed) {
  if (per_class < 1) throw ValidationError("virtual features: need at least 1 sample per class");
  VirtualFeatureSet out;
  out.class_names = unseen.class_names;
  out.prototypes = unseen.means;
  out.stds = unseen.stds;
  out.per_class = per_class;
  const Eigen::Index d = unseen.means.cols();
  out.features.resize(unseen.means.rows() * static_cast<Eigen::Index>(per_class), d);
  Rng rng(seed);
  Eigen::Index row = 0;
  for (Eigen::Index c = 0; c < unseen.means.rows(); ++c) {
    for (std::size_t s = 0; s < per_class; ++s, ++row) {
      for (Eigen::Index j = 0; j < d; ++j)
        out.features(row, j) = unseen.means(c, j) + unseen.stds(c, j) * rng.normal();
      out.labels.push_back(static_cast<int>(c));
    }
  }
  return out;
}

void EctConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("ect config: " + msg); };
  if (n_virtual < 1) fail("n_virtual must be >= 1");
  if (max_iterations < 0) fail("max_iterations must be >= 0");
  if (keep < 1 || keep > 8) fail("keep must lie in [1, 8]");
  if (low_threshold < 1 || high_threshold < low_threshold) fail("need 1 <= low_threshold <= high_threshold");
  if (static_cast<std::size_t>(high_threshold) > keep) fail("thresholds must not exceed the retained panel size");
  if (rule_switch_iteration < 1) fail("rule_switch_iteration must be >= 1");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) fail("holdout_fraction must lie in (0, 1)");
  if (secondary_hidden1 < 1 || secondary_hidden2 < 1) fail("secondary hidden dims must be >= 1");
  if (!(lasso_alpha > 0.0)) fail("lasso_alpha must be > 0");
  if (ridge_alphas.empty()) fail("ridge_alphas must be nonempty");
}

nlohmann::json to_json(const EctConfig& c) {
  return {{"n_virtual", c.n_virtual},
          {"max_iterations", c.max_iterations},
          {"high_threshold", c.high_threshold},
          {"low_threshold", c.low_threshold},
          {"rule_switch_iteration", c.rule_switch_iteration},
          {"keep", c.keep},
          {"seed", c.seed},
          {"holdout_fraction", c.holdout_fraction},
          {"secondary_hidden1", c.secondary_hidden1},
          {"secondary_hidden2", c.secondary_hidden2},
          {"secondary_seed_offset", c.secondary_seed_offset},
          {"lasso_alpha", c.lasso_alpha},
          {"ridge_alphas", c.ridge_alphas},
          {"predict_mode", to_string(c.predict_mode)},
          {"panel_mode", c.panel_mode == PanelMode::Ensemble ? "ensemble" : "networks-only"}};
}

EctConfig ect_config_from_json(const nlohmann::json& j, EctConfig c) {
  if (!j.is_object()) throw ValidationError("ect config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "n_virtual") c.n_virtual = value.get<std::size_t>();
      else if (key == "max_iterations") c.max_iterations = value.get<int>();
      else if (key == "high_threshold") c.high_threshold = value.get<int>();
      else if (key == "low_threshold") c.low_threshold = value.get<int>();
      else if (key == "rule_switch_iteration") c.rule_switch_iteration = value.get<int>();
      else if (key == "keep") c.keep = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "holdout_fraction") c.holdout_fraction = value.get<double>();
      else if (key == "secondary_hidden1") c.secondary_hidden1 = value.get<int>();
      else if (key == "secondary_hidden2") c.secondary_hidden2 = value.get<int>();
      else if (key == "secondary_seed_offset") c.secondary_seed_offset = value.get<std::uint64_t>();
      else if (key == "lasso_alpha") c.lasso_alpha = value.get<double>();
      else if (key == "ridge_alphas") c.ridge_alphas = value.get<std::vector<double>>();
      else if (key == "predict_mode") c.predict_mode = predict_mode_from_string(value.get<std::string>());
      else if (key == "panel_mode") {
        const auto mode = value.get<std::string>();
        if (mode == "ensemble") c.panel_mode = PanelMode::Ensemble;
        else if (mode == "networks-only") c.panel_mode = PanelMode::NetworksOnly;
        else throw ValidationError("unknown panel mode '" + mode + "'");
      } else {
        throw ValidationError("unknown ect config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("ect config key '" + key + "' has the wrong type");
    }
  }
  return c;
}

nlohmann::json to_json(const Predictor& p) {
  nlohmann::json j{{"id", p.id}, {"view", p.view}, {"kind", p.kind == PredictorKind::Network ? "network" : "regressor"}};
  if (p.map) j["map"] = to_json(*p.map);
  return j;
}

Predictor predictor_from_json(const nlohmann::json& j) {
  try {
    Predictor p;
    p.id = j.at("id").get<std::string>();
    p.view = j.at("view").get<int>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "network") p.kind = PredictorKind::Network;
    else if (kind == "regressor") p.kind = PredictorKind::Regressor;
    else throw ParseError("unknown predictor kind '" + kind + "'", 0);
    if (j.contains("map")) p.map = linear_map_from_json(j.at("map"));
    if (p.kind == PredictorKind::Regressor && !p.map) throw ParseError("regressor without a fitted map", 0);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed predictor: ") + e.what(), 0);
  }
}

std::vector<Predictor> build_panel(const std::vector<EctView>& views, const ClassAttributeTable& table,
                                   const SplitSpec& split, const EctConfig& config) {
  require_shape(views.size() == 2, "panel: expected exactly two views");
  std::vector<Predictor> panel;
  for (int v = 0; v < 2; ++v)
    panel.push_back({std::string("net-") + kViewSuffix[v], v, PredictorKind::Network, std::nullopt});

  const Matrix unseen_attributes = table.rows_for(split.unseen);
  for (int v = 0; v < 2; ++v) {
    const auto& vf = views[static_cast<std::size_t>(v)].virtual_features;
    const std::string suffix = kViewSuffix[v];
    if (config.panel_mode == PanelMode::NetworksOnly) {
      for (int r = 0; r < 3; ++r)
        panel.push_back({"net-" + suffix + "#" + std::to_string(r + 2), v, PredictorKind::Network, std::nullopt});
      continue;
    }
    Matrix targets(vf.features.rows(), unseen_attributes.cols());
    for (std::size_t i = 0; i < vf.labels.size(); ++i)
      targets.row(static_cast<Eigen::Index>(i)) = unseen_attributes.row(vf.labels[i]);
    auto fit = [&](const std::string& id, auto&& fn) {
      try {
        panel.push_back({id + "-" + suffix, v, PredictorKind::Regressor, fn()});
      } catch (const Error& e) {
        throw Error("panel member " + id + "-" + suffix + ": " + e.what());
      }
    };
    fit("lasso", [&] { return fit_lasso(vf.features, targets, config.lasso_alpha); });
    fit("ridge", [&] { return fit_ridge_cv(vf.features, targets, config.ridge_alphas); });
    fit("bayes", [&] { return fit_bayes_ridge(vf.features, targets); });
  }
  return panel;
}

std::vector<std::vector<int>> panel_predictions(const std::vector<Predictor>& panel,
                                                const std::vector<EctView>& views, const Matrix& x,
                                                bool seen_candidates, PredictMode mode) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(x.rows()), std::vector<int>(panel.size(), 0));
  if (x.rows() == 0) return out;
  std::vector<Matrix> trunk_features(views.size());
  for (std::size_t m = 0; m < panel.size(); ++m) {
    const Predictor& p = panel[m];
    const EctView& view = views.at(static_cast<std::size_t>(p.view));
    const PrototypeContext& ctx = view.context;
    std::vector<std::size_t> predicted;
    if (p.kind == PredictorKind::Network) {
      predicted = seen_candidates ? predict_seen(view.model, x, ctx, mode).predicted
                                  : predict_batch(view.model, x, ctx, mode).predicted;
    } else {
      Matrix& feats = trunk_features[static_cast<std::size_t>(p.view)];
      if (!feats.size()) feats = forward_full(view.model, x, view.model.config.gamma).h2();
      const Matrix attrs = predict_attributes(*p.map, feats);
      const Matrix sims = cosine_matrix(attrs, seen_candidates ? ctx.seen_attributes : ctx.unseen_attributes);
      for (Eigen::Index i = 0; i < sims.rows(); ++i) predicted.push_back(argmax_first(sims.row(i)));
    }
    for (std::size_t i = 0; i < predicted.size(); ++i) out[i][m] = static_cast<int>(predicted[i]);
  }
  return out;
}

std::vector<std::size_t> select_best_predictors(std::span<const double> scores, std::size_t keep) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(keep, order.size()));
  return order;
}

std::optional<int> vote_label(std::span<const int> votes, int threshold) {
  std::map<int, int> counts;
  for (int v : votes) ++counts[v];
  std::optional<int> winner;
  for (const auto& [label, count] : counts) {
    if (count < threshold) continue;
    if (winner) return std::nullopt;
    winner = label;
  }
  return winner;
}

std::optional<std::string> vote_label(std::span<const std::string> votes, int threshold) {
  std::map<std::string, int> ids;
  std::vector<std::string> names;
  std::vector<int> encoded;
  for (const auto& v : votes) {
    auto [it, inserted] = ids.emplace(v, static_cast<int>(names.size()));
    if (inserted) names.push_back(v);
    encoded.push_back(it->second);
  }
  const auto winner = vote_label(std::span<const int>(encoded), threshold);
  if (!winner) return std::nullopt;
  return names[static_cast<std::size_t>(*winner)];
}

int choose_threshold(std::size_t reliable_at_high, std::size_t n_unseen_samples, int high, int low) {
  return 2 * reliable_at_high > n_unseen_samples ? high : low;
}

namespace {

struct TrainingSet {
  Matrix x;
  std::vector<int> labels;  // attribute-table indices
};

TrainingSet make_training_set(const FeatureDataset& seen_train, const Matrix& pool,
                              const std::vector<PseudoLabel>& pseudo, const ClassAttributeTable& table) {
  TrainingSet set;
  set.x.resize(static_cast<Eigen::Index>(seen_train.size() + pseudo.size()), seen_train.features.cols());
  set.x.topRows(static_cast<Eigen::Index>(seen_train.size())) = seen_train.features;
  for (const auto& name : seen_train.labels) set.labels.push_back(static_cast<int>(table.require_index(name)));
  for (std::size_t p = 0; p < pseudo.size(); ++p) {
    set.x.row(static_cast<Eigen::Index>(seen_train.size() + p)) = pool.row(static_cast<Eigen::Index>(pseudo[p].row));
    set.labels.push_back(static_cast<int>(table.require_index(pseudo[p].label)));
  }
  return set;
}

// Unseen classes with at least two pseudo-labeled rows use their empirical stats.
void refine_unseen_stats(ClassFeatureStats& stats, const Matrix& pool_h2, const std::vector<PseudoLabel>& pseudo) {
  for (std::size_t c = 0; c < stats.class_names.size(); ++c) {
    std::vector<std::size_t> rows;
    for (const auto& pl : pseudo)
      if (pl.label == stats.class_names[c]) rows.push_back(pl.row);
    if (rows.size() < 2) continue;
    Matrix x(static_cast<Eigen::Index>(rows.size()), pool_h2.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = pool_h2.row(static_cast<Eigen::Index>(rows[i]));
    const RowVector mean = x.colwise().mean();
    const auto row = static_cast<Eigen::Index>(c);
    stats.means.row(row) = mean;
    stats.stds.row(row) = ((x.rowwise() - mean).cwiseAbs2().colwise().sum() / static_cast<double>(rows.size())).cwiseSqrt();
  }
}

double holdout_score(const std::vector<std::vector<int>>& predictions, std::size_t member,
                     const std::vector<int>& truth, const std::vector<std::string>& classes) {
  std::vector<std::string> pred, gold;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    pred.push_back(classes[static_cast<std::size_t>(predictions[i][member])]);
    gold.push_back(classes[static_cast<std::size_t>(truth[i])]);
  }
  return mean_per_class_top1(pred, gold, classes).mean_per_class;
}

}  // namespace

EctResult run_ect(const FeatureDataset& data, const ClassAttributeTable& table, const SplitSpec& split,
                  const EctConfig& config, const TrainConfig& train_config) {
  config.validate();
  train_config.validate();
  if (const auto issues = validate_bundle(data, table, split); !issues.empty())
    throw ValidationError("ect: invalid bundle: " + issues.front());

  // Stratified hold-out of seen rows for ranking predictors and picking the primary view.
  std::vector<std::size_t> train_rows, holdout_rows;
  {
    Rng rng(derive_seed(config.seed, kHoldoutStream));
    for (const auto& name : split.seen) {
      std::vector<std::size_t> rows = rows_with_labels(data, {name});
      rng.shuffle(rows);
      std::size_t n_hold = static_cast<std::size_t>(std::floor(config.holdout_fraction * static_cast<double>(rows.size())));
      if (rows.size() >= 3) n_hold = std::clamp<std::size_t>(n_hold, 1, rows.size() - 2);
      else n_hold = 0;
      holdout_rows.insert(holdout_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_hold));
      train_rows.insert(train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_hold), rows.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(holdout_rows.begin(), holdout_rows.end());
  }
  if (holdout_rows.empty()) throw ValidationError("ect: empty validation split (seen classes too small)");
  const FeatureDataset seen_train = data.subset(train_rows);
  const FeatureDataset holdout = data.subset(holdout_rows);
  std::vector<int> holdout_truth;
  for (const auto& name : holdout.labels)
    holdout_truth.push_back(static_cast<int>(std::find(split.seen.begin(), split.seen.end(), name) - split.seen.begin()));

  const FeatureDataset pool = data.subset(rows_unlabeled_or(data, split.unseen));
  std::vector<int> pool_truth;  // index into split.unseen or -1
  for (const auto& name : pool.labels) {
    auto it = std::find(split.unseen.begin(), split.unseen.end(), name);
    pool_truth.push_back(it == split.unseen.end() ? -1 : static_cast<int>(it - split.unseen.begin()));
  }

  std::vector<TrainConfig> view_configs(2, train_config);
  view_configs[1].hidden1 = config.secondary_hidden1;
  view_configs[1].hidden2 = config.secondary_hidden2;
  view_configs[1].seed = train_config.seed + config.secondary_seed_offset;

  const int d = static_cast<int>(data.dim());
  const int k = static_cast<int>(table.dim());
  auto train_views = [&](const TrainingSet& set, const std::vector<PseudoLabel>& pseudo) {
    FeatureDataset marked;
    marked.features.resize(static_cast<Eigen::Index>(pseudo.size()), pool.features.cols());
    for (std::size_t p = 0; p < pseudo.size(); ++p) {
      marked.sample_ids.push_back(pseudo[p].sample_id);
      marked.labels.push_back(pseudo[p].label);
      marked.features.row(static_cast<Eigen::Index>(p)) = pool.features.row(static_cast<Eigen::Index>(pseudo[p].row));
    }
    std::vector<EctView> views;
    for (const auto& cfg : view_configs) {
      EctView view;
      view.model = train(init_model(d, k, cfg), set.x, set.labels, table).model;
      view.context = build_prototypes(view.model, seen_train, table, split);
      refine_unseen_prototypes(view.model, view.context, marked);
      views.push_back(std::move(view));
    }
    return views;
  };

  EctResult result;
  std::vector<EctView> views = train_views(make_training_set(seen_train, pool.features, {}, table), {});

  if (pool.size() == 0) {
    result.warnings.push_back("no unlabeled unseen samples; co-training reduces to plain training");
  }

  const int iterations = pool.size() == 0 ? 0 : config.max_iterations;
  for (int it = 1; it <= iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    try {
      // Virtual unseen features in each view's trunk-output space.
      std::vector<int> seen_labels;
      for (const auto& name : seen_train.labels)
        seen_labels.push_back(static_cast<int>(std::find(split.seen.begin(), split.seen.end(), name) - split.seen.begin()));
      for (int v = 0; v < 2; ++v) {
        EctView& view = views[static_cast<std::size_t>(v)];
        const Matrix h2 = forward_full(view.model, seen_train.features, view.model.config.gamma).h2();
        const ClassFeatureStats seen_stats = class_feature_stats(h2, seen_labels, split.seen);
        ClassFeatureStats unseen_stats = transfer_stats(view.context.correlation, seen_stats, split.unseen);
        refine_unseen_stats(unseen_stats, forward_full(view.model, pool.features, view.model.config.gamma).h2(),
                            result.pseudo_labels);
        const std::uint64_t seed = derive_seed(config.seed, kVirtualStream + static_cast<std::uint64_t>(16 * it + v));
        view.virtual_features = synth_virtual_features(unseen_stats, config.n_virtual, seed);
      }

      const std::vector<Predictor> panel = build_panel(views, table, split, config);
      const auto holdout_pred = panel_predictions(panel, views, holdout.features, true, config.predict_mode);
      for (std::size_t m = 0; m < panel.size(); ++m) {
        rec.predictor_ids.push_back(panel[m].id);
        rec.predictor_scores.push_back(holdout_score(holdout_pred, m, holdout_truth, split.seen));
      }
      const auto retained = select_best_predictors(rec.predictor_scores, config.keep);
      for (std::size_t m : retained) rec.retained.push_back(panel[m].id);

      const auto pool_pred = panel_predictions(panel, views, pool.features, false, config.predict_mode);
      std::vector<std::optional<int>> winner_high(pool.size()), winner_low(pool.size());
      std::vector<std::vector<int>> ballots(pool.size());
      std::size_t correct_high = 0, correct_low = 0, labeled_high = 0, labeled_low = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        for (std::size_t m : retained) ballots[i].push_back(pool_pred[i][m]);
        winner_high[i] = vote_label(std::span<const int>(ballots[i]), config.high_threshold);
        winner_low[i] = vote_label(std::span<const int>(ballots[i]), config.low_threshold);
        if (winner_high[i]) ++rec.reliable_high;
        if (winner_low[i]) ++rec.reliable_low;
        if (pool_truth[i] >= 0) {
          if (winner_high[i]) ++labeled_high, correct_high += *winner_high[i] == pool_truth[i];
          if (winner_low[i]) ++labeled_low, correct_low += *winner_low[i] == pool_truth[i];
        }
      }
      rec.threshold = it < config.rule_switch_iteration
                          ? choose_threshold(rec.reliable_high, pool.size(), config.high_threshold, config.low_threshold)
                          : config.low_threshold;

      // Rebuild the pseudo-labeled set from this iteration's votes.
      std::vector<PseudoLabel> pseudo;
      std::map<std::string, std::size_t> census;
      std::size_t correct_used = 0, labeled_used = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto& winner = rec.threshold == config.high_threshold ? winner_high[i] : winner_low[i];
        if (!winner) continue;
        PseudoLabel pl;
        pl.sample_id = pool.sample_ids[i];
        pl.row = i;
        pl.label = split.unseen[static_cast<std::size_t>(*winner)];
        pl.votes = static_cast<int>(std::count(ballots[i].begin(), ballots[i].end(), *winner));
        pl.iteration = it;
        pl.threshold = rec.threshold;
        for (std::size_t r = 0; r < retained.size(); ++r) {
          pl.voters.push_back(panel[retained[r]].id);
          pl.ballots.push_back(split.unseen[static_cast<std::size_t>(ballots[i][r])]);
        }
        ++census[pl.label];
        if (pool_truth[i] >= 0) ++labeled_used, correct_used += *winner == pool_truth[i];
        pseudo.push_back(std::move(pl));
      }
      for (const auto& name : split.unseen) rec.census.emplace_back(name, census[name]);
      rec.pseudo_labeled = pseudo.size();
      if (labeled_high) rec.precision_high = static_cast<double>(correct_high) / static_cast<double>(labeled_high);
      if (labeled_low) rec.precision_low = static_cast<double>(correct_low) / static_cast<double>(labeled_low);
      if (labeled_used) rec.precision_used = static_cast<double>(correct_used) / static_cast<double>(labeled_used);
      if (labeled_high || labeled_low) {
        rec.correct_high = correct_high;
        rec.correct_low = correct_low;
      }

      std::vector<EctView> next = train_views(make_training_set(seen_train, pool.features, pseudo, table), pseudo);
      views = std::move(next);
      result.pseudo_labels = std::move(pseudo);
      result.final_panel = panel;
      result.history.push_back(std::move(rec));
    } catch (const Error& e) {
      rec.error = e.what();
      result.history.push_back(std::move(rec));
      break;
    }
  }

  // The view with the better held-out seen accuracy becomes the primary model.
  std::vector<Predictor> networks;
  for (int v = 0; v < 2; ++v)
    networks.push_back({std::string("net-") + kViewSuffix[v], v, PredictorKind::Network, std::nullopt});
  const auto final_pred = panel_predictions(networks, views, holdout.features, true, config.predict_mode);
  for (std::size_t v = 0; v < 2; ++v)
    result.view_holdout_accuracy.push_back(holdout_score(final_pred, v, holdout_truth, split.seen));
  result.primary_view = result.view_holdout_accuracy[1] > result.view_holdout_accuracy[0] ? 1 : 0;
  result.model = views[static_cast<std::size_t>(result.primary_view)].model;
  result.context = views[static_cast<std::size_t>(result.primary_view)].context;
  return result;
}

nlohmann::json ect_manifest(const EctResult& result, const EctConfig& ect_config, const TrainConfig& train_config) {
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& rec : result.history) {
    nlohmann::json scores = nlohmann::json::object();
    for (std::size_t m = 0; m < rec.predictor_ids.size(); ++m) scores[rec.predictor_ids[m]] = rec.predictor_scores[m];
    nlohmann::json census = nlohmann::json::object();
    for (const auto& [name, count] : rec.census) census[name] = count;
    nlohmann::json j{{"iteration", rec.iteration},
                     {"threshold", rec.threshold},
                     {"reliable_counts", {{"high", rec.reliable_high}, {"low", rec.reliable_low}}},
                     {"pseudo_labeled", rec.pseudo_labeled},
                     {"predictor_order", rec.predictor_ids},
                     {"predictor_scores", scores},
                     {"retained", rec.retained},
                     {"census", census}};
    if (rec.precision_high) j["precision_high"] = *rec.precision_high;
    if (rec.precision_low) j["precision_low"] = *rec.precision_low;
    if (rec.precision_used) j["precision_used"] = *rec.precision_used;
    if (rec.error) j["error"] = *rec.error;
    iterations.push_back(j);
  }
  nlohmann::json pseudo = nlohmann::json::array();
  for (const auto& pl : result.pseudo_labels)
    pseudo.push_back({{"id", pl.sample_id}, {"label", pl.label}, {"votes", pl.votes}, {"iteration", pl.iteration},
                      {"threshold", pl.threshold}, {"voters", pl.voters}, {"ballots", pl.ballots}});
  nlohmann::json panel = nlohmann::json::array();
  for (const auto& p : result.final_panel) panel.push_back(to_json(p));
  return {{"ect_config", to_json(ect_config)},
          {"train_config", to_json(train_config)},
          {"iterations", iterations},
          {"primary_view", result.primary_view},
          {"view_holdout_accuracy", result.view_holdout_accuracy},
          {"pseudo_labels", pseudo},
          {"final_panel", panel},
          {"warnings", result.warnings}};
}

}  // namespace sfzsl
