#include "sfzsl/model.hpp"

#include "sfzsl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace sfzsl {

namespace {

constexpr std::uint64_t kEmbedStream = 0x5e;
constexpr std::uint64_t kShuffleStream = 0x5f;

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::SfLfgaa ? "sf-lfgaa" : "lfgaa"; }

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "sf-lfgaa") return ModelKind::SfLfgaa;
  if (s == "lfgaa") return ModelKind::Lfgaa;
  throw ValidationError("unknown model kind '" + s + "'");
}

std::string to_string(PredictMode mode) { return mode == PredictMode::Latent ? "latent" : "combined"; }

PredictMode predict_mode_from_string(const std::string& s) {
  if (s == "latent") return PredictMode::Latent;
  if (s == "combined") return PredictMode::Combined;
  throw ValidationError("unknown prediction mode '" + s + "' (expected latent|combined)");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("train config: " + msg); };
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 2) fail("batch_size must be >= 2");
  if (warmup_epochs < 0 || warmup_epochs > epochs)
    fail("warmup_epochs must lie in [0, epochs]");
  if (!(lr > 0.0)) fail("lr must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    fail("Adam betas must lie in [0, 1)");
  if (!(margin > 0.0)) fail("margin must be > 0");
  if (!(beta1 >= 0.0) || !(beta2 >= 0.0)) fail("loss weights must be >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must lie in [0, 1]");
  if (hidden1 < 1 || hidden2 < 1 || embed_hidden < 1) fail("hidden dims must be >= 1");
  if (!(correlation_lambda >= 0.0)) fail("correlation_lambda must be >= 0");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"lr", c.lr},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"margin", c.margin},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"gamma", c.gamma},
          {"warmup_epochs", c.warmup_epochs},
          {"hidden1", c.hidden1},
          {"hidden2", c.hidden2},
          {"embed_hidden", c.embed_hidden},
          {"correlation_lambda", c.correlation_lambda},
          {"attention_uses_adjusted", c.attention_uses_adjusted},
          {"prototypes_use_adjusted", c.prototypes_use_adjusted}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  if (!j.is_object()) throw ValidationError("train config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "adam_beta1") c.adam_beta1 = value.get<double>();
      else if (key == "adam_beta2") c.adam_beta2 = value.get<double>();
      else if (key == "margin") c.margin = value.get<double>();
      else if (key == "beta1") c.beta1 = value.get<double>();
      else if (key == "beta2") c.beta2 = value.get<double>();
      else if (key == "gamma") c.gamma = value.get<double>();
      else if (key == "warmup_epochs") c.warmup_epochs = value.get<int>();
      else if (key == "hidden1") c.hidden1 = value.get<int>();
      else if (key == "hidden2") c.hidden2 = value.get<int>();
      else if (key == "embed_hidden") c.embed_hidden = value.get<int>();
      else if (key == "correlation_lambda") c.correlation_lambda = value.get<double>();
      else if (key == "attention_uses_adjusted") c.attention_uses_adjusted = value.get<bool>();
      else if (key == "prototypes_use_adjusted") c.prototypes_use_adjusted = value.get<bool>();
      else throw ValidationError("unknown train config key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("train config key '" + key + "' has the wrong type");
    }
  }
  return c;
}

std::vector<Matrix*> SfLfgaaModel::parameters() {
  std::vector<Matrix*> out;
  for (auto& layer : trunk.layers()) out.insert(out.end(), {&layer.weight, &layer.bias});
  out.insert(out.end(), {&aug_head.weight, &aug_head.bias, &att_head.weight, &att_head.bias});
  if (has_embed())
    for (auto& layer : sem_embed.layers()) out.insert(out.end(), {&layer.weight, &layer.bias});
  return out;
}

std::vector<const Matrix*> SfLfgaaModel::parameters() const {
  auto blocks = const_cast<SfLfgaaModel*>(this)->parameters();
  return {blocks.begin(), blocks.end()};
}

SfLfgaaModel init_model(int input_dim, int attr_dim, const TrainConfig& config, ModelKind kind) {
  config.validate();
  if (input_dim < 1 || attr_dim < 2) throw ValidationError("model needs d >= 1 and K >= 2");
  SfLfgaaModel model;
  model.kind = kind;
  model.config = config;
  Rng rng(config.seed);
  model.trunk = Mlp({input_dim, config.hidden1, config.hidden2}, rng);
  model.aug_head = Dense::glorot(config.hidden2, 2 * attr_dim, rng);
  model.att_head = Dense::glorot(config.hidden1 + config.hidden2 + attr_dim, attr_dim, rng);
  if (kind == ModelKind::SfLfgaa) {
    Rng embed_rng(derive_seed(config.seed, kEmbedStream));
    model.sem_embed = Mlp({config.hidden2, config.embed_hidden, attr_dim}, embed_rng);
  }
  return model;
}

Matrix apply_feedback(const Matrix& latent, const Matrix& embed, double gamma) {
  require_shape(latent.rows() == embed.rows() && latent.cols() == embed.cols(),
                "feedback: latent and embedding shapes differ");
  if (!(gamma >= 0.0)) throw ValidationError("feedback: gamma must be >= 0");
  if (gamma == 0.0) return latent;
  return latent + gamma * (embed - latent);
}

ForwardPass forward_full(const SfLfgaaModel& model, const Matrix& x, double gamma) {
  require_shape(x.cols() == model.input_dim(), "model expects d=" + std::to_string(model.input_dim()) +
                                                   " features, got " + std::to_string(x.cols()));
  const Eigen::Index k = model.attr_dim();
  ForwardPass f;
  f.trunk_acts = model.trunk.forward(x);
  const Matrix aug = model.aug_head.apply(f.h2());
  f.sem_pred = aug.leftCols(k);
  f.latent = aug.rightCols(k);

  if (model.has_embed()) {
    f.embed_acts = model.sem_embed.forward(f.h2());
    f.embed = f.embed_logits().unaryExpr([](double z) { return sigmoid(z); });
    f.latent_adj = apply_feedback(f.latent, f.embed, gamma);
  } else {
    f.embed = Matrix::Constant(x.rows(), k, 0.5);
    f.latent_adj = f.latent;
  }

  const Matrix& att_latent = model.config.attention_uses_adjusted ? f.latent_adj : f.latent;
  f.att_input.resize(x.rows(), f.h1().cols() + f.h2().cols() + k);
  f.att_input << f.h1(), f.h2(), att_latent;
  f.attention = softmax_rows(model.att_head.apply(f.att_input));
  return f;
}

LossBreakdown batch_loss(const SfLfgaaModel& model, const Matrix& x, std::span<const int> targets,
                         const Matrix& candidate_attributes, const Matrix& bce_targets, double gamma,
                         std::vector<Matrix>* grads) {
  const TrainConfig& cfg = model.config;
  const ForwardPass f = forward_full(model, x, gamma);
  const Eigen::Index k = model.attr_dim();
  const Eigen::Index h1 = f.h1().cols();
  const Eigen::Index h2 = f.h2().cols();

  const LossAndGrad lat = triplet_loss(f.latent_adj, targets, cfg.margin);
  const AttentionLoss att = attention_loss(f.sem_pred, f.attention, candidate_attributes, targets);
  LossAndGrad bce{0.0, Matrix()};
  if (model.has_embed()) bce = bce_with_logits(f.embed_logits(), bce_targets);

  LossBreakdown out{lat.loss, att.loss, bce.loss, combined_loss(lat.loss, att.loss, bce.loss, cfg.beta1, cfg.beta2)};
  if (!grads) return out;

  // Attention head.
  const Matrix g_att_logits = softmax_rows_backward(f.attention, cfg.beta1 * att.grad_attention);
  Dense g_att_head = Dense::zeros_like(model.att_head);
  g_att_head.weight.noalias() = f.att_input.transpose() * g_att_logits;
  g_att_head.bias = g_att_logits.colwise().sum();
  const Matrix g_att_input = g_att_logits * model.att_head.weight.transpose();

  // Latent path: triplet gradient on adjusted latents plus attention input.
  Matrix g_adj = lat.grad;
  Matrix g_latent_extra = Matrix::Zero(x.rows(), k);
  if (cfg.attention_uses_adjusted) g_adj += g_att_input.rightCols(k);
  else g_latent_extra = g_att_input.rightCols(k);

  Matrix g_latent;
  Matrix g_h2 = g_att_input.middleCols(h1, h2);
  std::vector<Dense> embed_grads;
  if (model.has_embed()) {
    g_latent = (1.0 - gamma) * g_adj + g_latent_extra;
    const Matrix g_embed = gamma * g_adj;
    Matrix g_logits = cfg.beta2 * bce.grad +
                      g_embed.cwiseProduct(f.embed.cwiseProduct((1.0 - f.embed.array()).matrix()));
    g_h2 += model.sem_embed.backward(f.h2(), f.embed_acts, {Matrix(), std::move(g_logits)}, embed_grads);
  } else {
    g_latent = g_adj + g_latent_extra;
  }

  Matrix g_aug(x.rows(), 2 * k);
  g_aug << cfg.beta1 * att.grad_sem, g_latent;
  Dense g_aug_head = Dense::zeros_like(model.aug_head);
  g_aug_head.weight.noalias() = f.h2().transpose() * g_aug;
  g_aug_head.bias = g_aug.colwise().sum();
  g_h2 += g_aug * model.aug_head.weight.transpose();

  std::vector<Dense> trunk_grads;
  model.trunk.backward(x, f.trunk_acts, {g_att_input.leftCols(h1), std::move(g_h2)}, trunk_grads);

  grads->clear();
  for (auto& g : trunk_grads) {
    grads->push_back(std::move(g.weight));
    grads->push_back(std::move(g.bias));
  }
  grads->push_back(std::move(g_aug_head.weight));
  grads->push_back(std::move(g_aug_head.bias));
  grads->push_back(std::move(g_att_head.weight));
  grads->push_back(std::move(g_att_head.bias));
  for (auto& g : embed_grads) {
    grads->push_back(std::move(g.weight));
    grads->push_back(std::move(g.bias));
  }
  return out;
}

TrainResult train(SfLfgaaModel model, const Matrix& x, std::span<const int> labels,
                  const ClassAttributeTable& table) {
  const TrainConfig& cfg = model.config;
  cfg.validate();
  require_shape(static_cast<Eigen::Index>(labels.size()) == x.rows(), "train: one label per row");
  require_shape(x.cols() == model.input_dim(), "train: feature dimension does not match the model");
  require_shape(static_cast<int>(table.dim()) == model.attr_dim(),
                "train: attribute dimension does not match the model");
  if (x.rows() < 2) throw ValidationError("train: need at least 2 samples");

  // Candidate classes for the attention softmax, in table order.
  std::set<int> present(labels.begin(), labels.end());
  if (present.size() < 2) throw ValidationError("train: need at least 2 distinct classes");
  std::map<int, int> local;
  std::vector<std::string> names;
  for (int c : present) {
    if (c < 0 || static_cast<std::size_t>(c) >= table.num_classes())
      throw ValidationError("train: label index outside the attribute table");
    local[c] = static_cast<int>(names.size());
    names.push_back(table.class_names[static_cast<std::size_t>(c)]);
  }
  const Matrix candidates = table.rows_for(names);
  if (model.has_embed() && ((candidates.array() < 0.0).any() || (candidates.array() > 1.0).any()))
    throw ValidationError("train: semantic embedding targets need attributes in [0, 1]");

  AdamState adam;
  adam.lr = cfg.lr;
  adam.beta1 = cfg.adam_beta1;
  adam.beta2 = cfg.adam_beta2;

  Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStream));
  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result{std::move(model), {}};
  SfLfgaaModel& m = result.model;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  std::vector<Matrix> grads;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const bool feedback = epoch >= cfg.warmup_epochs;
    const double gamma = feedback ? cfg.gamma : 0.0;
    shuffle_rng.shuffle(order);
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.feedback_active = feedback && cfg.gamma > 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const auto rows = static_cast<Eigen::Index>(end - start);
      Matrix xb(rows, x.cols());
      Matrix bce_targets(rows, m.attr_dim());
      std::vector<int> targets(end - start);
      for (std::size_t r = start; r < end; ++r) {
        const auto i = static_cast<Eigen::Index>(r - start);
        xb.row(i) = x.row(static_cast<Eigen::Index>(order[r]));
        const int label = labels[order[r]];
        targets[r - start] = local[label];
        bce_targets.row(i) = table.attributes.row(label);
      }
      LossBreakdown loss;
      try {
        loss = batch_loss(m, xb, targets, candidates, bce_targets, gamma, &grads);
      } catch (const DegenerateBatch&) {
        ++rec.skipped_batches;
        continue;
      }
      auto params = m.parameters();
      adam_step(params, grads, adam);
      rec.lat += loss.lat;
      rec.att += loss.att;
      rec.bce += loss.bce;
      rec.total += loss.total;
      ++rec.batches;
    }
    if (rec.batches > 0) {
      const double n = rec.batches;
      rec.lat /= n;
      rec.att /= n;
      rec.bce /= n;
      rec.total /= n;
    }
    result.history.push_back(rec);
  }
  return result;
}

TrainResult train(const FeatureDataset& data, const ClassAttributeTable& table, const SplitSpec& split,
                  const TrainConfig& config, ModelKind kind) {
  const auto rows = rows_with_labels(data, split.seen);
  if (rows.empty()) throw ValidationError("train: no samples labeled with a seen class");
  const FeatureDataset seen = data.subset(rows);
  std::vector<int> labels;
  for (const auto& name : seen.labels) labels.push_back(static_cast<int>(table.require_index(name)));
  SfLfgaaModel model = init_model(static_cast<int>(data.dim()), static_cast<int>(table.dim()), config, kind);
  return train(std::move(model), seen.features, labels, table);
}

PrototypeContext build_prototypes(const SfLfgaaModel& model, const FeatureDataset& seen_data,
                                  const ClassAttributeTable& table, const SplitSpec& split) {
  PrototypeContext ctx;
  ctx.seen = split.seen;
  ctx.unseen = split.unseen;
  ctx.seen_attributes = table.rows_for(split.seen);
  ctx.unseen_attributes = table.rows_for(split.unseen);

  std::map<std::string, int> seen_index;
  for (std::size_t i = 0; i < split.seen.size(); ++i) seen_index[split.seen[i]] = static_cast<int>(i);
  std::vector<std::size_t> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < seen_data.size(); ++i) {
    auto it = seen_index.find(seen_data.labels[i]);
    if (it == seen_index.end()) continue;
    rows.push_back(i);
    labels.push_back(it->second);
  }
  if (rows.empty()) throw ValidationError("prediction needs labeled seen-class samples to build prototypes");
  const Matrix xs = seen_data.subset(rows).features;
  const ForwardPass f = forward_full(model, xs, model.config.gamma);
  const Matrix& latents = model.config.prototypes_use_adjusted ? f.latent_adj : f.latent;

  ctx.seen_prototypes = latent_prototypes_seen(latents, labels, split.seen);
  ctx.correlation = ridge_correlation(ctx.seen_attributes, ctx.unseen_attributes, model.config.correlation_lambda);
  ctx.unseen_prototypes = latent_prototypes_unseen(ctx.correlation, ctx.seen_prototypes, split.unseen);
  return ctx;
}

std::size_t refine_unseen_prototypes(const SfLfgaaModel& model, PrototypeContext& context,
                                     const FeatureDataset& labeled_unseen) {
  if (labeled_unseen.size() == 0) return 0;
  const ForwardPass f = forward_full(model, labeled_unseen.features, model.config.gamma);
  const Matrix& latents = model.config.prototypes_use_adjusted ? f.latent_adj : f.latent;
  std::size_t changed = 0;
  for (std::size_t c = 0; c < context.unseen.size(); ++c) {
    RowVector sum = RowVector::Zero(latents.cols());
    std::size_t count = 0;
    for (std::size_t i = 0; i < labeled_unseen.size(); ++i) {
      if (labeled_unseen.labels[i] != context.unseen[c]) continue;
      sum += latents.row(static_cast<Eigen::Index>(i));
      ++count;
    }
    if (count == 0) continue;
    context.unseen_prototypes.vectors.row(static_cast<Eigen::Index>(c)) = sum / static_cast<double>(count);
    ++changed;
  }
  return changed;
}

Predictions predict_against(const SfLfgaaModel& model, const Matrix& x,
                            const std::vector<std::string>& classes, const Matrix& attributes,
                            const Matrix& prototypes, PredictMode mode) {
  require_shape(attributes.rows() == static_cast<Eigen::Index>(classes.size()) &&
                    prototypes.rows() == attributes.rows(),
                "predict: candidate attributes/prototypes do not match class list");
  const ForwardPass f = forward_full(model, x, model.config.gamma);
  Predictions out;
  out.classes = classes;
  out.scores = cosine_matrix(f.latent_adj, prototypes);
  // The semantic side is the attention-weighted prediction, the quantity the attention loss scores.
  if (mode == PredictMode::Combined) out.scores += cosine_matrix(f.sem_pred.cwiseProduct(f.attention), attributes);
  for (Eigen::Index i = 0; i < out.scores.rows(); ++i) out.predicted.push_back(argmax_first(out.scores.row(i)));
  return out;
}

Predictions predict_batch(const SfLfgaaModel& model, const Matrix& x, const PrototypeContext& context,
                          PredictMode mode) {
  return predict_against(model, x, context.unseen, context.unseen_attributes,
                         context.unseen_prototypes.vectors, mode);
}

Predictions predict_seen(const SfLfgaaModel& model, const Matrix& x, const PrototypeContext& context,
                         PredictMode mode) {
  return predict_against(model, x, context.seen, context.seen_attributes, context.seen_prototypes.vectors,
                         mode);
}

namespace {

nlohmann::json layer_json(const std::string& name, const Dense& layer) {
  std::vector<double> w(layer.weight.data(), layer.weight.data() + layer.weight.size());
  std::vector<double> b(layer.bias.data(), layer.bias.data() + layer.bias.size());
  return {{"name", name}, {"rows", layer.in_dim()}, {"cols", layer.out_dim()}, {"weights", w}, {"bias", b}};
}

Dense layer_from_json(const nlohmann::json& j, const std::string& expected_name) {
  if (j.at("name").get<std::string>() != expected_name)
    throw ParseError("model file: expected layer '" + expected_name + "'", 0);
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto w = j.at("weights").get<std::vector<double>>();
  const auto b = j.at("bias").get<std::vector<double>>();
  if (rows < 1 || cols < 1 || static_cast<Eigen::Index>(w.size()) != rows * cols ||
      static_cast<Eigen::Index>(b.size()) != cols)
    throw ParseError("model file: layer '" + expected_name + "' has inconsistent sizes", 0);
  Dense layer(rows, cols);
  std::copy(w.begin(), w.end(), layer.weight.data());
  std::copy(b.begin(), b.end(), layer.bias.data());
  return layer;
}

}  // namespace

nlohmann::json model_to_json(const SfLfgaaModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < model.trunk.depth(); ++l)
    layers.push_back(layer_json("trunk" + std::to_string(l), model.trunk.layers()[l]));
  layers.push_back(layer_json("aug_head", model.aug_head));
  layers.push_back(layer_json("att_head", model.att_head));
  if (model.has_embed())
    for (std::size_t l = 0; l < model.sem_embed.depth(); ++l)
      layers.push_back(layer_json("embed" + std::to_string(l), model.sem_embed.layers()[l]));
  return {{"format", "sfzsl-model"},
          {"version", kModelFormatVersion},
          {"kind", to_string(model.kind)},
          {"seed", model.config.seed},
          {"input_dim", model.input_dim()},
          {"attr_dim", model.attr_dim()},
          {"config", to_json(model.config)},
          {"layers", layers}};
}

SfLfgaaModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "sfzsl-model") throw ParseError("not a model file", 0);
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw ValidationError("model format version " + std::to_string(version) + " is not supported (expected " +
                            std::to_string(kModelFormatVersion) + ")");
    SfLfgaaModel model;
    model.kind = model_kind_from_string(j.at("kind").get<std::string>());
    model.config = train_config_from_json(j.at("config"));
    const auto& layers = j.at("layers");
    const std::size_t expected = model.kind == ModelKind::SfLfgaa ? 6 : 4;
    if (!layers.is_array() || layers.size() != expected)
      throw ParseError("model file: expected " + std::to_string(expected) + " layers", 0);
    model.trunk = Mlp({layer_from_json(layers[0], "trunk0"), layer_from_json(layers[1], "trunk1")});
    model.aug_head = layer_from_json(layers[2], "aug_head");
    model.att_head = layer_from_json(layers[3], "att_head");
    if (model.has_embed())
      model.sem_embed = Mlp({layer_from_json(layers[4], "embed0"), layer_from_json(layers[5], "embed1")});

    const int k = model.attr_dim();
    const bool consistent =
        model.input_dim() == j.at("input_dim").get<int>() && k == j.at("attr_dim").get<int>() &&
        model.aug_head.out_dim() == 2 * k && model.aug_head.in_dim() == model.trunk.output_dim() &&
        model.att_head.in_dim() == model.trunk.layers()[0].out_dim() + model.trunk.output_dim() + k &&
        model.att_head.out_dim() == k &&
        (!model.has_embed() || (model.sem_embed.input_dim() == model.trunk.output_dim() &&
                                model.sem_embed.output_dim() == k));
    if (!consistent) throw ParseError("model file: layer shapes are inconsistent", 0);
    for (const Matrix* p : model.parameters())
      if (!p->allFinite()) throw ParseError("model file: non-finite parameter", 0);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file is malformed: ") + e.what(), 0);
  } catch (const ShapeError& e) {
    throw ParseError(std::string("model file is malformed: ") + e.what(), 0);
  }
}

void save_model(const SfLfgaaModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << model_to_json(model).dump() << '\n';
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

SfLfgaaModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model file is truncated or corrupt: ") + e.what(), 0);
  }
  return model_from_json(doc);
}

}  // namespace sfzsl
