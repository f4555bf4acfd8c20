#include "sfzsl/cli.hpp"

#include "sfzsl/dataset.hpp"
#include "sfzsl/digest.hpp"
#include "sfzsl/ect.hpp"
#include "sfzsl/eval.hpp"
#include "sfzsl/model.hpp"
#include "sfzsl/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

namespace sfzsl {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : Error {
  using Error::Error;
};

const std::map<std::string, double> kPresetGamma = {{"zsl-default", 0.01}, {"industrial", 0.005}};

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string preset;
};

struct TrainOverrides {
  std::optional<int> epochs, batch_size, warmup, hidden1, hidden2, embed_hidden;
  std::optional<double> lr, gamma, beta1, beta2, margin, lambda;
  std::optional<std::string> kind, mode;
};

struct EctOverrides {
  std::optional<int> iterations;
  std::optional<std::size_t> n_virtual;
  std::optional<std::uint64_t> seed;
  std::optional<double> holdout;
};

struct DataArgs {
  std::string features, attributes, split;
};

std::string timestamp_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const fs::path& require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw UsageError("missing --" + what);
  if (!fs::is_regular_file(path)) throw UsageError(what + " file not found: " + path.string());
  return path;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw UsageError("cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw UsageError("missing --out");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw UsageError("cannot create output directory " + out);
  return out;
}

/// Resolved configuration: preset, then config file, then explicit flags.
struct RunConfig {
  std::string preset = "zsl-default";
  TrainConfig train;
  EctConfig ect;
  ModelKind kind = ModelKind::SfLfgaa;
  PredictMode mode = PredictMode::Latent;
  json file;  // raw config file contents, if any
};

RunConfig resolve_config(const CommonArgs& common, const TrainOverrides& t, const EctOverrides* e) {
  RunConfig rc;
  json file = json::object();
  if (!common.config_path.empty()) {
    std::ifstream in(require_file(common.config_path, "config"));
    try {
      file = json::parse(in);
    } catch (const json::exception& ex) {
      throw ValidationError("config file is not valid JSON: " + std::string(ex.what()));
    }
    if (!file.is_object()) throw ValidationError("config file must be a JSON object");
  }
  rc.file = file;
  if (file.contains("preset")) rc.preset = file["preset"].get<std::string>();
  if (!common.preset.empty()) rc.preset = common.preset;
  const auto preset = kPresetGamma.find(rc.preset);
  if (preset == kPresetGamma.end()) throw UsageError("unknown preset '" + rc.preset + "'");
  rc.train.gamma = preset->second;

  json train_keys = json::object(), ect_keys = json::object();
  for (const auto& [key, value] : file.items()) {
    if (key.rfind("train.", 0) == 0) train_keys[key.substr(6)] = value;
    else if (key.rfind("ect.", 0) == 0) ect_keys[key.substr(4)] = value;
    else if (key == "mode") rc.mode = predict_mode_from_string(value.get<std::string>());
    else if (key == "kind") rc.kind = model_kind_from_string(value.get<std::string>());
    else if (key == "seed") rc.train.seed = value.get<std::uint64_t>();
    else if (key != "preset") throw ValidationError("unknown config key '" + key + "'");
  }
  rc.train = train_config_from_json(train_keys, rc.train);
  rc.ect = ect_config_from_json(ect_keys, rc.ect);

  if (common.seed) rc.train.seed = *common.seed;
  if (t.epochs) rc.train.epochs = *t.epochs;
  if (t.batch_size) rc.train.batch_size = *t.batch_size;
  if (t.warmup) rc.train.warmup_epochs = *t.warmup;
  if (t.hidden1) rc.train.hidden1 = *t.hidden1;
  if (t.hidden2) rc.train.hidden2 = *t.hidden2;
  if (t.embed_hidden) rc.train.embed_hidden = *t.embed_hidden;
  if (t.lr) rc.train.lr = *t.lr;
  if (t.gamma) rc.train.gamma = *t.gamma;
  if (t.beta1) rc.train.beta1 = *t.beta1;
  if (t.beta2) rc.train.beta2 = *t.beta2;
  if (t.margin) rc.train.margin = *t.margin;
  if (t.lambda) rc.train.correlation_lambda = *t.lambda;
  if (t.kind) rc.kind = model_kind_from_string(*t.kind);
  if (t.mode) rc.mode = predict_mode_from_string(*t.mode);
  if (e) {
    if (e->iterations) rc.ect.max_iterations = *e->iterations;
    if (e->n_virtual) rc.ect.n_virtual = *e->n_virtual;
    if (e->seed) rc.ect.seed = *e->seed;
    if (e->holdout) rc.ect.holdout_fraction = *e->holdout;
    rc.ect.predict_mode = rc.mode;
    rc.ect.validate();
  }
  rc.train.validate();
  return rc;
}

struct Bundle {
  FeatureDataset data;
  ClassAttributeTable table;
  SplitSpec split;
  json digests;
};

Bundle load_bundle(const DataArgs& args) {
  Bundle b;
  b.data = load_features(require_file(args.features, "features"));
  b.table = load_attributes(require_file(args.attributes, "attributes"));
  b.split = load_split(require_file(args.split, "split"));
  if (const auto issues = validate_bundle(b.data, b.table, b.split); !issues.empty()) {
    std::string msg = "invalid bundle:";
    for (const auto& issue : issues) msg += "\n  " + issue;
    throw ValidationError(msg);
  }
  b.table = normalize_attributes(b.table);
  b.digests = {{"features", sha256_file(args.features)},
               {"attributes", sha256_file(args.attributes)},
               {"split", sha256_file(args.split)}};
  return b;
}

json run_manifest(const std::string& command, const RunConfig& rc) {
  return {{"command", command},
          {"preset", rc.preset},
          {"kind", to_string(rc.kind)},
          {"mode", to_string(rc.mode)},
          {"generator", Rng::kGeneratorName},
          {"train_config", to_json(rc.train)},
          {"lfgaa_equivalent", rc.train.gamma == 0.0 && rc.train.beta2 == 0.0},
          {"label", rc.train.gamma == 0.0 && rc.train.beta2 == 0.0 ? "LFGAA-equivalent" : "SF-LFGAA"}};
}

/// Zero-shot accuracy on the rows labeled with unseen classes, if any.
std::optional<EvalReport> unseen_report(const SfLfgaaModel& model, const Bundle& b, PredictMode mode,
                                        const PrototypeContext* context = nullptr) {
  const FeatureDataset test = b.data.subset(rows_with_labels(b.data, b.split.unseen));
  if (test.size() == 0) return std::nullopt;
  const FeatureDataset seen = b.data.subset(rows_with_labels(b.data, b.split.seen));
  const PrototypeContext ctx = context ? *context : build_prototypes(model, seen, b.table, b.split);
  const Predictions p = predict_batch(model, test.features, ctx, mode);
  std::vector<std::string> predicted;
  for (std::size_t i = 0; i < test.size(); ++i) predicted.push_back(p.label(i));
  return mean_per_class_top1(predicted, test.labels, b.split.unseen);
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,L_lat,L_att,L_BCE,total\n";
  for (const auto& r : history)
    out += std::to_string(r.epoch) + "," + format_double(r.lat) + "," + format_double(r.att) + "," +
           format_double(r.bce) + "," + format_double(r.total) + "\n";
  return out;
}

void add_data_options(CLI::App* app, DataArgs& d) {
  app->add_option("--features", d.features, "features CSV");
  app->add_option("--attributes", d.attributes, "attributes CSV");
  app->add_option("--split", d.split, "split JSON");
}

void add_common_options(CLI::App* app, CommonArgs& c) {
  app->add_option("--config", c.config_path, "JSON config with flat dotted keys");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--out", c.out, "output path");
  app->add_option("--preset", c.preset, "zsl-default | industrial");
}

void add_train_options(CLI::App* app, TrainOverrides& t) {
  app->add_option("--epochs", t.epochs);
  app->add_option("--batch-size", t.batch_size);
  app->add_option("--warmup", t.warmup, "epochs before feedback is applied");
  app->add_option("--hidden1", t.hidden1);
  app->add_option("--hidden2", t.hidden2);
  app->add_option("--embed-hidden", t.embed_hidden);
  app->add_option("--lr", t.lr);
  app->add_option("--gamma", t.gamma, "feedback degree");
  app->add_option("--beta1", t.beta1, "attention loss weight");
  app->add_option("--beta2", t.beta2, "semantic embedding loss weight");
  app->add_option("--margin", t.margin);
  app->add_option("--lambda", t.lambda, "ridge strength of the class correlation");
  app->add_option("--kind", t.kind, "sf-lfgaa | lfgaa");
  app->add_option("--mode", t.mode, "latent | combined");
}

int cmd_synth(const CommonArgs& common, SynthSpec spec, std::ostream& out) {
  if (common.seed) spec.seed = *common.seed;
  const fs::path dir = prepare_out_dir(common.out);
  const SyntheticBundle b = gen_synthetic(spec);
  save_features(b.features, dir / "features.csv");
  save_attributes(b.table, dir / "attributes.csv");
  save_split(b.split, dir / "split.json");
  write_json(dir / "synth_manifest.json",
             {{"generator", Rng::kGeneratorName},
              {"spec",
               {{"seed", spec.seed}, {"n_seen", spec.n_seen}, {"n_unseen", spec.n_unseen}, {"dim", spec.dim},
                {"attr_dim", spec.attr_dim}, {"samples_per_class", spec.samples_per_class},
                {"noise_sigma", spec.noise_sigma}}},
              {"digests",
               {{"features", sha256_file(dir / "features.csv")},
                {"attributes", sha256_file(dir / "attributes.csv")},
                {"split", sha256_file(dir / "split.json")}}}});
  out << "wrote " << b.features.size() << " samples (" << b.split.seen.size() << " seen, "
      << b.split.unseen.size() << " unseen classes) to " << dir.string() << "\n";
  return 0;
}

int cmd_train(const CommonArgs& common, const DataArgs& data, const TrainOverrides& t, std::ostream& out) {
  const RunConfig rc = resolve_config(common, t, nullptr);
  const Bundle b = load_bundle(data);
  const fs::path dir = prepare_out_dir(common.out);
  const TrainResult result = train(b.data, b.table, b.split, rc.train, rc.kind);
  save_model(result.model, dir / "model.json");
  write_text(dir / "history.csv", history_csv(result.history));

  json manifest = run_manifest("train", rc);
  manifest["inputs"] = b.digests;
  manifest["outputs"] = {{"model", sha256_file(dir / "model.json")}, {"history", sha256_file(dir / "history.csv")}};
  manifest["skipped_batches"] = 0;
  for (const auto& r : result.history) manifest["skipped_batches"] = manifest["skipped_batches"].get<int>() + r.skipped_batches;
  if (const auto report = unseen_report(result.model, b, rc.mode)) {
    manifest["unseen_mean_per_class"] = report->mean_per_class;
    manifest["unseen_overall"] = report->overall;
    out << "unseen mean per-class top-1 (" << to_string(rc.mode) << "): " << report->mean_per_class << "\n";
  }
  manifest["timestamp"] = timestamp_now();
  write_json(dir / "manifest.json", manifest);
  out << "model written to " << (dir / "model.json").string() << "\n";
  return 0;
}

// id -> label pairs written by the ect command.
std::map<std::string, std::string> load_pseudo_labels(const std::string& path) {
  std::ifstream in(require_file(path, "pseudo-labels"));
  std::string line;
  if (!std::getline(in, line) || line != "id,label") throw ParseError("pseudo-labels header must be id,label", 1);
  std::map<std::string, std::string> out;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw ParseError("expected 2 cells", line_no);
    out[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return out;
}

int cmd_predict(const CommonArgs& common, const DataArgs& data, const std::string& model_path,
                const std::string& mode_name, const std::string& pseudo_path, std::ostream& out) {
  const PredictMode mode = predict_mode_from_string(mode_name);
  const SfLfgaaModel model = load_model(require_file(model_path, "model"));
  const Bundle b = load_bundle(data);
  if (model.input_dim() != static_cast<int>(b.data.dim()))
    throw ValidationError("model expects " + std::to_string(model.input_dim()) + "-dim features, got " +
                          std::to_string(b.data.dim()));
  if (model.attr_dim() != static_cast<int>(b.table.dim()))
    throw ValidationError("model expects " + std::to_string(model.attr_dim()) + "-dim attributes, got " +
                          std::to_string(b.table.dim()));
  if (common.out.empty()) throw UsageError("missing --out");

  // Seen-labeled rows provide the prototypes; all other rows are predicted.
  const FeatureDataset seen = b.data.subset(rows_with_labels(b.data, b.split.seen));
  const FeatureDataset query = b.data.subset(rows_unlabeled_or(b.data, b.split.unseen));
  PrototypeContext ctx = build_prototypes(model, seen, b.table, b.split);
  if (!pseudo_path.empty()) {
    const auto pseudo = load_pseudo_labels(pseudo_path);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < query.size(); ++i)
      if (pseudo.count(query.sample_ids[i])) rows.push_back(i);
    FeatureDataset marked = query.subset(rows);
    for (std::size_t i = 0; i < marked.size(); ++i) {
      marked.labels[i] = pseudo.at(marked.sample_ids[i]);
      if (std::find(b.split.unseen.begin(), b.split.unseen.end(), marked.labels[i]) == b.split.unseen.end())
        throw ValidationError("pseudo-label '" + marked.labels[i] + "' is not an unseen class");
    }
    refine_unseen_prototypes(model, ctx, marked);
  }
  const Predictions p = predict_batch(model, query.features, ctx, mode);
  std::string csv = "id,predicted,score\n";
  for (std::size_t i = 0; i < query.size(); ++i)
    csv += query.sample_ids[i] + "," + p.label(i) + "," + format_double(p.best_score(i)) + "\n";
  const fs::path out_path = common.out;
  write_text(out_path, csv);

  json manifest = {{"command", "predict"},
                   {"mode", to_string(mode)},
                   {"model", sha256_file(model_path)},
                   {"pseudo_labels", pseudo_path.empty() ? json(nullptr) : json(sha256_file(pseudo_path))},
                   {"inputs", b.digests},
                   {"predictions", sha256_file(out_path)},
                   {"count", query.size()},
                   {"timestamp", timestamp_now()}};
  write_json(fs::path(out_path).concat(".manifest.json"), manifest);
  out << "wrote " << query.size() << " predictions to " << out_path.string() << "\n";
  return 0;
}

int cmd_eval(const CommonArgs& common, const std::string& predictions_path, const DataArgs& data,
             const std::string& format_name, std::ostream& out) {
  const FeatureDataset truth = load_features(require_file(data.features, "features"));
  const SplitSpec split = load_split(require_file(data.split, "split"));
  std::ifstream in(require_file(predictions_path, "predictions"));
  std::string line;
  if (!std::getline(in, line) || line != "id,predicted,score")
    throw ParseError("predictions header must be id,predicted,score", 1);
  std::map<std::string, std::string> predicted_by_id;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) throw ParseError("expected 3 cells", line_no);
    predicted_by_id[line.substr(0, a)] = line.substr(a + 1, b - a - 1);
  }
  std::vector<std::string> predicted, gold;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth.labels[i].empty()) continue;
    const auto it = predicted_by_id.find(truth.sample_ids[i]);
    if (it == predicted_by_id.end()) continue;
    predicted.push_back(it->second);
    gold.push_back(truth.labels[i]);
  }
  if (gold.empty()) throw ValidationError("no labeled rows match the predictions");
  EvalReport report = mean_per_class_top1(predicted, gold, split.unseen);
  report.meta.seed = common.seed.value_or(0);
  report.meta.config_digest = sha256_file(predictions_path);
  report.meta.timestamp = timestamp_now();
  ReportFormat format;
  if (format_name == "json") format = ReportFormat::Json;
  else if (format_name == "csv") format = ReportFormat::Csv;
  else throw UsageError("unknown format '" + format_name + "'");
  if (common.out.empty()) throw UsageError("missing --out");
  emit_report(report, common.out, format);
  for (const auto& w : report.warnings) out << "warning: " << w << "\n";
  out << "mean per-class top-1: " << report.mean_per_class << "  overall: " << report.overall << "\n";
  return 0;
}

int cmd_ect(const CommonArgs& common, const DataArgs& data, const TrainOverrides& t, const EctOverrides& e,
            std::ostream& out, std::ostream& err) {
  const RunConfig rc = resolve_config(common, t, &e);
  const Bundle b = load_bundle(data);
  const fs::path dir = prepare_out_dir(common.out);
  const EctResult result = run_ect(b.data, b.table, b.split, rc.ect, rc.train);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  for (const auto& rec : result.history)
    if (rec.error) err << "warning: iteration " << rec.iteration << " aborted: " << *rec.error << "\n";
  save_model(result.model, dir / "model.json");
  std::string pseudo_csv = "id,label\n";
  for (const auto& pl : result.pseudo_labels) pseudo_csv += pl.sample_id + "," + pl.label + "\n";
  write_text(dir / "pseudo_labels.csv", pseudo_csv);

  json manifest = ect_manifest(result, rc.ect, rc.train);
  manifest.update(run_manifest("ect", rc));
  manifest["inputs"] = b.digests;
  manifest["outputs"] = {{"model", sha256_file(dir / "model.json")},
                         {"pseudo_labels", sha256_file(dir / "pseudo_labels.csv")}};
  if (const auto report = unseen_report(result.model, b, rc.mode, &result.context)) {
    manifest["unseen_mean_per_class"] = report->mean_per_class;
    out << "unseen mean per-class top-1 (" << to_string(rc.mode) << "): " << report->mean_per_class << "\n";
  }
  manifest["timestamp"] = timestamp_now();
  write_json(dir / "manifest.json", manifest);
  out << "ect finished after " << result.history.size() << " iterations; " << result.pseudo_labels.size()
      << " pseudo-labels\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"zero-shot classification with feedback-adjusted latent attributes and ensemble co-training"};
  app.require_subcommand(1);

  CommonArgs common;
  DataArgs data;
  TrainOverrides train_overrides;
  EctOverrides ect_overrides;
  SynthSpec spec;
  std::string model_path, mode_name = "latent", predictions_path, format_name = "json", pseudo_path;

  auto* synth = app.add_subcommand("synth", "write a synthetic bundle");
  add_common_options(synth, common);
  synth->add_option("--n-seen", spec.n_seen);
  synth->add_option("--n-unseen", spec.n_unseen);
  synth->add_option("--dim", spec.dim);
  synth->add_option("--attr-dim", spec.attr_dim);
  synth->add_option("--per-class", spec.samples_per_class);
  synth->add_option("--sigma", spec.noise_sigma);

  auto* train_cmd = app.add_subcommand("train", "train a model on the seen classes");
  add_common_options(train_cmd, common);
  add_data_options(train_cmd, data);
  add_train_options(train_cmd, train_overrides);

  auto* predict = app.add_subcommand("predict", "zero-shot predictions as id,predicted,score");
  add_common_options(predict, common);
  add_data_options(predict, data);
  predict->add_option("--model", model_path, "model JSON");
  predict->add_option("--mode", mode_name, "latent | combined");
  predict->add_option("--pseudo-labels", pseudo_path, "pseudo_labels.csv from ect; refines unseen prototypes");

  auto* eval = app.add_subcommand("eval", "score predictions against labeled features");
  add_common_options(eval, common);
  eval->add_option("--predictions", predictions_path);
  eval->add_option("--features", data.features);
  eval->add_option("--split", data.split);
  eval->add_option("--format", format_name, "json | csv");

  auto* ect = app.add_subcommand("ect", "ensemble co-training over unlabeled unseen rows");
  add_common_options(ect, common);
  add_data_options(ect, data);
  add_train_options(ect, train_overrides);
  ect->add_option("--iterations", ect_overrides.iterations);
  ect->add_option("--n-virtual", ect_overrides.n_virtual);
  ect->add_option("--ect-seed", ect_overrides.seed);
  ect->add_option("--holdout", ect_overrides.holdout);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help, errs;
    const int code = app.exit(e, help, errs);
    out << help.str();
    err << errs.str();
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(common, spec, out);
    if (*train_cmd) return cmd_train(common, data, train_overrides, out);
    if (*predict) return cmd_predict(common, data, model_path, mode_name, pseudo_path, out);
    if (*eval) return cmd_eval(common, predictions_path, data, format_name, out);
    if (*ect) return cmd_ect(common, data, train_overrides, ect_overrides, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: bad config value: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace sfzsl
