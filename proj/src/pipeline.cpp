// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include "checkpoint.hpp"
#include "corpus.hpp"
#include "ensemble.hpp"
#include "error.hpp"
#include "evaluate.hpp"
#include "finetune.hpp"
#include "io_util.hpp"
#include "mlm.hpp"
#include "rng.hpp"

namespace olp {

namespace fs = std::filesystem;

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {
      "preprocess", "pretrain-mlm", "finetune", "ensemble", "evaluate",
      "report"};
  return names;
}

namespace {

// Timestamps are confined to this log; primary outputs stay byte-stable.
class RunLog {
 public:
  explicit RunLog(const fs::path& dir) : out_(dir / "run.log", std::ios::app) {}

  void line(const std::string& msg) {
    auto now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%d %H:%M:%S",
                  std::localtime(&now));
    out_ << stamp << " " << msg << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
};

void apply_stage_defaults(KvConfig& cfg, const std::string& stage) {
  cfg.set("stage", stage);
  cfg.set_default("task", "A");
  cfg.set_default("model", "tiny-reference");
  cfg.set_default("seed", "42");

  if (stage == "preprocess") {
    cfg.set_default("preprocess.fraction", "0.05");
  } else if (stage == "pretrain-mlm") {
    cfg.set_default("mlm.epochs", "1");
    cfg.set_default("mlm.batch_size", "4");
    cfg.set_default("mlm.learning_rate", "2e-05");
    cfg.set_default("mlm.mask_rate", "0.15");
    cfg.set_default("mlm.grad_clip", "0");
    cfg.set_default("mlm.heldout_fraction", "0");
  } else if (stage == "finetune") {
    cfg.set_default("finetune.cv", "0");
    bool cv = false;
    try {
      cv = cfg.get_int("finetune.cv") > 0;
    } catch (const Error&) {
      // validated later
    }
    cfg.set_default("finetune.epochs", "6");
    cfg.set_default("finetune.learning_rate", "5e-06");
    cfg.set_default("finetune.batch_size", cv ? "8" : "4");
    cfg.set_default("finetune.max_len", "128");
    cfg.set_default("finetune.stratified", "0");
    cfg.set_default("finetune.grad_clip", "0");
  } else if (stage == "ensemble") {
    cfg.set_default("ensemble.mode", "hard");
    cfg.set_default("ensemble.tie_rule", "soft_fallback");
  } else if (stage == "evaluate") {
    cfg.set_default("evaluate.samples", "4");
  } else if (stage == "report") {
    // no defaults beyond the common ones
  }
}

EncoderConfig model_config_from(const KvConfig& cfg, const TaskSpec& task) {
  auto base = registry_config(cfg.get("model"));
  base.num_labels = static_cast<int>(task.num_labels());
  if (cfg.has("model.checkpoint") && !cfg.get("model.checkpoint").empty())
    base.pretrained_source = cfg.get("model.checkpoint");
  return base;
}

// Loads/initializes the configured model and aligns the classifier head
// with the task (a checkpoint pretrained for MLM or another task keeps its
// encoder weights; the head is formed fresh at fine-tune time).
EncoderModel build_task_model(const KvConfig& cfg, const TaskSpec& task,
                              std::uint64_t seed, RunLog& log) {
  auto base = model_config_from(cfg, task);
  EncoderModel model = build_encoder(base, seed);
  if (model.config().num_labels != static_cast<int>(task.num_labels())) {
    log.line("resetting classifier head: checkpoint has " +
             std::to_string(model.config().num_labels) + " labels, task " +
             task.name() + " needs " + std::to_string(task.num_labels()));
    model.reset_classifier_head(static_cast<int>(task.num_labels()), seed);
  }
  return model;
}

void run_preprocess(const KvConfig& cfg, const fs::path& out, RunLog& log) {
  auto seed = cfg.get_seed("seed");
  double fraction = cfg.get_double("preprocess.fraction");
  auto records = load_weak_corpus(cfg.get("data.weak_corpus"));
  const auto input_count = records.size();

  auto normalized = normalize_records(std::move(records));
  const auto normalized_count = normalized.size();
  auto deduped = deduplicate(normalized);
  const auto dedup_count = deduped.size();
  auto sampled = sample_corpus(deduped, fraction, seed);

  std::vector<std::string> lines;
  lines.reserve(sampled.size());
  for (const auto& r : sampled) lines.push_back(r.text);
  write_lines(out / "corpus.txt", lines);

  std::string stats;
  stats += "input_count = " + std::to_string(input_count) + "\n";
  stats += "post_normalize_count = " + std::to_string(normalized_count) + "\n";
  stats += "post_dedup_count = " + std::to_string(dedup_count) + "\n";
  stats += "sample_count = " + std::to_string(sampled.size()) + "\n";
  stats += "fraction = " + format_double("%.10g", fraction) + "\n";
  stats += "seed = " + std::to_string(seed) + "\n";
  write_file(out / "preprocess_stats.kv", stats);
  log.line("preprocess: " + std::to_string(input_count) + " -> " +
           std::to_string(dedup_count) + " deduped -> " +
           std::to_string(sampled.size()) + " sampled");
}

void run_pretrain_mlm(const KvConfig& cfg, const fs::path& out, RunLog& log) {
  auto task = TaskSpec::parse(cfg.get("task"));
  auto seed = cfg.get_seed("seed");

  auto all_lines = read_lines(cfg.get("data.corpus"));
  std::vector<std::string> lines;
  for (auto& l : all_lines)
    if (!l.empty()) lines.push_back(std::move(l));
  if (lines.empty()) throw DataError("empty corpus: " + cfg.get("data.corpus"));

  double heldout_fraction = cfg.get_double("mlm.heldout_fraction");
  std::vector<std::string> train_lines = lines, heldout_lines;
  if (heldout_fraction > 0.0) {
    if (heldout_fraction >= 1.0)
      throw UsageError("mlm.heldout_fraction must be in [0, 1)");
    auto want = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(heldout_fraction *
                                            static_cast<double>(lines.size()))));
    Rng rng(derive_seed(seed, "mlm/heldout_split"));
    auto idx = rng.sample_indices(lines.size(), want);
    std::vector<bool> held(lines.size(), false);
    for (auto i : idx) held[i] = true;
    train_lines.clear();
    for (std::size_t i = 0; i < lines.size(); ++i)
      (held[i] ? heldout_lines : train_lines).push_back(lines[i]);
  }

  EncoderModel model = build_task_model(cfg, task, derive_seed(seed, "mlm/model"), log);

  MlmTrainConfig mc;
  mc.epochs = static_cast<int>(cfg.get_int("mlm.epochs"));
  mc.batch_size = static_cast<int>(cfg.get_int("mlm.batch_size"));
  mc.learning_rate = cfg.get_double("mlm.learning_rate");
  mc.mask_rate = cfg.get_double("mlm.mask_rate");
  mc.grad_clip = cfg.get_double("mlm.grad_clip");
  mc.seed = derive_seed(seed, "mlm/train");

  std::string stats;
  if (!heldout_lines.empty()) {
    double before = mlm_heldout_loss(model, heldout_lines, seed);
    stats += "heldout_loss_before = " + format_double("%.9f", before) + "\n";
  }

  auto result = further_pretrain(model, train_lines, mc);
  save_checkpoint(out / "checkpoint.olp", result.model);
  write_loss_curve(out / "mlm_loss.csv", result.loss_curve);

  if (!heldout_lines.empty()) {
    double after = mlm_heldout_loss(result.model, heldout_lines, seed);
    stats += "heldout_loss_after = " + format_double("%.9f", after) + "\n";
  }
  stats += "train_lines = " + std::to_string(train_lines.size()) + "\n";
  stats += "heldout_lines = " + std::to_string(heldout_lines.size()) + "\n";
  stats += "steps = " + std::to_string(result.loss_curve.size()) + "\n";
  write_file(out / "mlm_stats.kv", stats);
  log.line("pretrain-mlm: " + std::to_string(result.loss_curve.size()) +
           " steps over " + std::to_string(train_lines.size()) + " lines");
}

FineTuneConfig finetune_config_from(const KvConfig& cfg, std::uint64_t seed) {
  FineTuneConfig fc;
  fc.epochs = static_cast<int>(cfg.get_int("finetune.epochs"));
  fc.learning_rate = cfg.get_double("finetune.learning_rate");
  fc.batch_size = static_cast<int>(cfg.get_int("finetune.batch_size"));
  fc.max_len = static_cast<int>(cfg.get_int("finetune.max_len"));
  fc.grad_clip = cfg.get_double("finetune.grad_clip");
  fc.seed = seed;
  return fc;
}

void run_finetune(const KvConfig& cfg, const fs::path& out, RunLog& log) {
  auto task = TaskSpec::parse(cfg.get("task"));
  auto seed = cfg.get_seed("seed");
  auto train = load_olid(cfg.get("data.olid_train"), task);
  int cv = static_cast<int>(cfg.get_int("finetune.cv"));

  if (cv == 0) {
    auto valid = load_olid(cfg.get("data.olid_test"), task);
    auto model =
        build_task_model(cfg, task, derive_seed(seed, "finetune/model"), log);
    auto fc = finetune_config_from(cfg, derive_seed(seed, "finetune/run"));
    auto ft = fine_tune(model, train, valid, task, fc);

    save_checkpoint(out / "checkpoint_best.olp", ft.best_model);
    write_epoch_metrics_csv(out / "epoch_metrics.csv", ft.epoch_metrics);
    auto preds = predict(ft.best_model, valid, task, fc.max_len,
                         cfg.get("model"));
    write_prediction_csv(out / "predictions.csv", preds);
    log.line("finetune: best epoch " + std::to_string(ft.best_epoch) +
             " macro_f1 " +
             format_double("%.4f",
                           ft.epoch_metrics[static_cast<std::size_t>(
                                                ft.best_epoch - 1)]
                               .macro_f1));
  } else {
    auto test = load_olid_texts(cfg.get("data.olid_test"));
    auto base = model_config_from(cfg, task);
    auto fc = finetune_config_from(cfg, derive_seed(seed, "finetune/cv"));
    bool stratified = cfg.get_bool("finetune.stratified");
    auto cv_out =
        cross_validated_predict(train, test, task, cv, fc, base, stratified);

    std::string manifest = "id,fold\n";
    std::vector<std::pair<std::string, int>> fold_rows(
        cv_out.folds.fold_of.begin(), cv_out.folds.fold_of.end());
    std::sort(fold_rows.begin(), fold_rows.end());
    for (const auto& [id, fold] : fold_rows)
      manifest += id + "," + std::to_string(fold) + "\n";
    write_file(out / "folds.csv", manifest);

    for (int f = 0; f < cv; ++f) {
      write_prediction_csv(
          out / ("predictions_fold" + std::to_string(f) + ".csv"),
          cv_out.predictions[static_cast<std::size_t>(f)]);
      write_epoch_metrics_csv(
          out / ("epoch_metrics_fold" + std::to_string(f) + ".csv"),
          cv_out.fold_metrics[static_cast<std::size_t>(f)]);
    }
    log.line("finetune: " + std::to_string(cv) + "-fold CV over " +
             std::to_string(train.size()) + " examples");
  }
}

void run_ensemble(const KvConfig& cfg, const fs::path& out, RunLog& log) {
  auto task = TaskSpec::parse(cfg.get("task"));
  auto files = split(cfg.get("ensemble.members"), ';');
  files.erase(std::remove(files.begin(), files.end(), std::string()),
              files.end());
  if (files.size() < 2)
    throw UsageError("ensemble needs at least 2 member prediction files");

  EnsembleSpec spec;
  spec.mode = parse_vote_mode(cfg.get("ensemble.mode"));
  spec.tie_rule = parse_tie_rule(cfg.get("ensemble.tie_rule"));
  for (const auto& f : files)
    spec.members.push_back(load_prediction_csv(f, task));

  EnsembleResult result =
      spec.mode == VoteMode::hard ? hard_vote(spec) : soft_vote(spec);
  write_ensemble_csv(out / "ensemble.csv", result);
  write_submission_csv(out / "submission.csv", result);

  std::size_t ties = 0;
  for (const auto& r : result.rows) ties += r.tie_flag ? 1 : 0;
  std::string stats;
  stats += "digest = " + result.spec_digest + "\n";
  stats += "members = " + std::to_string(files.size()) + "\n";
  stats += "rows = " + std::to_string(result.rows.size()) + "\n";
  stats += "tie_rows = " + std::to_string(ties) + "\n";
  write_file(out / "ensemble_stats.kv", stats);
  log.line("ensemble: " + result.spec_digest);
}

void run_evaluate(const KvConfig& cfg, const fs::path& out, RunLog& log) {
  auto task = TaskSpec::parse(cfg.get("task"));
  auto gold = load_olid(cfg.get("evaluate.gold"), task);

  PredictionSet preds;
  if (cfg.has("evaluate.baseline") && !cfg.get("evaluate.baseline").empty()) {
    preds = baseline_predict(parse_baseline(cfg.get("evaluate.baseline")),
                             gold, task);
  } else {
    preds = load_prediction_csv(cfg.get("evaluate.predictions"), task);
  }

  auto samples = static_cast<std::size_t>(cfg.get_int("evaluate.samples"));
  auto report = build_report(gold, preds, task, samples);
  write_file(out / "report.txt", format_report_table(report));
  write_report_kv(report, out / "report.kv");
  render_confusion_figure(report.matrix, out / "confusion.svg");
  log.line("evaluate: macro_f1 " + format_double("%.4f", report.macro_f1) +
           " accuracy " + format_double("%.4f", report.accuracy));
}

void run_report(const KvConfig& cfg, const fs::path& out, RunLog& log) {
  auto report = read_report_kv(cfg.get("report.metrics"));
  write_file(out / "report.txt", format_report_table(report));
  render_confusion_figure(report.matrix, out / "confusion.svg");
  log.line("report: re-rendered from " + cfg.get("report.metrics"));
}

}  // namespace

KvConfig resolve_stage_config(const KvConfig& user, const std::string& stage) {
  if (std::find(stage_names().begin(), stage_names().end(), stage) ==
      stage_names().end()) {
    std::string known;
    for (const auto& s : stage_names()) {
      if (!known.empty()) known += ", ";
      known += s;
    }
    throw UsageError("unknown stage '" + stage + "' (known: " + known + ")");
  }

  KvConfig cfg = user;
  apply_stage_defaults(cfg, stage);
  if (const char* env = std::getenv(kSeedEnvVar); env && *env)
    cfg.set("seed", env);
  return cfg;
}

void run_stage(const KvConfig& user, const std::string& stage) {
  KvConfig cfg = resolve_stage_config(user, stage);
  fs::path out = cfg.get("out");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (!fs::is_directory(out))
    throw IoError("cannot create output directory: " + out.string());

  write_file(out / "resolved_config.kv", cfg.dump_sorted());
  RunLog log(out);
  log.line("stage " + stage + " started");

  if (stage == "preprocess") run_preprocess(cfg, out, log);
  else if (stage == "pretrain-mlm") run_pretrain_mlm(cfg, out, log);
  else if (stage == "finetune") run_finetune(cfg, out, log);
  else if (stage == "ensemble") run_ensemble(cfg, out, log);
  else if (stage == "evaluate") run_evaluate(cfg, out, log);
  else if (stage == "report") run_report(cfg, out, log);

  log.line("stage " + stage + " finished");
}

}  // namespace olp
