// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#include "finetune.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "error.hpp"
#include "evaluate.hpp"
#include "io_util.hpp"
#include "optim.hpp"
#include "rng.hpp"

namespace olp {

namespace {

std::size_t argmax_with_canonical_ties(const std::vector<double>& probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;  // strict '>' keeps earlier on ties
  return best;
}

std::vector<std::vector<int>> tokenize_examples(
    const EncoderModel& model, const std::vector<LabeledExample>& examples,
    int max_len) {
  auto tok = model.tokenizer();
  if (max_len > model.config().max_positions)
    throw UsageError("max_len " + std::to_string(max_len) +
                     " exceeds the model's max_positions " +
                     std::to_string(model.config().max_positions));
  std::vector<std::vector<int>> out;
  out.reserve(examples.size());
  for (const auto& ex : examples)
    out.push_back(tok.tokenize(normalize_tweet(ex.text), max_len));
  return out;
}

double validation_metric(const std::string& metric, double macro, double acc) {
  if (metric == "macro_f1") return macro;
  if (metric == "accuracy") return acc;
  throw UsageError("unknown selection metric '" + metric + "'");
}

}  // namespace

FineTuneResult fine_tune(const EncoderModel& model,
                         const std::vector<LabeledExample>& train,
                         const std::vector<LabeledExample>& valid,
                         const TaskSpec& task, const FineTuneConfig& config) {
  if (train.empty() || valid.empty())
    throw DataError("train and validation sets must be non-empty");
  if (config.epochs < 1) throw UsageError("epochs must be positive");
  if (config.batch_size < 1) throw UsageError("batch_size must be positive");

  std::unordered_set<std::string> train_ids;
  for (const auto& ex : train) train_ids.insert(ex.id);
  for (const auto& ex : valid)
    if (train_ids.count(ex.id))
      throw DataError("train/validation id overlap: '" + ex.id + "'");

  if (static_cast<int>(task.num_labels()) != model.config().num_labels)
    throw DataError("label-count mismatch: classifier head has " +
                    std::to_string(model.config().num_labels) +
                    " outputs but task " + task.name() + " has " +
                    std::to_string(task.num_labels()) + " labels");

  auto train_inputs = tokenize_examples(model, train, config.max_len);
  std::vector<std::size_t> train_labels;
  train_labels.reserve(train.size());
  for (const auto& ex : train)
    train_labels.push_back(task.label_index(ex.label));

  FineTuneResult result;
  EncoderModel current = model;
  Adam opt(current.params(),
           config.learning_rate * current.config().lr_scale);

  std::vector<std::string> valid_gold;
  valid_gold.reserve(valid.size());
  for (const auto& ex : valid) valid_gold.push_back(ex.label);

  double best_metric = -1.0;
  long long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(derive_seed(
        config.seed, "finetune/shuffle/epoch" + std::to_string(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t off = 0; off < order.size();
         off += static_cast<std::size_t>(config.batch_size)) {
      std::size_t end = std::min(
          order.size(), off + static_cast<std::size_t>(config.batch_size));
      std::vector<std::vector<int>> inputs;
      std::vector<std::size_t> labels;
      for (std::size_t i = off; i < end; ++i) {
        inputs.push_back(train_inputs[order[i]]);
        labels.push_back(train_labels[order[i]]);
      }
      Params grads = zeros_like(current.params());
      double loss = classification_batch_backward(current, inputs, labels, grads);
      if (!std::isfinite(loss))
        throw InternalError("non-finite training loss at step " +
                            std::to_string(step) + " (epoch " +
                            std::to_string(epoch) + ")");
      opt.step(current.params(), grads, config.grad_clip);
      loss_sum += loss;
      ++batches;
      ++step;
    }

    auto preds = predict(current, valid, task, config.max_len);
    std::vector<std::string> pred_labels;
    pred_labels.reserve(preds.rows.size());
    for (const auto& r : preds.rows) pred_labels.push_back(r.label);
    auto matrix = confusion_matrix(valid_gold, pred_labels, task);
    double macro = macro_f1(matrix);
    double acc = accuracy(matrix);

    result.epoch_metrics.push_back(
        {epoch, macro, acc, loss_sum / static_cast<double>(batches)});

    double metric = validation_metric(config.selection_metric, macro, acc);
    if (metric > best_metric) {  // strict '>': ties keep the earlier epoch
      best_metric = metric;
      result.best_epoch = epoch;
      result.best_model = current;  // deep copy of the epoch state
    }
  }
  return result;
}

PredictionSet predict(const EncoderModel& model,
                      const std::vector<LabeledExample>& examples,
                      const TaskSpec& task, int max_len,
                      const std::string& model_name) {
  std::vector<std::pair<std::string, std::string>> texts;
  texts.reserve(examples.size());
  for (const auto& ex : examples) texts.emplace_back(ex.id, ex.text);
  return predict_texts(model, texts, task, max_len, model_name);
}

PredictionSet predict_texts(
    const EncoderModel& model,
    const std::vector<std::pair<std::string, std::string>>& texts,
    const TaskSpec& task, int max_len, const std::string& model_name) {
  if (static_cast<int>(task.num_labels()) != model.config().num_labels)
    throw DataError("label-count mismatch: classifier head has " +
                    std::to_string(model.config().num_labels) +
                    " outputs but task " + task.name() + " has " +
                    std::to_string(task.num_labels()) + " labels");

  auto tok = model.tokenizer();
  PredictionSet set;
  set.model_name = model_name.empty() ? model.config().name : model_name;
  set.task = task;
  set.rows.reserve(texts.size());
  for (const auto& [id, text] : texts) {
    auto ids = tok.tokenize(normalize_tweet(text), max_len);
    Eigen::RowVectorXd probs = model.classify_row(ids);
    std::vector<double> p(probs.data(), probs.data() + probs.size());
    set.rows.push_back({id, task.labels[argmax_with_canonical_ties(p)], p});
  }
  return set;
}

CrossValidationOutput cross_validated_predict(
    const std::vector<LabeledExample>& dataset,
    const std::vector<std::pair<std::string, std::string>>& test,
    const TaskSpec& task, int k, const FineTuneConfig& config,
    const EncoderConfig& base_model_source, bool stratified) {
  if (k < 2) throw UsageError("cross-validation needs k >= 2");
  if (dataset.size() < static_cast<std::size_t>(k))
    throw UsageError("dataset smaller than k");

  CrossValidationOutput out;
  out.folds = kfold_split(dataset, k, config.seed, stratified);

  for (int fold = 0; fold < k; ++fold) {
    std::vector<LabeledExample> train, valid;
    for (const auto& ex : dataset) {
      if (out.folds.fold_of.at(ex.id) == fold)
        valid.push_back(ex);
      else
        train.push_back(ex);
    }

    // Each fold re-seeds its own model and data order.
    auto fold_seed =
        derive_seed(config.seed, "finetune/fold" + std::to_string(fold));
    EncoderModel base = build_encoder(base_model_source, fold_seed);
    FineTuneConfig fold_config = config;
    fold_config.seed = fold_seed;

    try {
      auto ft = fine_tune(base, train, valid, task, fold_config);
      auto preds =
          predict_texts(ft.best_model, test, task, config.max_len,
                        base.config().name + "/fold" + std::to_string(fold));
      out.fold_metrics.push_back(ft.epoch_metrics);
      out.predictions.push_back(std::move(preds));
    } catch (const Error& e) {
      throw DataError("fold " + std::to_string(fold) + ": " + e.what());
    }
  }
  return out;
}

void write_prediction_csv(const std::filesystem::path& path,
                          const PredictionSet& set) {
  std::string buf = "id,label";
  for (const auto& l : set.task.labels) buf += ",p_" + l;
  buf += "\n";
  for (const auto& row : set.rows) {
    if (row.id.find(',') != std::string::npos)
      throw DataError("prediction id contains a comma: '" + row.id + "'");
    if (row.probs.size() != set.task.num_labels())
      throw InternalError("prediction row width mismatch for id " + row.id);
    buf += row.id + "," + row.label;
    for (double p : row.probs) buf += "," + format_double("%.9f", p);
    buf += "\n";
  }
  write_file(path, buf);
}

PredictionSet load_prediction_csv(const std::filesystem::path& path,
                                  const std::optional<TaskSpec>& expected_task) {
  auto lines = read_lines(path);
  if (lines.empty()) throw DataError("empty prediction file: " + path.string());

  PredictionSet set;
  set.model_name = path.string();

  auto header = split(lines[0], ',');
  bool headered = header.size() >= 2 && header[0] == "id" && header[1] == "label";
  std::size_t first_prob_col = 0;
  std::size_t n_probs = 0;

  if (headered) {
    // `id,label[,tie_flag][,...]` with probability columns `p_<LABEL>` (a
    // prediction CSV) or `mean_p_<LABEL>` (an ensemble CSV).
    std::vector<std::string> prob_labels;
    for (std::size_t i = 2; i < header.size(); ++i) {
      std::string name = header[i];
      std::string stripped;
      if (name.rfind("p_", 0) == 0) stripped = name.substr(2);
      else if (name.rfind("mean_p_", 0) == 0) stripped = name.substr(7);
      if (!stripped.empty()) {
        if (first_prob_col == 0) first_prob_col = i;
        prob_labels.push_back(stripped);
      } else if (first_prob_col != 0) {
        throw DataError("probability columns must be contiguous in " +
                        path.string());
      }
    }
    bool matched = false;
    for (auto tid : {TaskId::A, TaskId::B, TaskId::C}) {
      auto t = TaskSpec::for_task(tid);
      if (t.labels == prob_labels) {
        set.task = t;
        matched = true;
        break;
      }
    }
    if (!matched) {
      if (!expected_task)
        throw DataError("cannot infer task from header of " + path.string());
      set.task = *expected_task;
      first_prob_col = 0;  // no usable probability columns
    }
    n_probs = first_prob_col ? set.task.num_labels() : 0;
  } else {
    // Headerless submission file `id,label`.
    if (!expected_task)
      throw DataError("label-only file " + path.string() +
                      " needs an explicit task");
    set.task = *expected_task;
  }
  if (expected_task && !(set.task == *expected_task))
    throw DataError("prediction file " + path.string() + " is for task " +
                    set.task.name() + ", expected " + expected_task->name());

  for (std::size_t i = headered ? 1 : 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split(lines[i], ',');
    if (cols.size() < 2)
      throw DataError("malformed prediction row at line " +
                      std::to_string(i + 1) + " of " + path.string());
    PredictionRow row;
    row.id = cols[0];
    row.label = cols[1];
    if (!set.task.has_label(row.label))
      throw DataError("label '" + row.label + "' at line " +
                      std::to_string(i + 1) + " of " + path.string() +
                      " is not valid for task " + set.task.name());
    if (n_probs > 0) {
      if (cols.size() < first_prob_col + n_probs)
        throw DataError("missing probability columns at line " +
                        std::to_string(i + 1) + " of " + path.string());
      double sum = 0.0;
      for (std::size_t p = 0; p < n_probs; ++p) {
        double v = parse_double(cols[first_prob_col + p], "probability");
        row.probs.push_back(v);
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-6)
        throw DataError("probability row does not sum to 1 (got " +
                        format_double("%.9f", sum) + ") at line " +
                        std::to_string(i + 1) + " of " + path.string());
    }
    set.rows.push_back(std::move(row));
  }
  if (set.rows.empty())
    throw DataError("prediction file has no rows: " + path.string());
  return set;
}

void write_epoch_metrics_csv(const std::filesystem::path& path,
                             const std::vector<EpochMetrics>& metrics) {
  std::string buf = "epoch,macro_f1,accuracy,train_loss\n";
  for (const auto& m : metrics)
    buf += std::to_string(m.epoch) + "," + format_double("%.9f", m.macro_f1) +
           "," + format_double("%.9f", m.accuracy) + "," +
           format_double("%.9f", m.train_loss) + "\n";
  write_file(path, buf);
}

}  // namespace olp
