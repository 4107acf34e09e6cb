// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0
//
// Supervised fine-tuning with per-epoch validation and best-epoch selection,
// plus the k-fold cross-validated prediction protocol.

#ifndef OLP_FINETUNE_HPP_
#define OLP_FINETUNE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "encoder.hpp"

namespace olp {

struct FineTuneConfig {
  int epochs = 6;
  double learning_rate = 5e-6;
  int batch_size = 4;  // 8 for cross-validation runs
  int max_len = 128;
  std::uint64_t seed = 0;
  std::string selection_metric = "macro_f1";
  double grad_clip = 0.0;  // 0 = off
};

struct EpochMetrics {
  int epoch;  // 1-based
  double macro_f1;
  double accuracy;
  double train_loss;
};

struct FineTuneResult {
  EncoderModel best_model;
  int best_epoch = 0;  // argmax of the selection metric; ties -> earlier
  std::vector<EpochMetrics> epoch_metrics;
};

struct PredictionRow {
  std::string id;
  std::string label;
  std::vector<double> probs;  // canonical label order; may be empty when
                              // loaded from a label-only file
};

struct PredictionSet {
  std::string model_name;
  TaskSpec task;
  std::vector<PredictionRow> rows;
};

// Trains for exactly config.epochs epochs, evaluating on the validation set
// after each one. Returns a copy of the best-epoch model state. Train/valid
// id overlap is a hard error; so is a non-finite loss.
FineTuneResult fine_tune(const EncoderModel& model,
                         const std::vector<LabeledExample>& train,
                         const std::vector<LabeledExample>& valid,
                         const TaskSpec& task, const FineTuneConfig& config);

// One row per input in input order; predicted label = argmax of the
// probability vector with ties resolved toward the earlier canonical label.
PredictionSet predict(const EncoderModel& model,
                      const std::vector<LabeledExample>& examples,
                      const TaskSpec& task, int max_len = 128,
                      const std::string& model_name = "");
PredictionSet predict_texts(const EncoderModel& model,
                            const std::vector<std::pair<std::string, std::string>>& texts,
                            const TaskSpec& task, int max_len = 128,
                            const std::string& model_name = "");

// The cross-validation protocol: split `dataset` into k folds, fine-tune k
// times (run i trains on all folds but i and validates on fold i), and have
// every run predict the full test set. Fold index is mixed into the model
// seed. Returns k full-coverage PredictionSets in fold order.
struct CrossValidationOutput {
  FoldAssignment folds;
  std::vector<PredictionSet> predictions;       // k sets over `test`
  std::vector<std::vector<EpochMetrics>> fold_metrics;
};
CrossValidationOutput cross_validated_predict(
    const std::vector<LabeledExample>& dataset,
    const std::vector<std::pair<std::string, std::string>>& test,
    const TaskSpec& task, int k, const FineTuneConfig& config,
    const EncoderConfig& base_model_source, bool stratified = false);

// PredictionSet CSV: header `id,label,p_<label>...` in canonical order.
void write_prediction_csv(const std::filesystem::path& path,
                          const PredictionSet& set);
// Accepts the full format above, an EnsembleResult CSV (extra columns are
// ignored) or a headerless `id,label` submission file (requires
// expected_task). Stored labels are trusted; probabilities are validated to
// sum to 1 within 1e-6 when present.
PredictionSet load_prediction_csv(const std::filesystem::path& path,
                                  const std::optional<TaskSpec>& expected_task);

// Epoch metrics CSV `epoch,macro_f1,accuracy,train_loss`.
void write_epoch_metrics_csv(const std::filesystem::path& path,
                             const std::vector<EpochMetrics>& metrics);

}  // namespace olp

#endif  // OLP_FINETUNE_HPP_
