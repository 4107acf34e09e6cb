// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0
//
// Metrics and report artifacts: per-class P/R/F1, macro F1, accuracy,
// constant-predictor baselines, confusion matrices with rendered figures,
// and FP/FN error samples.

#ifndef OLP_EVALUATE_HPP_
#define OLP_EVALUATE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "finetune.hpp"

namespace olp {

struct ConfusionMatrix {
  TaskSpec task;                                  // label order = axis order
  std::vector<std::vector<std::int64_t>> counts;  // [gold][pred]

  std::int64_t total() const;
  std::int64_t trace() const;
};

struct ClassMetrics {
  std::string label;
  double precision = 0.0;  // percent
  double recall = 0.0;     // percent
  double f1 = 0.0;         // percent
  // False when the class was never predicted (TP+FP == 0); precision is then
  // reported as 0 / rendered as "-" and contributes F1 = 0.
  bool precision_defined = true;
};

struct ErrorSample {
  std::string id;
  std::string text;
};

struct EvalReport {
  TaskSpec task;
  std::string model_name;
  std::vector<ClassMetrics> per_class;  // canonical order
  double macro_f1 = 0.0;                // percent, unweighted over ALL labels
  double accuracy = 0.0;                // percent
  ConfusionMatrix matrix;
  std::vector<ErrorSample> false_positives;
  std::vector<ErrorSample> false_negatives;
};

// cell[g][p] = count of examples with gold label g predicted p. Length
// mismatch and labels outside the task are hard errors, as are empty inputs.
ConfusionMatrix confusion_matrix(const std::vector<std::string>& gold,
                                 const std::vector<std::string>& pred,
                                 const TaskSpec& task);

std::vector<ClassMetrics> per_class_prf(const ConfusionMatrix& matrix);
double macro_f1(const ConfusionMatrix& matrix);   // percent
double accuracy(const ConfusionMatrix& matrix);   // percent

enum class BaselineStrategy { all_not, all_off, majority_class };
BaselineStrategy parse_baseline(std::string_view name);

// Constant predictor with a one-hot probability vector. all_not / all_off
// are defined for Task A only; majority_class is the task-generic form.
PredictionSet baseline_predict(BaselineStrategy strategy,
                               const std::vector<LabeledExample>& gold,
                               const TaskSpec& task);

// Assembles the full report. Id sets must match exactly (the error lists the
// symmetric difference). FP/FN samples are collected for 2-label tasks only
// (positive class: OFF for Task A, TIN for Task B), deterministically as the
// first max_error_samples in ascending id order.
EvalReport build_report(const std::vector<LabeledExample>& gold,
                        const PredictionSet& predictions, const TaskSpec& task,
                        std::size_t max_error_samples = 4);

// SVG heatmap with per-cell counts annotated, plus the matrix as CSV next to
// it (same stem, .csv extension).
void render_confusion_figure(const ConfusionMatrix& matrix,
                             const std::filesystem::path& path);

void write_confusion_csv(const ConfusionMatrix& matrix,
                         const std::filesystem::path& path);
ConfusionMatrix read_confusion_csv(const std::filesystem::path& path);

// Report artifacts: a Table-1-shaped text table (2-decimal rounding happens
// here and only here) and a machine-readable key-value file.
std::string format_report_table(const EvalReport& report);
void write_report_kv(const EvalReport& report,
                     const std::filesystem::path& path);
EvalReport read_report_kv(const std::filesystem::path& path);

}  // namespace olp

#endif  // OLP_EVALUATE_HPP_
