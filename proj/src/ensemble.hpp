// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0
//
// Aggregation of prediction sets into a final prediction per example, via
// hard (majority) voting or soft (probability-averaging) voting.

#ifndef OLP_ENSEMBLE_HPP_
#define OLP_ENSEMBLE_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "finetune.hpp"

namespace olp {

enum class VoteMode { hard, soft };
enum class TieRule { soft_fallback, canonical_order };

VoteMode parse_vote_mode(std::string_view name);
TieRule parse_tie_rule(std::string_view name);

struct EnsembleSpec {
  std::vector<PredictionSet> members;  // >= 2, same task, identical id sets
  VoteMode mode = VoteMode::hard;
  TieRule tie_rule = TieRule::soft_fallback;
};

struct EnsembleRow {
  std::string id;
  std::string label;
  std::vector<std::int64_t> votes;  // per label, canonical order
  std::vector<double> mean_probs;   // canonical order
  bool tie_flag = false;            // set when the tie rule decided the label
};

struct EnsembleResult {
  TaskSpec task;
  std::vector<EnsembleRow> rows;
  std::string spec_digest;  // explicit membership, mode and tie rule
};

// Majority vote from stored labels. Ties go to the tie rule: soft_fallback
// picks the tied label with the highest mean probability (canonical order if
// those are equal or absent), canonical_order picks the earliest tied label.
// Tie-resolved rows are flagged.
EnsembleResult hard_vote(const EnsembleSpec& spec);

// Arithmetic mean of member probability vectors; argmax with canonical-order
// tie-break. Every member must carry probabilities.
EnsembleResult soft_vote(const EnsembleSpec& spec);

// The cross-validation ensemble: hard vote with soft_fallback over the k
// fold predictions.
EnsembleResult cv_ensemble(const std::vector<PredictionSet>& prediction_sets);

// `id,label,tie_flag,votes_<label>...,mean_p_<label>...` with header.
void write_ensemble_csv(const std::filesystem::path& path,
                        const EnsembleResult& result);
// Headerless `id,label` submission rows.
void write_submission_csv(const std::filesystem::path& path,
                          const EnsembleResult& result);

}  // namespace olp

#endif  // OLP_ENSEMBLE_HPP_
