// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0
//
// Masked-language-modeling batches and in-domain further pre-training.

#ifndef OLP_MLM_HPP_
#define OLP_MLM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "encoder.hpp"

namespace olp {

// Marks unscored positions in MaskedRow::target_ids.
inline constexpr int kIgnoreTarget = -1;

// One row of a masked batch. target_ids[t] != kIgnoreTarget exactly where
// mask_positions[t] is set; sentinel positions are never selected.
struct MaskedRow {
  std::vector<int> input_ids;
  std::vector<int> target_ids;
  std::vector<std::uint8_t> mask_positions;
};

struct MaskedBatch {
  std::vector<MaskedRow> rows;
};

struct MlmTrainConfig {
  int epochs = 1;
  int batch_size = 4;
  double learning_rate = 2e-5;
  double mask_rate = 0.15;
  std::uint64_t seed = 0;
  double grad_clip = 0.0;  // 0 = off (extension; default matches the recipe)
};

// Selects exactly max(1, round(mask_rate * m)) of the m maskable
// (non-sentinel) positions, deterministic under seed. Of the selected
// positions 80% become the mask token, 10% a random non-reserved vocabulary
// token and 10% stay unchanged; targets carry the original ids there and
// kIgnoreTarget everywhere else. A sequence without maskable tokens is a
// hard error.
MaskedRow mask_tokens(const std::vector<int>& sequence, double mask_rate,
                      std::uint64_t seed, int vocab_size);

// Mean cross-entropy over masked positions only, reading mask_positions as
// the source of truth (target values at unmasked positions are ignored).
double masked_batch_loss(const EncoderModel& model,
                         const std::vector<MaskedRow>& rows,
                         std::size_t* scored = nullptr);

struct MlmResult {
  EncoderModel model;
  std::vector<std::pair<long long, double>> loss_curve;  // (step, mean CE)
};

// Runs exactly config.epochs passes over the corpus in a seeded shuffle
// order with a fresh mask per epoch. The input model is not mutated; the
// adapted copy and the per-step loss curve are returned. Empty corpus and
// non-finite losses are hard errors (the latter with step/batch diagnostics).
MlmResult further_pretrain(const EncoderModel& model,
                           const std::vector<std::string>& corpus,
                           const MlmTrainConfig& config);

// Mean masked cross-entropy under a fixed masking seed, so values are
// comparable across models. Deterministic.
double mlm_heldout_loss(const EncoderModel& model,
                        const std::vector<std::string>& corpus,
                        std::uint64_t seed);

// Loss curves as CSV `step,loss`.
void write_loss_curve(const std::filesystem::path& path,
                      const std::vector<std::pair<long long, double>>& curve);

}  // namespace olp

#endif  // OLP_MLM_HPP_
