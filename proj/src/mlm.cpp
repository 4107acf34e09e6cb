// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#include "mlm.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "io_util.hpp"
#include "optim.hpp"
#include "rng.hpp"

namespace olp {

namespace {

bool is_sentinel(int id) { return id < kNumReservedIds; }

}  // namespace

MaskedRow mask_tokens(const std::vector<int>& sequence, double mask_rate,
                      std::uint64_t seed, int vocab_size) {
  if (!(mask_rate > 0.0) || mask_rate >= 1.0)
    throw UsageError("mask_rate must be in (0, 1)");
  std::vector<std::size_t> maskable;
  for (std::size_t i = 0; i < sequence.size(); ++i)
    if (!is_sentinel(sequence[i])) maskable.push_back(i);
  if (maskable.empty())
    throw DataError("sequence has no maskable (non-sentinel) token");

  const auto m = maskable.size();
  auto want = static_cast<std::size_t>(std::max<long long>(
      1, std::llround(mask_rate * static_cast<double>(m))));
  want = std::min(want, m);

  Rng rng(derive_seed(seed, "mlm/mask"));
  auto chosen = rng.sample_indices(m, want);

  MaskedRow row;
  row.input_ids = sequence;
  row.target_ids.assign(sequence.size(), kIgnoreTarget);
  row.mask_positions.assign(sequence.size(), 0);

  const int real_vocab = vocab_size - kNumReservedIds;
  for (auto ci : chosen) {
    std::size_t pos = maskable[ci];
    int original = sequence[pos];
    row.target_ids[pos] = original;
    row.mask_positions[pos] = 1;
    // BERT recipe: 80% mask token, 10% random token, 10% unchanged.
    double u = rng.next_unit();
    if (u < 0.8) {
      row.input_ids[pos] = kMaskId;
    } else if (u < 0.9) {
      row.input_ids[pos] =
          kNumReservedIds +
          static_cast<int>(rng.next_below(static_cast<std::size_t>(real_vocab)));
    }  // else: keep the original id
  }
  return row;
}

double masked_batch_loss(const EncoderModel& model,
                         const std::vector<MaskedRow>& rows,
                         std::size_t* scored) {
  std::vector<std::vector<int>> inputs, targets;
  inputs.reserve(rows.size());
  targets.reserve(rows.size());
  for (const auto& r : rows) {
    inputs.push_back(r.input_ids);
    // mask_positions decides what is scored; target values elsewhere are
    // irrelevant by construction of this projection.
    std::vector<int> t(r.input_ids.size(), kIgnoreTarget);
    for (std::size_t i = 0; i < r.input_ids.size(); ++i)
      if (r.mask_positions[i]) t[i] = r.target_ids[i];
    targets.push_back(std::move(t));
  }
  return mlm_batch_loss(model, inputs, targets, scored);
}

namespace {

// Tokenized corpus line with its stable corpus index (mask seeds key off the
// index, not the shuffled position, so epochs re-mask identically regardless
// of order).
struct CorpusSeq {
  std::size_t index;
  std::vector<int> ids;
};

std::vector<CorpusSeq> tokenize_corpus(const EncoderModel& model,
                                       const std::vector<std::string>& corpus) {
  auto tok = model.tokenizer();
  const int max_len = model.config().max_positions;
  std::vector<CorpusSeq> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].empty()) continue;
    auto ids = tok.tokenize(corpus[i], max_len);
    if (ids.size() <= 2) continue;  // sentinels only, nothing to mask
    out.push_back({i, std::move(ids)});
  }
  if (out.empty())
    throw DataError("corpus contains no usable (non-empty) lines");
  return out;
}

}  // namespace

MlmResult further_pretrain(const EncoderModel& model,
                           const std::vector<std::string>& corpus,
                           const MlmTrainConfig& config) {
  if (corpus.empty()) throw DataError("empty corpus");
  if (config.epochs < 0) throw UsageError("epochs must be >= 0");
  if (config.batch_size < 1) throw UsageError("batch_size must be positive");

  auto seqs = tokenize_corpus(model, corpus);

  MlmResult result;
  result.model = model;  // adapted copy; the input model stays untouched
  const auto& cfg = result.model.config();

  Adam opt(result.model.params(),
           config.learning_rate * cfg.lr_scale);
  long long step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order(seqs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(derive_seed(
        config.seed, "mlm/shuffle/epoch" + std::to_string(epoch)));
    shuffle_rng.shuffle(order);

    for (std::size_t off = 0; off < order.size();
         off += static_cast<std::size_t>(config.batch_size)) {
      std::size_t end = std::min(
          order.size(), off + static_cast<std::size_t>(config.batch_size));
      std::vector<MaskedRow> batch;
      std::vector<std::size_t> batch_indices;
      for (std::size_t i = off; i < end; ++i) {
        const auto& s = seqs[order[i]];
        // Dynamic masking: a fresh pattern per epoch.
        auto mask_seed = derive_seed(
            config.seed, "mlm/mask/e" + std::to_string(epoch) + "/i" +
                             std::to_string(s.index));
        batch.push_back(
            mask_tokens(s.ids, config.mask_rate, mask_seed, cfg.vocab_size));
        batch_indices.push_back(s.index);
      }

      Params grads = zeros_like(result.model.params());
      std::vector<std::vector<int>> inputs, targets;
      for (auto& r : batch) {
        inputs.push_back(r.input_ids);
        targets.push_back(r.target_ids);
      }
      double loss = mlm_batch_backward(result.model, inputs, targets, grads);
      if (!std::isfinite(loss)) {
        std::string ids;
        for (auto bi : batch_indices) ids += " " + std::to_string(bi);
        throw InternalError("non-finite MLM loss at step " +
                            std::to_string(step) + " (corpus lines:" + ids +
                            ")");
      }
      opt.step(result.model.params(), grads, config.grad_clip);
      result.loss_curve.emplace_back(step, loss);
      ++step;
    }
  }
  return result;
}

double mlm_heldout_loss(const EncoderModel& model,
                        const std::vector<std::string>& corpus,
                        std::uint64_t seed) {
  if (corpus.empty()) throw DataError("empty corpus");
  auto seqs = tokenize_corpus(model, corpus);
  const auto& cfg = model.config();

  double total = 0.0;
  std::size_t positions = 0;
  // Fixed per-line masking seed keyed by the line index so different models
  // are scored on identical masked inputs.
  for (const auto& s : seqs) {
    auto mask_seed =
        derive_seed(seed, "mlm/heldout/i" + std::to_string(s.index));
    auto row = mask_tokens(s.ids, 0.15, mask_seed, cfg.vocab_size);
    std::size_t scored = 0;
    double mean = masked_batch_loss(model, {row}, &scored);
    total += mean * static_cast<double>(scored);
    positions += scored;
  }
  if (positions == 0) throw DataError("no maskable positions in corpus");
  return total / static_cast<double>(positions);
}

void write_loss_curve(const std::filesystem::path& path,
                      const std::vector<std::pair<long long, double>>& curve) {
  std::string buf = "step,loss\n";
  for (const auto& [step, loss] : curve)
    buf += std::to_string(step) + "," + format_double("%.9f", loss) + "\n";
  write_file(path, buf);
}

}  // namespace olp
