// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0
//
// Sequence-encoder abstraction: a registry of named pretrained variants plus
// a tiny randomly-initialized reference encoder (2-layer pre-LN transformer)
// that makes every training procedure verifiable at desk scale. The tiny
// model carries both heads (classifier and MLM) and implements analytic
// gradients for both losses.

#ifndef OLP_ENCODER_HPP_
#define OLP_ENCODER_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"

namespace olp {

struct EncoderConfig {
  std::string name;
  int num_layers = 2;
  int hidden_dim = 32;
  int num_heads = 4;
  int vocab_size = 2048;
  int max_positions = 128;
  int num_labels = 2;
  bool lowercase = true;
  // Learning-rate multiplier applied by the training loops. 1.0 for the
  // full-size registry models; 100.0 for tiny-reference, whose random
  // initialization needs proportionally larger steps than a pretrained
  // checkpoint.
  double lr_scale = 1.0;
  // Checkpoint path. Registry models other than tiny-reference cannot be
  // built without one.
  std::string pretrained_source;
  bool requires_pretrained = false;
};

void validate_config(const EncoderConfig& cfg);

// The nine model variants evaluated in the experiments plus tiny-reference.
const std::vector<std::string>& registry_names();
EncoderConfig registry_config(const std::string& name);

// Reserved token ids shared by every tokenizer configuration.
inline constexpr int kPadId = 0;
inline constexpr int kBeginId = 1;
inline constexpr int kEndId = 2;
inline constexpr int kMaskId = 3;
inline constexpr int kUnkId = 4;
inline constexpr int kNumReservedIds = 5;

// tiny-reference tokenizer: lowercase whitespace split hashed into
// vocab_size buckets, begin/end sentinels, truncation to max_len.
class Tokenizer {
 public:
  Tokenizer(int vocab_size, bool lowercase);
  // Length <= max_len including sentinels; max_len < 3 is a hard error.
  std::vector<int> tokenize(std::string_view text, int max_len) const;

 private:
  int vocab_size_;
  bool lowercase_;
};

struct LayerParams {
  Eigen::MatrixXd wq, wk, wv, wo;      // D x D
  Eigen::MatrixXd bq, bk, bv, bo;      // 1 x D
  Eigen::MatrixXd ln1_g, ln1_b;        // 1 x D
  Eigen::MatrixXd w1;                  // D x F
  Eigen::MatrixXd b1;                  // 1 x F
  Eigen::MatrixXd w2;                  // F x D
  Eigen::MatrixXd b2;                  // 1 x D
  Eigen::MatrixXd ln2_g, ln2_b;        // 1 x D
};

struct Params {
  Eigen::MatrixXd tok_emb;             // V x D
  Eigen::MatrixXd pos_emb;             // P x D
  std::vector<LayerParams> layers;
  Eigen::MatrixXd lnf_g, lnf_b;        // 1 x D
  Eigen::MatrixXd cls_w;               // D x C
  Eigen::MatrixXd cls_b;               // 1 x C
  Eigen::MatrixXd mlm_w;               // D x V
  Eigen::MatrixXd mlm_b;               // 1 x V
};

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd* mat;
};
struct NamedTensorConst {
  std::string name;
  const Eigen::MatrixXd* mat;
};

// Stable, fixed-order enumeration of every parameter tensor. This single
// ordering backs the optimizer, checkpoints and the finite-difference
// parameter indexing.
std::vector<NamedTensor> tensor_refs(Params& p);
std::vector<NamedTensorConst> tensor_refs(const Params& p);

Params zeros_like(const Params& p);
std::size_t param_total_size(const Params& p);
double get_param_scalar(const Params& p, std::size_t flat_index);
void add_to_param_scalar(Params& p, std::size_t flat_index, double delta);

class EncoderModel {
 public:
  EncoderModel() = default;

  const EncoderConfig& config() const { return config_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }
  Tokenizer tokenizer() const {
    return Tokenizer(config_.vocab_size, config_.lowercase);
  }

  std::size_t parameter_count() const;

  // Probability matrix (batch x |task.labels|); each row sums to 1 within
  // 1e-6 and rows are independent of batch composition. Sequences longer
  // than max_positions are a hard error, as is a task whose label count
  // differs from the classifier head.
  Eigen::MatrixXd classify(const std::vector<std::vector<int>>& batch,
                           const TaskSpec& task) const;

  // Single-sequence probabilities (classifier-head width).
  Eigen::RowVectorXd classify_row(const std::vector<int>& seq) const;

  // Replaces the classifier head with a fresh seeded one of the given width.
  // Used when adapting an MLM checkpoint to a task with a different label
  // count.
  void reset_classifier_head(int num_labels, std::uint64_t seed);

 private:
  friend EncoderModel build_encoder(const EncoderConfig&, std::uint64_t);
  friend EncoderModel load_checkpoint(const std::filesystem::path&);

  EncoderConfig config_;
  Params params_;
};

// Builds a model: random seeded initialization for tiny-reference (or any
// config without a pretrained_source); checkpoint load when
// pretrained_source is set; a hard error listing the registry for models
// that require external weights.
EncoderModel build_encoder(const EncoderConfig& config, std::uint64_t seed);

// --- Training-facing surface (used by the mlm and finetune modules) ---

// Mean cross-entropy of the classifier head over the batch; accumulates
// analytic gradients of that mean into `grads`.
double classification_batch_backward(const EncoderModel& model,
                                     const std::vector<std::vector<int>>& inputs,
                                     const std::vector<std::size_t>& label_idx,
                                     Params& grads);

// Mean cross-entropy of the MLM head over scored positions (target >= 0).
// Positions with target < 0 contribute nothing. The gradient of the mean is
// accumulated into `grads`; `scored` receives the scored-position count.
double mlm_batch_backward(const EncoderModel& model,
                          const std::vector<std::vector<int>>& inputs,
                          const std::vector<std::vector<int>>& targets,
                          Params& grads, std::size_t* scored = nullptr);

// Loss-only variants (no gradients).
double classification_batch_loss(const EncoderModel& model,
                                 const std::vector<std::vector<int>>& inputs,
                                 const std::vector<std::size_t>& label_idx);
double mlm_batch_loss(const EncoderModel& model,
                      const std::vector<std::vector<int>>& inputs,
                      const std::vector<std::vector<int>>& targets,
                      std::size_t* scored = nullptr);

}  // namespace olp

#endif  // OLP_ENCODER_HPP_
