// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#include "encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "error.hpp"
#include "rng.hpp"

namespace olp {

namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr double kLayerNormEps = 1e-5;
constexpr double kInitStd = 0.02;

}  // namespace

void validate_config(const EncoderConfig& cfg) {
  if (cfg.num_layers < 1 || cfg.hidden_dim < 1 || cfg.num_heads < 1 ||
      cfg.max_positions < 3 || cfg.num_labels < 2)
    throw UsageError("invalid encoder config for '" + cfg.name + "'");
  if (cfg.hidden_dim % cfg.num_heads != 0)
    throw UsageError("hidden_dim (" + std::to_string(cfg.hidden_dim) +
                     ") must be divisible by num_heads (" +
                     std::to_string(cfg.num_heads) + ")");
  if (cfg.vocab_size <= kNumReservedIds)
    throw UsageError("vocab_size must exceed the " +
                     std::to_string(kNumReservedIds) + " reserved ids");
}

const std::vector<std::string>& registry_names() {
  static const std::vector<std::string> names = {
      "bert-base",        "bert-large",       "roberta-base",
      "roberta-large",    "xlm-roberta",      "albert-large-v1",
      "albert-large-v2",  "albert-xxlarge-v1", "albert-xxlarge-v2",
      "tiny-reference"};
  return names;
}

EncoderConfig registry_config(const std::string& name) {
  auto entry = [](std::string n, int layers, int dim, int heads, int vocab,
                  bool lowercase) {
    EncoderConfig c;
    c.name = std::move(n);
    c.num_layers = layers;
    c.hidden_dim = dim;
    c.num_heads = heads;
    c.vocab_size = vocab;
    c.lowercase = lowercase;
    c.requires_pretrained = true;
    return c;
  };
  if (name == "bert-base") return entry(name, 12, 768, 12, 30522, true);
  if (name == "bert-large") return entry(name, 24, 1024, 16, 30522, true);
  if (name == "roberta-base") return entry(name, 12, 768, 12, 50265, false);
  if (name == "roberta-large") return entry(name, 24, 1024, 16, 50265, false);
  if (name == "xlm-roberta") return entry(name, 24, 1024, 16, 250002, false);
  if (name == "albert-large-v1") return entry(name, 24, 1024, 16, 30000, true);
  if (name == "albert-large-v2") return entry(name, 24, 1024, 16, 30000, true);
  if (name == "albert-xxlarge-v1") return entry(name, 12, 4096, 64, 30000, true);
  if (name == "albert-xxlarge-v2") return entry(name, 12, 4096, 64, 30000, true);
  if (name == "tiny-reference") {
    EncoderConfig c;
    c.name = name;
    c.lr_scale = 100.0;
    return c;  // defaults: 2 layers, dim 32, 4 heads, vocab 2048
  }
  std::string known;
  for (const auto& n : registry_names()) {
    if (!known.empty()) known += ", ";
    known += n;
  }
  throw UsageError("unknown model '" + name + "'; registry entries: " + known);
}

Tokenizer::Tokenizer(int vocab_size, bool lowercase)
    : vocab_size_(vocab_size), lowercase_(lowercase) {
  if (vocab_size_ <= kNumReservedIds)
    throw UsageError("tokenizer vocab_size must exceed the reserved ids");
}

std::vector<int> Tokenizer::tokenize(std::string_view text, int max_len) const {
  if (max_len < 3)
    throw UsageError("max_len must be >= 3 (begin/end sentinels plus content)");
  std::vector<int> ids;
  ids.push_back(kBeginId);
  const int budget = max_len - 2;
  std::size_t i = 0;
  int emitted = 0;
  while (i < text.size() && emitted < budget) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i == start) break;
    std::string tok(text.substr(start, i - start));
    if (lowercase_)
      for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto h = fnv1a64(tok);
    int bucket = static_cast<int>(h % static_cast<std::uint64_t>(
                                          vocab_size_ - kNumReservedIds));
    ids.push_back(kNumReservedIds + bucket);
    ++emitted;
  }
  ids.push_back(kEndId);
  return ids;
}

std::vector<NamedTensor> tensor_refs(Params& p) {
  std::vector<NamedTensor> out;
  out.push_back({"tok_emb", &p.tok_emb});
  out.push_back({"pos_emb", &p.pos_emb});
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& L = p.layers[l];
    std::string pre = "layer" + std::to_string(l) + ".";
    out.push_back({pre + "wq", &L.wq});
    out.push_back({pre + "bq", &L.bq});
    out.push_back({pre + "wk", &L.wk});
    out.push_back({pre + "bk", &L.bk});
    out.push_back({pre + "wv", &L.wv});
    out.push_back({pre + "bv", &L.bv});
    out.push_back({pre + "wo", &L.wo});
    out.push_back({pre + "bo", &L.bo});
    out.push_back({pre + "ln1_g", &L.ln1_g});
    out.push_back({pre + "ln1_b", &L.ln1_b});
    out.push_back({pre + "w1", &L.w1});
    out.push_back({pre + "b1", &L.b1});
    out.push_back({pre + "w2", &L.w2});
    out.push_back({pre + "b2", &L.b2});
    out.push_back({pre + "ln2_g", &L.ln2_g});
    out.push_back({pre + "ln2_b", &L.ln2_b});
  }
  out.push_back({"lnf_g", &p.lnf_g});
  out.push_back({"lnf_b", &p.lnf_b});
  out.push_back({"cls_w", &p.cls_w});
  out.push_back({"cls_b", &p.cls_b});
  out.push_back({"mlm_w", &p.mlm_w});
  out.push_back({"mlm_b", &p.mlm_b});
  return out;
}

std::vector<NamedTensorConst> tensor_refs(const Params& p) {
  auto refs = tensor_refs(const_cast<Params&>(p));
  std::vector<NamedTensorConst> out;
  out.reserve(refs.size());
  for (auto& r : refs) out.push_back({r.name, r.mat});
  return out;
}

Params zeros_like(const Params& p) {
  Params z = p;
  for (auto& r : tensor_refs(z)) r.mat->setZero();
  return z;
}

std::size_t param_total_size(const Params& p) {
  std::size_t n = 0;
  for (auto& r : tensor_refs(p)) n += static_cast<std::size_t>(r.mat->size());
  return n;
}

double get_param_scalar(const Params& p, std::size_t flat_index) {
  for (auto& r : tensor_refs(p)) {
    auto sz = static_cast<std::size_t>(r.mat->size());
    if (flat_index < sz) return r.mat->data()[flat_index];
    flat_index -= sz;
  }
  throw InternalError("parameter index out of range");
}

void add_to_param_scalar(Params& p, std::size_t flat_index, double delta) {
  for (auto& r : tensor_refs(p)) {
    auto sz = static_cast<std::size_t>(r.mat->size());
    if (flat_index < sz) {
      r.mat->data()[flat_index] += delta;
      return;
    }
    flat_index -= sz;
  }
  throw InternalError("parameter index out of range");
}

namespace {

Params init_params(const EncoderConfig& cfg, std::uint64_t seed) {
  const int d = cfg.hidden_dim;
  const int f = 4 * d;
  Params p;
  p.tok_emb.resize(cfg.vocab_size, d);
  p.pos_emb.resize(cfg.max_positions, d);
  p.layers.resize(static_cast<std::size_t>(cfg.num_layers));
  for (auto& L : p.layers) {
    L.wq.resize(d, d); L.wk.resize(d, d); L.wv.resize(d, d); L.wo.resize(d, d);
    L.bq.resize(1, d); L.bk.resize(1, d); L.bv.resize(1, d); L.bo.resize(1, d);
    L.ln1_g.resize(1, d); L.ln1_b.resize(1, d);
    L.w1.resize(d, f); L.b1.resize(1, f);
    L.w2.resize(f, d); L.b2.resize(1, d);
    L.ln2_g.resize(1, d); L.ln2_b.resize(1, d);
  }
  p.lnf_g.resize(1, d); p.lnf_b.resize(1, d);
  p.cls_w.resize(d, cfg.num_labels); p.cls_b.resize(1, cfg.num_labels);
  p.mlm_w.resize(d, cfg.vocab_size); p.mlm_b.resize(1, cfg.vocab_size);

  // LayerNorm gains start at one, every bias at zero, weights at N(0, std).
  Rng rng(derive_seed(seed, "encoder/init"));
  for (auto& r : tensor_refs(p)) {
    auto dot = r.name.rfind('.');
    std::string leaf = dot == std::string::npos ? r.name : r.name.substr(dot + 1);
    if (leaf.ends_with("_g")) {
      r.mat->setOnes();
    } else if (leaf[0] == 'b' || leaf.ends_with("_b")) {
      r.mat->setZero();
    } else {
      for (Eigen::Index i = 0; i < r.mat->size(); ++i)
        r.mat->data()[i] = kInitStd * rng.next_gaussian();
    }
  }
  return p;
}

struct LayerCache {
  Eigen::MatrixXd x_in;          // T x D residual-stream input
  Eigen::MatrixXd ln1_xhat;      // normalized pre-attention input
  Eigen::VectorXd ln1_inv_sigma; // per-row 1/sigma
  Eigen::MatrixXd ln1_out;
  Eigen::MatrixXd q, k, v;       // T x D projections
  std::vector<Eigen::MatrixXd> attn;  // per-head T x T softmax rows
  Eigen::MatrixXd concat;        // T x D head outputs before wo
  Eigen::MatrixXd x_mid;         // x_in + attention output
  Eigen::MatrixXd ln2_xhat;
  Eigen::VectorXd ln2_inv_sigma;
  Eigen::MatrixXd ln2_out;
  Eigen::MatrixXd ffn_pre;       // T x F pre-activation
  Eigen::MatrixXd ffn_act;       // relu(ffn_pre)
};

struct SeqCache {
  std::vector<int> ids;
  Eigen::MatrixXd x0;
  std::vector<LayerCache> layers;
  Eigen::MatrixXd xf_in;         // input to the final LayerNorm
  Eigen::MatrixXd xf_hat;
  Eigen::VectorXd lnf_inv_sigma;
  Eigen::MatrixXd xf;            // final hidden states
};

void layernorm_forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& g,
                       const Eigen::MatrixXd& b, Eigen::MatrixXd& xhat,
                       Eigen::VectorXd& inv_sigma, Eigen::MatrixXd& y) {
  const auto rows = x.rows();
  xhat.resize(rows, x.cols());
  inv_sigma.resize(rows);
  y.resize(rows, x.cols());
  for (Eigen::Index r = 0; r < rows; ++r) {
    double mu = x.row(r).mean();
    Eigen::RowVectorXd centered = x.row(r).array() - mu;
    double var = centered.squaredNorm() / static_cast<double>(x.cols());
    double is = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_sigma(r) = is;
    xhat.row(r) = centered * is;
    y.row(r) = (xhat.row(r).array() * g.row(0).array()) + b.row(0).array();
  }
}

// dy -> dx; accumulates dg/db.
Eigen::MatrixXd layernorm_backward(const Eigen::MatrixXd& dy,
                                   const Eigen::MatrixXd& xhat,
                                   const Eigen::VectorXd& inv_sigma,
                                   const Eigen::MatrixXd& g,
                                   Eigen::MatrixXd& dg, Eigen::MatrixXd& db) {
  const auto rows = dy.rows();
  const auto cols = dy.cols();
  Eigen::MatrixXd dx(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    dg.row(0).array() += dy.row(r).array() * xhat.row(r).array();
    db.row(0).array() += dy.row(r).array();
    Eigen::RowVectorXd dxhat = dy.row(r).array() * g.row(0).array();
    double m1 = dxhat.mean();
    double m2 = (dxhat.array() * xhat.row(r).array()).mean();
    dx.row(r) =
        inv_sigma(r) * (dxhat.array() - m1 - xhat.row(r).array() * m2);
  }
  return dx;
}

Eigen::RowVectorXd softmax_row(const Eigen::RowVectorXd& logits) {
  Eigen::RowVectorXd shifted = logits.array() - logits.maxCoeff();
  Eigen::RowVectorXd e = shifted.array().exp();
  return e / e.sum();
}

SeqCache forward_seq(const EncoderConfig& cfg, const Params& p,
                     const std::vector<int>& ids) {
  if (ids.empty()) throw InternalError("empty token sequence");
  if (static_cast<int>(ids.size()) > cfg.max_positions)
    throw DataError("sequence length " + std::to_string(ids.size()) +
                    " exceeds max_positions " +
                    std::to_string(cfg.max_positions));
  const auto t = static_cast<Eigen::Index>(ids.size());
  const int d = cfg.hidden_dim;
  const int heads = cfg.num_heads;
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  SeqCache c;
  c.ids = ids;
  c.x0.resize(t, d);
  for (Eigen::Index i = 0; i < t; ++i) {
    int id = ids[static_cast<std::size_t>(i)];
    if (id < 0 || id >= cfg.vocab_size)
      throw DataError("token id " + std::to_string(id) + " outside vocab");
    c.x0.row(i) = p.tok_emb.row(id) + p.pos_emb.row(i);
  }

  Eigen::MatrixXd x = c.x0;
  c.layers.resize(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& L = p.layers[l];
    auto& lc = c.layers[l];
    lc.x_in = x;

    layernorm_forward(x, L.ln1_g, L.ln1_b, lc.ln1_xhat, lc.ln1_inv_sigma,
                      lc.ln1_out);
    lc.q = (lc.ln1_out * L.wq).rowwise() + L.bq.row(0);
    lc.k = (lc.ln1_out * L.wk).rowwise() + L.bk.row(0);
    lc.v = (lc.ln1_out * L.wv).rowwise() + L.bv.row(0);

    lc.attn.resize(static_cast<std::size_t>(heads));
    lc.concat.resize(t, d);
    for (int h = 0; h < heads; ++h) {
      auto qh = lc.q.middleCols(h * dh, dh);
      auto kh = lc.k.middleCols(h * dh, dh);
      auto vh = lc.v.middleCols(h * dh, dh);
      Eigen::MatrixXd scores = (qh * kh.transpose()) * scale;
      Eigen::MatrixXd probs(t, t);
      for (Eigen::Index r = 0; r < t; ++r)
        probs.row(r) = softmax_row(scores.row(r));
      lc.attn[static_cast<std::size_t>(h)] = probs;
      lc.concat.middleCols(h * dh, dh) = probs * vh;
    }

    Eigen::MatrixXd attn_out = (lc.concat * L.wo).rowwise() + L.bo.row(0);
    lc.x_mid = x + attn_out;

    layernorm_forward(lc.x_mid, L.ln2_g, L.ln2_b, lc.ln2_xhat,
                      lc.ln2_inv_sigma, lc.ln2_out);
    lc.ffn_pre = (lc.ln2_out * L.w1).rowwise() + L.b1.row(0);
    lc.ffn_act = lc.ffn_pre.cwiseMax(0.0);
    Eigen::MatrixXd ffn_out = (lc.ffn_act * L.w2).rowwise() + L.b2.row(0);
    x = lc.x_mid + ffn_out;
  }

  c.xf_in = x;
  layernorm_forward(x, p.lnf_g, p.lnf_b, c.xf_hat, c.lnf_inv_sigma, c.xf);
  return c;
}

// Backpropagates d(loss)/d(xf) through the whole stack into `g`.
void backward_seq(const EncoderConfig& cfg, const Params& p, const SeqCache& c,
                  const Eigen::MatrixXd& dxf, Params& g) {
  const int d = cfg.hidden_dim;
  const int heads = cfg.num_heads;
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const auto t = static_cast<Eigen::Index>(c.ids.size());

  Eigen::MatrixXd dx = layernorm_backward(dxf, c.xf_hat, c.lnf_inv_sigma,
                                          p.lnf_g, g.lnf_g, g.lnf_b);

  for (std::size_t li = p.layers.size(); li-- > 0;) {
    const auto& L = p.layers[li];
    const auto& lc = c.layers[li];
    auto& gl = g.layers[li];

    // FFN block: x_out = x_mid + relu(ln2_out*w1 + b1)*w2 + b2
    Eigen::MatrixXd dffn_out = dx;  // residual passes dx through unchanged
    gl.b2.row(0) += dffn_out.colwise().sum();
    gl.w2 += lc.ffn_act.transpose() * dffn_out;
    Eigen::MatrixXd dact = dffn_out * L.w2.transpose();
    Eigen::MatrixXd dpre =
        (lc.ffn_pre.array() > 0.0).select(dact, Eigen::MatrixXd::Zero(t, 4 * d));
    gl.b1.row(0) += dpre.colwise().sum();
    gl.w1 += lc.ln2_out.transpose() * dpre;
    Eigen::MatrixXd dln2_out = dpre * L.w1.transpose();
    Eigen::MatrixXd dx_mid =
        dx + layernorm_backward(dln2_out, lc.ln2_xhat, lc.ln2_inv_sigma,
                                L.ln2_g, gl.ln2_g, gl.ln2_b);

    // Attention block: x_mid = x_in + (concat(heads)*wo + bo)
    Eigen::MatrixXd dattn_out = dx_mid;
    gl.bo.row(0) += dattn_out.colwise().sum();
    gl.wo += lc.concat.transpose() * dattn_out;
    Eigen::MatrixXd dconcat = dattn_out * L.wo.transpose();

    Eigen::MatrixXd dq(t, d), dk(t, d), dv(t, d);
    for (int h = 0; h < heads; ++h) {
      auto qh = lc.q.middleCols(h * dh, dh);
      auto kh = lc.k.middleCols(h * dh, dh);
      auto vh = lc.v.middleCols(h * dh, dh);
      const auto& probs = lc.attn[static_cast<std::size_t>(h)];
      auto doh = dconcat.middleCols(h * dh, dh);

      Eigen::MatrixXd dprobs = doh * vh.transpose();
      dv.middleCols(h * dh, dh) = probs.transpose() * doh;

      Eigen::MatrixXd dscores(t, t);
      for (Eigen::Index r = 0; r < t; ++r) {
        double dot = dprobs.row(r).dot(probs.row(r));
        dscores.row(r) =
            probs.row(r).array() * (dprobs.row(r).array() - dot);
      }
      dq.middleCols(h * dh, dh) = (dscores * kh) * scale;
      dk.middleCols(h * dh, dh) = (dscores.transpose() * qh) * scale;
    }

    gl.bq.row(0) += dq.colwise().sum();
    gl.bk.row(0) += dk.colwise().sum();
    gl.bv.row(0) += dv.colwise().sum();
    gl.wq += lc.ln1_out.transpose() * dq;
    gl.wk += lc.ln1_out.transpose() * dk;
    gl.wv += lc.ln1_out.transpose() * dv;
    Eigen::MatrixXd dln1_out = dq * L.wq.transpose() + dk * L.wk.transpose() +
                               dv * L.wv.transpose();
    dx = dx_mid + layernorm_backward(dln1_out, lc.ln1_xhat, lc.ln1_inv_sigma,
                                     L.ln1_g, gl.ln1_g, gl.ln1_b);
  }

  for (Eigen::Index i = 0; i < t; ++i) {
    g.tok_emb.row(c.ids[static_cast<std::size_t>(i)]) += dx.row(i);
    g.pos_emb.row(i) += dx.row(i);
  }
}

}  // namespace

std::size_t EncoderModel::parameter_count() const {
  return param_total_size(params_);
}

Eigen::RowVectorXd EncoderModel::classify_row(const std::vector<int>& seq) const {
  SeqCache c = forward_seq(config_, params_, seq);
  Eigen::RowVectorXd pooled = c.xf.colwise().mean();
  Eigen::RowVectorXd logits =
      pooled * params_.cls_w + params_.cls_b.row(0);
  return softmax_row(logits);
}

Eigen::MatrixXd EncoderModel::classify(
    const std::vector<std::vector<int>>& batch, const TaskSpec& task) const {
  if (static_cast<int>(task.num_labels()) != config_.num_labels)
    throw DataError("label-count mismatch: classifier head has " +
                    std::to_string(config_.num_labels) + " outputs but task " +
                    task.name() + " has " +
                    std::to_string(task.num_labels()) + " labels");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(batch.size()),
                      config_.num_labels);
  for (std::size_t i = 0; i < batch.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = classify_row(batch[i]);
  return out;
}

void EncoderModel::reset_classifier_head(int num_labels, std::uint64_t seed) {
  if (num_labels < 2) throw UsageError("classifier head needs >= 2 labels");
  config_.num_labels = num_labels;
  params_.cls_w.resize(config_.hidden_dim, num_labels);
  params_.cls_b.resize(1, num_labels);
  Rng rng(derive_seed(seed, "encoder/cls_head"));
  for (Eigen::Index i = 0; i < params_.cls_w.size(); ++i)
    params_.cls_w.data()[i] = kInitStd * rng.next_gaussian();
  params_.cls_b.setZero();
}

EncoderModel load_checkpoint(const std::filesystem::path& path);  // checkpoint.cpp

EncoderModel build_encoder(const EncoderConfig& config, std::uint64_t seed) {
  validate_config(config);
  if (!config.pretrained_source.empty())
    return load_checkpoint(config.pretrained_source);
  if (config.requires_pretrained) {
    std::string known;
    for (const auto& n : registry_names()) {
      if (!known.empty()) known += ", ";
      known += n;
    }
    throw UsageError(
        "model '" + config.name +
        "' requires pretrained weights; set pretrained_source to a checkpoint "
        "file, or use tiny-reference for desk-scale runs (registry: " +
        known + ")");
  }
  EncoderModel m;
  m.config_ = config;
  m.params_ = init_params(config, seed);
  return m;
}

double classification_batch_backward(
    const EncoderModel& model, const std::vector<std::vector<int>>& inputs,
    const std::vector<std::size_t>& label_idx, Params& grads) {
  if (inputs.empty() || inputs.size() != label_idx.size())
    throw InternalError("bad classification batch");
  const auto& cfg = model.config();
  const auto& p = model.params();
  const double inv_n = 1.0 / static_cast<double>(inputs.size());
  double loss = 0.0;

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    SeqCache c = forward_seq(cfg, p, inputs[i]);
    const auto t = static_cast<Eigen::Index>(inputs[i].size());
    Eigen::RowVectorXd pooled = c.xf.colwise().mean();
    Eigen::RowVectorXd logits = pooled * p.cls_w + p.cls_b.row(0);
    Eigen::RowVectorXd probs = softmax_row(logits);
    auto y = static_cast<Eigen::Index>(label_idx[i]);
    if (y < 0 || y >= probs.size())
      throw InternalError("label index out of range");
    loss += -std::log(std::max(probs(y), 1e-300)) * inv_n;

    Eigen::RowVectorXd dlogits = probs * inv_n;
    dlogits(y) -= inv_n;
    grads.cls_b.row(0) += dlogits;
    grads.cls_w += pooled.transpose() * dlogits;
    Eigen::RowVectorXd dpooled = dlogits * p.cls_w.transpose();
    Eigen::MatrixXd dxf =
        Eigen::MatrixXd::Ones(t, 1) * (dpooled / static_cast<double>(t));
    backward_seq(cfg, p, c, dxf, grads);
  }
  return loss;
}

double classification_batch_loss(const EncoderModel& model,
                                 const std::vector<std::vector<int>>& inputs,
                                 const std::vector<std::size_t>& label_idx) {
  if (inputs.empty() || inputs.size() != label_idx.size())
    throw InternalError("bad classification batch");
  double loss = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Eigen::RowVectorXd probs = model.classify_row(inputs[i]);
    loss += -std::log(
        std::max(probs(static_cast<Eigen::Index>(label_idx[i])), 1e-300));
  }
  return loss / static_cast<double>(inputs.size());
}

namespace {

// Shared by loss and backward: iterates scored positions of one sequence.
template <typename Fn>
std::size_t for_scored_positions(const std::vector<int>& input,
                                 const std::vector<int>& target, Fn&& fn) {
  if (input.size() != target.size())
    throw InternalError("mlm input/target length mismatch");
  std::size_t n = 0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    if (target[t] < 0) continue;
    fn(t, target[t]);
    ++n;
  }
  return n;
}

void check_target_in_vocab(int target_id, int vocab_size) {
  if (target_id >= vocab_size)
    throw DataError("mlm target id " + std::to_string(target_id) +
                    " outside vocab");
}

}  // namespace

double mlm_batch_backward(const EncoderModel& model,
                          const std::vector<std::vector<int>>& inputs,
                          const std::vector<std::vector<int>>& targets,
                          Params& grads, std::size_t* scored) {
  if (inputs.empty() || inputs.size() != targets.size())
    throw InternalError("bad mlm batch");
  const auto& cfg = model.config();
  const auto& p = model.params();

  // Two passes: scored-position count first so the gradient of the *mean*
  // loss can be accumulated in a single backward sweep.
  std::size_t total = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    total += for_scored_positions(inputs[i], targets[i], [](auto, auto) {});
  if (total == 0) throw DataError("mlm batch has no scored positions");
  const double inv_total = 1.0 / static_cast<double>(total);

  double loss = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    SeqCache c = forward_seq(cfg, p, inputs[i]);
    const auto t = static_cast<Eigen::Index>(inputs[i].size());
    Eigen::MatrixXd dxf = Eigen::MatrixXd::Zero(t, cfg.hidden_dim);
    for_scored_positions(
        inputs[i], targets[i], [&](std::size_t pos, int target_id) {
          check_target_in_vocab(target_id, cfg.vocab_size);
          Eigen::RowVectorXd logits =
              c.xf.row(static_cast<Eigen::Index>(pos)) * p.mlm_w +
              p.mlm_b.row(0);
          Eigen::RowVectorXd probs = softmax_row(logits);
          loss += -std::log(std::max(probs(target_id), 1e-300)) * inv_total;
          Eigen::RowVectorXd dlogits = probs * inv_total;
          dlogits(target_id) -= inv_total;
          grads.mlm_b.row(0) += dlogits;
          grads.mlm_w += c.xf.row(static_cast<Eigen::Index>(pos)).transpose() *
                         dlogits;
          dxf.row(static_cast<Eigen::Index>(pos)) +=
              dlogits * p.mlm_w.transpose();
        });
    backward_seq(cfg, p, c, dxf, grads);
  }
  if (scored) *scored = total;
  return loss;
}

double mlm_batch_loss(const EncoderModel& model,
                      const std::vector<std::vector<int>>& inputs,
                      const std::vector<std::vector<int>>& targets,
                      std::size_t* scored) {
  if (inputs.empty() || inputs.size() != targets.size())
    throw InternalError("bad mlm batch");
  const auto& cfg = model.config();
  const auto& p = model.params();
  std::size_t total = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    SeqCache c = forward_seq(cfg, p, inputs[i]);
    total += for_scored_positions(
        inputs[i], targets[i], [&](std::size_t pos, int target_id) {
          check_target_in_vocab(target_id, cfg.vocab_size);
          Eigen::RowVectorXd logits =
              c.xf.row(static_cast<Eigen::Index>(pos)) * p.mlm_w +
              p.mlm_b.row(0);
          Eigen::RowVectorXd probs = softmax_row(logits);
          sum += -std::log(std::max(probs(target_id), 1e-300));
        });
  }
  if (total == 0) throw DataError("mlm batch has no scored positions");
  if (scored) *scored = total;
  return sum / static_cast<double>(total);
}

}  // namespace olp
