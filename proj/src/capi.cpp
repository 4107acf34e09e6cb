// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#include "olp.h"

#include <cstring>
#include <string>

#include "checkpoint.hpp"
#include "config.hpp"
#include "error.hpp"
#include "finetune.hpp"
#include "pipeline.hpp"

namespace {

thread_local std::string g_last_error;

olp_status fail(olp_status code, const char* what) {
  g_last_error = what ? what : "unknown error";
  return code;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
olp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return OLP_OK;
  } catch (const olp::UsageError& e) {
    return fail(OLP_E_USAGE, e.what());
  } catch (const olp::DataError& e) {
    return fail(OLP_E_DATA, e.what());
  } catch (const olp::IoError& e) {
    return fail(OLP_E_IO, e.what());
  } catch (const std::exception& e) {
    return fail(OLP_E_INTERNAL, e.what());
  } catch (...) {
    return fail(OLP_E_INTERNAL, "unknown exception");
  }
}

void copy_out(const std::string& s, char* buf, size_t cap) {
  if (!buf || cap == 0) return;
  size_t n = std::min(s.size(), cap - 1);
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

}  // namespace

struct olp_config {
  olp::KvConfig cfg;
};

struct olp_encoder {
  olp::EncoderModel model;
};

extern "C" {

const char* olp_version(void) { return "0.1.0"; }

const char* olp_last_error(void) { return g_last_error.c_str(); }

olp_config* olp_config_new(void) { return new (std::nothrow) olp_config(); }

void olp_config_free(olp_config* cfg) { delete cfg; }

olp_status olp_config_load_file(olp_config* cfg, const char* path) {
  if (!cfg || !path) return fail(OLP_E_USAGE, "null argument");
  return guarded([&] { cfg->cfg.load_file(path); });
}

olp_status olp_config_set(olp_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(OLP_E_USAGE, "null argument");
  return guarded([&] { cfg->cfg.set(key, value); });
}

olp_status olp_config_get(const olp_config* cfg, const char* key, char* buf,
                          size_t cap) {
  if (!cfg || !key) return fail(OLP_E_USAGE, "null argument");
  return guarded([&] { copy_out(cfg->cfg.get(key), buf, cap); });
}

olp_status olp_run_stage(const olp_config* cfg, const char* stage) {
  if (!cfg || !stage) return fail(OLP_E_USAGE, "null argument");
  return guarded([&] { olp::run_stage(cfg->cfg, stage); });
}

olp_encoder* olp_encoder_open(const char* checkpoint_path) {
  if (!checkpoint_path) {
    fail(OLP_E_USAGE, "null checkpoint path");
    return nullptr;
  }
  olp_encoder* enc = nullptr;
  auto status = guarded([&] {
    enc = new olp_encoder{olp::load_checkpoint(checkpoint_path)};
  });
  if (status != OLP_OK) {
    delete enc;
    return nullptr;
  }
  return enc;
}

void olp_encoder_close(olp_encoder* enc) { delete enc; }

olp_status olp_encoder_classify(const olp_encoder* enc, const char* text,
                                const char* task, double* probs,
                                size_t probs_cap, size_t* n_labels,
                                char* label_buf, size_t label_cap) {
  if (!enc || !text || !task) return fail(OLP_E_USAGE, "null argument");
  return guarded([&] {
    auto spec = olp::TaskSpec::parse(task);
    auto set = olp::predict_texts(enc->model, {{"0", text}}, spec,
                                  enc->model.config().max_positions);
    const auto& row = set.rows.at(0);
    if (n_labels) *n_labels = spec.num_labels();
    if (probs) {
      if (probs_cap < spec.num_labels())
        throw olp::UsageError("probs buffer too small: need " +
                              std::to_string(spec.num_labels()) + " entries");
      for (std::size_t i = 0; i < spec.num_labels(); ++i) probs[i] = row.probs[i];
    }
    copy_out(row.label, label_buf, label_cap);
  });
}

}  // extern "C"
