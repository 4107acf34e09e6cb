/* Copyright 2026 The olp authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * olp - offensive language pipeline.
 *
 * C API over the training/ensembling/evaluation core. Handles are opaque;
 * every fallible call returns an olp_status and leaves a human-readable
 * message in thread-local storage, retrievable via olp_last_error().
 *
 * The pipeline is driven by a key-value configuration (see README for the
 * key reference). A typical embedding:
 *
 *   olp_config* cfg = olp_config_new();
 *   olp_config_set(cfg, "data.weak_corpus", "tweets.tsv");
 *   olp_config_set(cfg, "out", "runs/pre");
 *   if (olp_run_stage(cfg, "preprocess") != OLP_OK)
 *     fprintf(stderr, "%s\n", olp_last_error());
 *   olp_config_free(cfg);
 */

#ifndef OLP_H
#define OLP_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum olp_status {
  OLP_OK = 0,
  OLP_E_USAGE = 1,    /* invalid arguments or configuration */
  OLP_E_DATA = 2,     /* malformed or inconsistent input data */
  OLP_E_IO = 3,       /* filesystem failure */
  OLP_E_INTERNAL = 4  /* library invariant violation */
} olp_status;

typedef struct olp_config olp_config;
typedef struct olp_encoder olp_encoder;

/* Library version, e.g. "0.1.0". */
const char* olp_version(void);

/* Message for the most recent failure on this thread; empty string if the
 * last call succeeded. The pointer stays valid until the next olp call on
 * the same thread. */
const char* olp_last_error(void);

/* --- configuration ----------------------------------------------------- */

olp_config* olp_config_new(void);
void olp_config_free(olp_config* cfg);

/* Layered `key = value` file; later assignments (and later calls) win. */
olp_status olp_config_load_file(olp_config* cfg, const char* path);
olp_status olp_config_set(olp_config* cfg, const char* key, const char* value);

/* Copies the value for key into buf (NUL-terminated, truncated to cap).
 * Returns OLP_E_USAGE when the key is absent. */
olp_status olp_config_get(const olp_config* cfg, const char* key, char* buf,
                          size_t cap);

/* --- pipeline stages ---------------------------------------------------- */

/* stage: "preprocess" | "pretrain-mlm" | "finetune" | "ensemble" |
 * "evaluate" | "report". Writes <out>/resolved_config.kv before any work;
 * outputs are deterministic functions of the resolved config. */
olp_status olp_run_stage(const olp_config* cfg, const char* stage);

/* --- checkpoint inference ---------------------------------------------- */

/* Opens a saved encoder checkpoint. NULL on failure (see olp_last_error). */
olp_encoder* olp_encoder_open(const char* checkpoint_path);
void olp_encoder_close(olp_encoder* enc);

/* Classifies one text under task "A", "B" or "C". Writes the probability
 * vector in the task's canonical label order into probs (up to probs_cap
 * entries; the task's label count goes to *n_labels) and the predicted
 * label into label_buf. */
olp_status olp_encoder_classify(const olp_encoder* enc, const char* text,
                                const char* task, double* probs,
                                size_t probs_cap, size_t* n_labels,
                                char* label_buf, size_t label_cap);

#ifdef __cplusplus
}
#endif

#endif /* OLP_H */
