// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0
//
// Stage orchestration: preprocess -> pretrain-mlm -> finetune -> ensemble ->
// evaluate/report. Stages communicate only through files; every run
// materializes its resolved config into the output directory before doing
// any work, and that dump alone is sufficient to replay the stage.

#ifndef OLP_PIPELINE_HPP_
#define OLP_PIPELINE_HPP_

#include <string>
#include <vector>

#include "config.hpp"

namespace olp {

inline constexpr const char* kSeedEnvVar = "OFFENSE_PIPELINE_SEED";

const std::vector<std::string>& stage_names();

// Applies stage defaults under the user config and the OFFENSE_PIPELINE_SEED
// override on top of it.
KvConfig resolve_stage_config(const KvConfig& user, const std::string& stage);

// Resolves, writes <out>/resolved_config.kv, runs the stage. Throws Error
// subclasses on failure.
void run_stage(const KvConfig& user, const std::string& stage);

}  // namespace olp

#endif  // OLP_PIPELINE_HPP_
