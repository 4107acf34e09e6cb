// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#ifndef OLP_CHECKPOINT_HPP_
#define OLP_CHECKPOINT_HPP_

#include <filesystem>

#include "encoder.hpp"

namespace olp {

// Self-describing binary container: config header plus named weight arrays.
// The exact byte layout is internal; the contract is that
// save -> load -> identical outputs, bit for bit.
void save_checkpoint(const std::filesystem::path& path,
                     const EncoderModel& model);
EncoderModel load_checkpoint(const std::filesystem::path& path);

}  // namespace olp

#endif  // OLP_CHECKPOINT_HPP_
