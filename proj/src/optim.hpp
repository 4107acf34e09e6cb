// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#ifndef OLP_OPTIM_HPP_
#define OLP_OPTIM_HPP_

#include "encoder.hpp"

namespace olp {

// Adaptive-moment gradient descent with a fixed learning rate (no warmup or
// decay schedule; schedules are a config-level extension, not implemented).
class Adam {
 public:
  Adam(const Params& shape, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8)
      : m_(zeros_like(shape)),
        v_(zeros_like(shape)),
        lr_(lr),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps) {}

  // One update from accumulated gradients. grad_clip > 0 rescales the
  // global gradient norm to at most grad_clip before the moment updates.
  void step(Params& params, const Params& grads, double grad_clip = 0.0);

 private:
  Params m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
};

}  // namespace olp

#endif  // OLP_OPTIM_HPP_
