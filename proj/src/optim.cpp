// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#include "optim.hpp"

#include <cmath>

#include "error.hpp"

namespace olp {

void Adam::step(Params& params, const Params& grads, double grad_clip) {
  auto pr = tensor_refs(params);
  auto gr = tensor_refs(const_cast<Params&>(grads));
  auto mr = tensor_refs(m_);
  auto vr = tensor_refs(v_);
  if (pr.size() != gr.size() || pr.size() != mr.size())
    throw InternalError("optimizer/tensor shape mismatch");

  double scale = 1.0;
  if (grad_clip > 0.0) {
    double sq = 0.0;
    for (auto& g : gr) sq += g.mat->squaredNorm();
    double norm = std::sqrt(sq);
    if (norm > grad_clip) scale = grad_clip / norm;
  }

  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));

  for (std::size_t i = 0; i < pr.size(); ++i) {
    auto& p = *pr[i].mat;
    auto g = (gr[i].mat->array() * scale).eval();
    auto& m = *mr[i].mat;
    auto& v = *vr[i].mat;
    m = beta1_ * m.array() + (1.0 - beta1_) * g;
    v = beta2_ * v.array() + (1.0 - beta2_) * g.square();
    p.array() -=
        lr_ * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps_);
  }
}

}  // namespace olp
