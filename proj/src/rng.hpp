// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#ifndef OLP_RNG_HPP_
#define OLP_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace olp {

// Derives a stream seed from a base seed and a purpose tag, e.g.
// derive_seed(seed, "finetune/shuffle/epoch3"). One global seed fans out to
// every randomized stage without the streams overlapping.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);

// Deterministic RNG wrapper. All sampling helpers are implemented here
// rather than with std::*_distribution so that outputs are identical across
// standard libraries (std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n), unbiased via rejection. n must be > 0.
  std::size_t next_below(std::size_t n);

  // Standard normal via Box-Muller.
  double next_gaussian();

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = next_below(i + 1);
      std::swap(v[i], v[j]);
    }
  }

  // k distinct indices from [0, n), returned in ascending order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace olp

#endif  // OLP_RNG_HPP_
