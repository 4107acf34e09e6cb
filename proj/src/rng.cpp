// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#include "rng.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace olp {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  std::uint64_t state = base ^ fnv1a64(tag);
  splitmix64(state);
  return splitmix64(state);
}

std::size_t Rng::next_below(std::size_t n) {
  if (n == 0) throw InternalError("Rng::next_below: n must be > 0");
  // Rejection sampling over the largest multiple of n below 2^64.
  std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > bound);
  return static_cast<std::size_t>(x % n);
}

double Rng::next_gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = next_unit();
  } while (u1 <= 0.0);
  u2 = next_unit();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k) {
  if (k > n) throw InternalError("Rng::sample_indices: k > n");
  // Selection sampling (Knuth 3.4.2 S): single pass, ascending output.
  std::vector<std::size_t> out;
  out.reserve(k);
  std::size_t remaining = k;
  for (std::size_t i = 0; i < n && remaining > 0; ++i) {
    std::size_t left = n - i;
    if (next_below(left) < remaining) {
      out.push_back(i);
      --remaining;
    }
  }
  return out;
}

}  // namespace olp
