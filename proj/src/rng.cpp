// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/rng.hpp"

#include <cmath>
#include <numbers>

#include "promptdfd/errors.hpp"

namespace dfd {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t derive_key(std::uint64_t seed, const std::vector<std::uint64_t>& path) {
  std::uint64_t k = mix64(seed ^ 0x6A09E667F3BCC908ULL);
  for (std::uint64_t p : path) k = mix64(k ^ mix64(p + kGolden));
  return k;
}
}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::vector<std::uint64_t> path)
    : seed_(seed), path_(std::move(path)), key_(derive_key(seed_, path_)) {}

RngStream RngStream::derive(std::uint64_t key) const {
  auto p = path_;
  p.push_back(key);
  return RngStream(seed_, std::move(p));
}

RngStream RngStream::derive(std::initializer_list<std::uint64_t> keys) const {
  auto p = path_;
  p.insert(p.end(), keys.begin(), keys.end());
  return RngStream(seed_, std::move(p));
}

std::uint64_t RngStream::next_u64() { return mix64(key_ + kGolden * ++counter_); }

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("uniform_int: n must be positive");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

std::int64_t RngStream::uniform_range(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw InvalidArgument("uniform_range: hi < lo");
  return lo + static_cast<std::int64_t>(uniform_int(static_cast<std::uint64_t>(hi - lo) + 1));
}

double RngStream::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dfd
