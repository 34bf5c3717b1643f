// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace dfd {

/// Counter-based, splittable random stream.
///
/// A stream is identified by a 64-bit seed plus a hierarchical path of
/// derivation keys (seed -> epoch -> batch -> prefix ...). The n-th draw is a
/// pure function of (seed, path, n), so identical streams produce identical
/// sequences on every platform and children derived for parallel work
/// reproduce the sequential result.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0, std::vector<std::uint64_t> path = {});

  /// Child stream at `path + {key}`; does not advance this stream.
  RngStream derive(std::uint64_t key) const;
  RngStream derive(std::initializer_list<std::uint64_t> keys) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);
  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_range(std::int64_t lo, std::int64_t hi);
  /// Standard normal (Box-Muller, one value per call).
  double normal();

  std::uint64_t seed() const { return seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }
  std::uint64_t counter() const { return counter_; }
  /// Restores a position previously read from counter().
  void set_counter(std::uint64_t c) { counter_ = c; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace dfd
