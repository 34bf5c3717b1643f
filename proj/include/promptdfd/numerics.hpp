// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "promptdfd/rng.hpp"

namespace dfd {

using Vec = std::vector<double>;

/// A categorical distribution: nonnegative entries summing to 1 (within 1e-9).
class ProbVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  ProbVector() = default;
  /// Validates the invariants; throws InvalidArgument on violation.
  explicit ProbVector(Vec values);

  /// Skips validation. For values that are normalized by construction.
  static ProbVector trusted(Vec values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const Vec& values() const { return values_; }
  std::span<const double> span() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  /// Index of the largest entry; ties go to the lowest index.
  std::size_t argmax() const;

  static bool is_valid(std::span<const double> v);

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  Vec values_;
};

/// softmax(logits / temperature), max-subtracted.
ProbVector softmax(std::span<const double> logits, double temperature = 1.0);

/// log softmax(logits / temperature); finite for finite input.
Vec log_softmax(std::span<const double> logits, double temperature = 1.0);

/// Sum_i p_i log(p_i / q_i), with 0 log(0/q) = 0.
double kl_divergence(const ProbVector& p, const ProbVector& q);

/// -log probs[label].
double cross_entropy(const ProbVector& probs, std::size_t label);

/// Central-difference gradient of `f` at `params`.
Vec finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                     std::span<const double> params, double eps = 1e-5);

/// Draws index i with probability dist[i].
std::size_t sample_categorical(std::span<const double> dist, RngStream& rng);
inline std::size_t sample_categorical(const ProbVector& dist, RngStream& rng) {
  return sample_categorical(dist.span(), rng);
}

/// ||a - b|| / max(||a|| + ||b||, floor). Used by every gradient check.
double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-12);

/// log(sum(exp(v))), max-subtracted.
double log_sum_exp(std::span<const double> v);

}  // namespace dfd
