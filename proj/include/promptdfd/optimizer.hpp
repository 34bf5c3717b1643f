// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "promptdfd/numerics.hpp"

namespace dfd {

enum class OptimizerKind { kSgd, kAdam };

OptimizerKind optimizer_from_string(const std::string& s);
std::string to_string(OptimizerKind k);

/// First-order minimizer over a flat parameter vector. Adam state is sized
/// lazily on the first step.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// params -= update(grad)
  void step(Vec& params, const Vec& grad);

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  OptimizerKind kind() const { return kind_; }
  std::size_t steps() const { return t_; }

 private:
  OptimizerKind kind_;
  double lr_, beta1_, beta2_, eps_;
  Vec m_, v_;
  std::size_t t_ = 0;
};

}  // namespace dfd
