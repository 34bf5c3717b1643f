// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/optimizer.hpp"

#include <cmath>

#include "promptdfd/errors.hpp"

namespace dfd {

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw InvalidArgument("unknown optimizer '" + s + "' (expected sgd or adam)");
}

std::string to_string(OptimizerKind k) { return k == OptimizerKind::kSgd ? "sgd" : "adam"; }

Optimizer::Optimizer(OptimizerKind kind, double lr, double beta1, double beta2, double eps)
    : kind_(kind), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr >= 0.0)) throw InvalidArgument("optimizer: lr must be >= 0");
}

void Optimizer::step(Vec& params, const Vec& grad) {
  if (grad.size() != params.size()) throw InvalidArgument("optimizer: gradient size mismatch");
  ++t_;
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
    return;
  }
  if (m_.size() != params.size()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

}  // namespace dfd
