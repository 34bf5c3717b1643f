// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "promptdfd/errors.hpp"

namespace dfd {

ProbVector::ProbVector(Vec values) : values_(std::move(values)) {
  if (!is_valid(values_)) throw InvalidArgument("ProbVector: entries must be >= 0 and sum to 1");
}

ProbVector ProbVector::trusted(Vec values) {
  ProbVector p;
  p.values_ = std::move(values);
  return p;
}

bool ProbVector::is_valid(std::span<const double> v) {
  if (v.empty()) return false;
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= kSumTolerance;
}

std::size_t ProbVector::argmax() const {
  return static_cast<std::size_t>(std::max_element(values_.begin(), values_.end()) - values_.begin());
}

namespace {
void check_logits(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw InvalidArgument("softmax: temperature must be a positive finite number");
  if (logits.empty()) throw InvalidArgument("softmax: empty logits");
  for (double z : logits)
    if (!std::isfinite(z)) throw InvalidArgument("softmax: non-finite logit");
}
}  // namespace

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

ProbVector softmax(std::span<const double> logits, double temperature) {
  check_logits(logits, temperature);
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp((logits[i] - m) / temperature);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return ProbVector::trusted(std::move(out));
}

Vec log_softmax(std::span<const double> logits, double temperature) {
  check_logits(logits, temperature);
  Vec scaled(logits.begin(), logits.end());
  for (double& z : scaled) z /= temperature;
  const double lse = log_sum_exp(scaled);
  for (double& z : scaled) z -= lse;
  return scaled;
}

double kl_divergence(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) throw InvalidArgument("kl_divergence: length mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0)
      throw DivergenceUndefined("kl_divergence: p[" + std::to_string(i) + "] > 0 where q is 0");
    kl += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can leave a tiny negative value for p ~= q.
  return std::max(kl, 0.0);
}

double cross_entropy(const ProbVector& probs, std::size_t label) {
  if (label >= probs.size()) throw InvalidArgument("cross_entropy: label out of range");
  if (probs[label] <= 0.0)
    throw InfiniteLoss("cross_entropy: probability of label " + std::to_string(label) + " is zero");
  return -std::log(probs[label]);
}

Vec finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                     std::span<const double> params, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("finite_diff_grad: eps must be positive");
  Vec x(params.begin(), params.end());
  Vec grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double up = f(x);
    x[i] = saved - eps;
    const double down = f(x);
    x[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NonFiniteError("finite_diff_grad: non-finite value at coordinate " + std::to_string(i));
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

std::size_t sample_categorical(std::span<const double> dist, RngStream& rng) {
  double total = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("sample_categorical: invalid entry");
    total += p;
  }
  if (total <= 0.0) throw InvalidArgument("sample_categorical: all-zero distribution");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    acc += dist[i];
    last_nonzero = i;
    if (u < acc) return i;
  }
  return last_nonzero;
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw InvalidArgument("relative_error: length mismatch");
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nb), floor);
}

}  // namespace dfd
