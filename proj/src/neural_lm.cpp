// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/neural_lm.hpp"

#include <cmath>

#include "promptdfd/errors.hpp"

namespace dfd {

NeuralLM::NeuralLM(std::size_t vocab_size, std::size_t dim, std::size_t window)
    : vocab_size_(vocab_size), dim_(dim), window_(window) {
  if (vocab_size <= kNumReserved || dim == 0 || window == 0)
    throw InvalidArgument("NeuralLM: vocab must exceed the reserved ids; dim and window must be positive");
  params_.assign(3 * vocab_size * dim + vocab_size, 0.0);
}

NeuralLM NeuralLM::random(std::size_t vocab_size, RngStream& rng, std::size_t dim, std::size_t window, double scale) {
  NeuralLM lm(vocab_size, dim, window);
  for (std::size_t i = 0; i < lm.bias(0); ++i) lm.params_[i] = scale * rng.normal();
  return lm;
}

NeuralLM::Features NeuralLM::features(const TokenSeq& context) const {
  Features f;
  const std::size_t total = context.size() + 1;  // with <bos>
  const std::size_t w = std::min(window_, total);
  for (std::size_t i = total - w; i < total; ++i) {
    const TokenId t = i == 0 ? kBos : context[i - 1];
    if (t >= vocab_size_) throw InvalidArgument("NeuralLM: token id out of range");
    f.window.push_back(t);
  }
  f.last = f.window.back();
  f.e.assign(params_.begin() + static_cast<std::ptrdiff_t>(emb(f.last)),
             params_.begin() + static_cast<std::ptrdiff_t>(emb(f.last) + dim_));
  f.m.assign(dim_, 0.0);
  const double inv = 1.0 / static_cast<double>(f.window.size());
  for (TokenId t : f.window)
    for (std::size_t k = 0; k < dim_; ++k) f.m[k] += inv * params_[emb(t) + k];
  return f;
}

Vec NeuralLM::logits(const TokenSeq& context) const {
  const Features f = features(context);
  Vec z(vocab_size_);
  for (std::size_t v = 0; v < vocab_size_; ++v) {
    if (v == kPad) {
      z[v] = -INFINITY;
      continue;
    }
    double acc = params_[bias(v)];
    const double* uu = params_.data() + u(v);
    const double* ww = params_.data() + vw(v);
    for (std::size_t k = 0; k < dim_; ++k) acc += uu[k] * f.e[k] + ww[k] * f.m[k];
    z[v] = acc;
  }
  return z;
}

Vec NeuralLM::log_probs(const TokenSeq& context) const {
  Vec z = logits(context);
  const std::span<const double> valid(z.data() + 1, z.size() - 1);  // kPad == 0
  const double lse = log_sum_exp(valid);
  for (std::size_t v = 1; v < z.size(); ++v) z[v] -= lse;
  return z;
}

ProbVector NeuralLM::next_dist(const TokenSeq& context) const {
  Vec lp = log_probs(context);
  for (double& x : lp) x = std::exp(x);
  return ProbVector::trusted(std::move(lp));
}

void NeuralLM::backward(const TokenSeq& context, std::span<const double> dlogits, GradVector& grad) const {
  if (dlogits.size() != vocab_size_ || grad.size() != params_.size())
    throw InvalidArgument("NeuralLM::backward: size mismatch");
  const Features f = features(context);
  Vec de(dim_, 0.0), dm(dim_, 0.0);
  for (std::size_t v = 1; v < vocab_size_; ++v) {
    const double g = dlogits[v];
    if (g == 0.0) continue;
    const double* uu = params_.data() + u(v);
    const double* ww = params_.data() + vw(v);
    double* gu = grad.data() + u(v);
    double* gw = grad.data() + vw(v);
    for (std::size_t k = 0; k < dim_; ++k) {
      gu[k] += g * f.e[k];
      gw[k] += g * f.m[k];
      de[k] += g * uu[k];
      dm[k] += g * ww[k];
    }
    grad[bias(v)] += g;
  }
  for (std::size_t k = 0; k < dim_; ++k) grad[emb(f.last) + k] += de[k];
  const double inv = 1.0 / static_cast<double>(f.window.size());
  for (TokenId t : f.window)
    for (std::size_t k = 0; k < dim_; ++k) grad[emb(t) + k] += inv * dm[k];
}

LogProbGrad lm_logprob_grad(const NeuralLM& lm, const TokenSeq& context, TokenId action) {
  if (action >= lm.vocab_size()) throw InvalidArgument("lm_logprob_grad: action out of range");
  if (action == kPad) throw InvalidArgument("lm_logprob_grad: <pad> has zero probability");
  const Vec lp = lm.log_probs(context);
  LogProbGrad out;
  out.logprob = lp[action];
  Vec dz(lm.vocab_size(), 0.0);
  for (std::size_t v = 1; v < dz.size(); ++v) dz[v] = (v == action ? 1.0 : 0.0) - std::exp(lp[v]);
  out.grad.assign(lm.num_params(), 0.0);
  lm.backward(context, dz, out.grad);
  return out;
}

}  // namespace dfd
