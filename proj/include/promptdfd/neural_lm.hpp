// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include "promptdfd/classifier.hpp"
#include "promptdfd/numerics.hpp"
#include "promptdfd/rng.hpp"
#include "promptdfd/vocab.hpp"

namespace dfd {

/// Small trainable next-token model used as the topic prompter.
///
/// The context is <bos>-prefixed. With e = embedding of the last token and
/// m = mean embedding of the last `window` tokens,
///
///   logit_v = U[v] . e + Vw[v] . m + bias[v]      (v != <pad>)
///
/// and <pad> is masked out. Parameters: [E | U | Vw | bias].
class NeuralLM {
 public:
  NeuralLM() = default;
  NeuralLM(std::size_t vocab_size, std::size_t dim = 16, std::size_t window = 4);

  static NeuralLM random(std::size_t vocab_size, RngStream& rng, std::size_t dim = 16, std::size_t window = 4,
                         double scale = 0.1);

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t dim() const { return dim_; }
  std::size_t window() const { return window_; }
  std::size_t num_params() const { return params_.size(); }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  /// Logits over the vocabulary; the <pad> entry is -inf.
  Vec logits(const TokenSeq& context) const;
  /// Log-probabilities; the <pad> entry is -inf.
  Vec log_probs(const TokenSeq& context) const;
  ProbVector next_dist(const TokenSeq& context) const;

  /// grad += J^T dlogits, where J = d logits / d params at `context`.
  /// The <pad> entry of dlogits is ignored.
  void backward(const TokenSeq& context, std::span<const double> dlogits, GradVector& grad) const;

  friend bool operator==(const NeuralLM&, const NeuralLM&) = default;

 private:
  struct Features {
    TokenId last;
    std::vector<TokenId> window;
    Vec e, m;
  };
  Features features(const TokenSeq& context) const;
  std::size_t emb(TokenId t) const { return t * dim_; }
  std::size_t u(std::size_t v) const { return (vocab_size_ + v) * dim_; }
  std::size_t vw(std::size_t v) const { return (2 * vocab_size_ + v) * dim_; }
  std::size_t bias(std::size_t v) const { return 3 * vocab_size_ * dim_ + v; }

  std::size_t vocab_size_ = 0, dim_ = 0, window_ = 0;
  Vec params_;
};

struct LogProbGrad {
  double logprob = 0.0;
  GradVector grad;
};

/// log Pr(action | context) and its gradient. Throws InvalidArgument for an
/// action with zero probability (<pad>) or out of range.
LogProbGrad lm_logprob_grad(const NeuralLM& lm, const TokenSeq& context, TokenId action);

}  // namespace dfd
