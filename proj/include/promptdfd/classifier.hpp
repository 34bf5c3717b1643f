// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "promptdfd/numerics.hpp"
#include "promptdfd/optimizer.hpp"
#include "promptdfd/rng.hpp"
#include "promptdfd/vocab.hpp"
#include "promptdfd/world.hpp"

namespace dfd {

/// Flat gradient aligned with a model's parameter vector.
using GradVector = Vec;

inline constexpr std::size_t kDefaultBuckets = 4096;

/// Multiplicative hash of an ordered token pair into [0, buckets).
std::size_t bigram_bucket(TokenId first, TokenId second, std::size_t buckets);

/// Bag-of-embeddings text classifier with hashed bigram features.
///
///   pooled(x) = mean_i E[x_i] + mean_i B[h(x_i, x_{i+1})]
///   logits(x) = W_out * pooled(x) + bias
///
/// The bigram mean is zero for single-token input. Parameters live in one
/// flat vector laid out as [E | B | W_out | bias], all row-major.
class ClassifierModel {
 public:
  ClassifierModel() = default;
  ClassifierModel(std::size_t vocab_size, std::size_t dim, std::size_t num_classes,
                  std::size_t buckets = kDefaultBuckets);

  /// Gaussian init with standard deviation `scale`.
  static ClassifierModel random(std::size_t vocab_size, std::size_t dim, std::size_t num_classes,
                                RngStream& rng, double scale = 0.1, std::size_t buckets = kDefaultBuckets);

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t dim() const { return dim_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t buckets() const { return buckets_; }
  std::size_t num_params() const { return params_.size(); }

  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  std::size_t embedding_offset(TokenId t) const { return t * dim_; }
  std::size_t bucket_offset(std::size_t b) const { return (vocab_size_ + b) * dim_; }
  std::size_t out_offset(std::size_t c) const { return (vocab_size_ + buckets_) * dim_ + c * dim_; }
  std::size_t bias_offset() const { return (vocab_size_ + buckets_ + num_classes_) * dim_; }

  std::span<const double> embedding(TokenId t) const { return {params_.data() + embedding_offset(t), dim_}; }
  std::span<const double> bucket(std::size_t b) const { return {params_.data() + bucket_offset(b), dim_}; }
  std::span<const double> out_row(std::size_t c) const { return {params_.data() + out_offset(c), dim_}; }
  std::span<const double> bias() const { return {params_.data() + bias_offset(), num_classes_}; }

  Vec pooled(const TokenSeq& x) const;
  Vec logits(const TokenSeq& x) const;

  friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;

 private:
  std::size_t vocab_size_ = 0, dim_ = 0, num_classes_ = 0, buckets_ = 0;
  Vec params_;
};

/// softmax(logits(x)) at temperature 1. Throws InvalidArgument on empty x.
ProbVector classifier_forward(const ClassifierModel& model, const TokenSeq& x);

/// soften(p, tau) = softmax(log p / tau); zero entries stay zero.
ProbVector soften(const ProbVector& p, double tau);

struct KdLoss {
  double loss = 0.0;
  double ce = 0.0;  // alpha-weighted CE term
  double kl = 0.0;  // (1-alpha) tau^2 weighted KL term
};

struct KdLossGrad {
  KdLoss loss;
  GradVector grad;
};

/// alpha * CE(S(x), label) + (1 - alpha) * tau^2 * KL(soften(T, tau) || soften(S, tau)).
/// With alpha == 0 the CE term is skipped entirely (label is ignored).
KdLoss classifier_kd_loss(const ClassifierModel& student, const TokenSeq& x, const ProbVector& teacher_probs,
                          std::size_t pseudo_label, double alpha, double tau);

/// Loss and analytic gradient with respect to every student parameter.
KdLossGrad classifier_kd_grad(const ClassifierModel& student, const TokenSeq& x, const ProbVector& teacher_probs,
                              std::size_t pseudo_label, double alpha, double tau);

/// Adds `scale` times the KD gradient into `grad` (sized num_params) and
/// returns the loss. Touches only rows used by x.
KdLoss accumulate_kd_grad(const ClassifierModel& student, const TokenSeq& x, const ProbVector& teacher_probs,
                          std::size_t pseudo_label, double alpha, double tau, GradVector& grad, double scale = 1.0);

/// Plain cross-entropy -log S(x)[label] and its gradient.
KdLossGrad classifier_ce_grad(const ClassifierModel& model, const TokenSeq& x, std::size_t label);

struct SupervisedOptions {
  std::size_t epochs = 10;
  double lr = 0.05;
  std::size_t batch = 32;
  OptimizerKind optimizer = OptimizerKind::kAdam;
};

struct SupervisedLog {
  std::vector<double> epoch_loss;
};

/// Mini-batch CE training on labeled data. Deterministic given rng.
SupervisedLog train_classifier_supervised(ClassifierModel& model, const std::vector<LabeledExample>& data,
                                          const SupervisedOptions& opts, RngStream& rng);

/// Student whose every d-indexed table keeps the teacher's first d_s dims.
ClassifierModel init_student_from_teacher(const ClassifierModel& teacher, std::size_t student_dim);

}  // namespace dfd
