// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "promptdfd/classifier.hpp"
#include "promptdfd/optimizer.hpp"
#include "promptdfd/rng.hpp"
#include "promptdfd/vocab.hpp"
#include "promptdfd/world.hpp"

namespace dfd {

/// Distillation hyperparameters.
struct KDConfig {
  double alpha = 0.5;
  double tau = 1.0;
  double lr = 0.01;
  std::size_t batch = 128;
  std::size_t epochs = 10;
  OptimizerKind optimizer = OptimizerKind::kSgd;

  void validate() const;
};

/// One row of a training log.
struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double dev_accuracy = 0.0;
  double agreement = 0.0;
};

/// Optional held-out set evaluated after every epoch.
struct EvalHook {
  const ClassifierModel* teacher = nullptr;
  const std::vector<LabeledExample>* dev = nullptr;
};

/// Per-example loss, gradient and pseudo-label for a batch, averaged.
struct BatchGrad {
  double mean_loss = 0.0;
  GradVector grad;
};

/// Mean KD loss and gradient over `batch`, with teacher outputs computed
/// fresh and pseudo-label = argmax of the teacher's probabilities.
BatchGrad kd_batch_grad(const ClassifierModel& student, const std::vector<TokenSeq>& batch,
                        const ClassifierModel& teacher, const KDConfig& cfg);

/// One optimizer step on the batch-mean KD loss. Returns the mean loss
/// evaluated before the step.
double student_step(ClassifierModel& student, const std::vector<TokenSeq>& batch, const ClassifierModel& teacher,
                    const KDConfig& cfg, Optimizer& opt);

/// cfg.epochs passes of shuffled mini-batch student_step over `corpus`.
std::vector<EpochLog> distill_with_corpus(ClassifierModel& student, const ClassifierModel& teacher,
                                          const std::vector<TokenSeq>& corpus, const KDConfig& cfg, RngStream& rng,
                                          const EvalHook& eval = {});

/// n sequences of i.i.d. uniform non-reserved tokens, lengths uniform in
/// [min_len, max_len].
std::vector<TokenSeq> random_text_corpus(const Vocab& vocab, std::size_t n, std::size_t min_len, std::size_t max_len,
                                         RngStream& rng);

EpochLog evaluate_epoch(std::size_t epoch, double loss, const ClassifierModel& student, const EvalHook& eval);

}  // namespace dfd
