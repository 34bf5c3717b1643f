// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/kd.hpp"

#include <cmath>
#include <numeric>

#include "promptdfd/errors.hpp"
#include "promptdfd/eval.hpp"

namespace dfd {

void KDConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("kd: alpha must be in [0,1]");
  if (!(tau > 0.0)) throw InvalidArgument("kd: tau must be > 0");
  if (!(lr >= 0.0)) throw InvalidArgument("kd: lr must be >= 0");
  if (batch < 1) throw InvalidArgument("kd: batch must be >= 1");
}

BatchGrad kd_batch_grad(const ClassifierModel& student, const std::vector<TokenSeq>& batch,
                        const ClassifierModel& teacher, const KDConfig& cfg) {
  if (batch.empty()) throw InvalidArgument("student_step: empty batch");
  BatchGrad out;
  out.grad.assign(student.num_params(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& x : batch) {
    const ProbVector t = classifier_forward(teacher, x);
    const KdLoss l = accumulate_kd_grad(student, x, t, t.argmax(), cfg.alpha, cfg.tau, out.grad, scale);
    out.mean_loss += scale * l.loss;
  }
  if (!std::isfinite(out.mean_loss)) throw NonFiniteError("student_step: non-finite batch loss");
  return out;
}

double student_step(ClassifierModel& student, const std::vector<TokenSeq>& batch, const ClassifierModel& teacher,
                    const KDConfig& cfg, Optimizer& opt) {
  const BatchGrad g = kd_batch_grad(student, batch, teacher, cfg);
  opt.step(student.params(), g.grad);
  return g.mean_loss;
}

EpochLog evaluate_epoch(std::size_t epoch, double loss, const ClassifierModel& student, const EvalHook& eval) {
  EpochLog row{epoch, loss, 0.0, 0.0};
  if (eval.dev && !eval.dev->empty()) {
    row.dev_accuracy = accuracy(student, *eval.dev);
    if (eval.teacher) row.agreement = agreement(*eval.teacher, student, *eval.dev);
  }
  return row;
}

std::vector<EpochLog> distill_with_corpus(ClassifierModel& student, const ClassifierModel& teacher,
                                          const std::vector<TokenSeq>& corpus, const KDConfig& cfg, RngStream& rng,
                                          const EvalHook& eval) {
  cfg.validate();
  if (corpus.empty()) throw InvalidArgument("distill_with_corpus: empty corpus");
  Optimizer opt(cfg.optimizer, cfg.lr);
  std::vector<EpochLog> log;
  std::vector<std::size_t> order(corpus.size());
  std::vector<TokenSeq> batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);
    double loss_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      batch.clear();
      for (std::size_t j = start; j < end; ++j) batch.push_back(corpus[order[j]]);
      loss_sum += student_step(student, batch, teacher, cfg, opt);
      ++steps;
    }
    log.push_back(evaluate_epoch(epoch + 1, loss_sum / static_cast<double>(steps), student, eval));
  }
  return log;
}

std::vector<TokenSeq> random_text_corpus(const Vocab& vocab, std::size_t n, std::size_t min_len, std::size_t max_len,
                                         RngStream& rng) {
  if (n == 0) throw InvalidArgument("random_text_corpus: n must be >= 1");
  if (min_len < 1 || max_len < min_len || max_len > kMaxLen)
    throw InvalidArgument("random_text_corpus: bad length range");
  if (vocab.size() <= kNumReserved) throw InvalidArgument("random_text_corpus: vocabulary has no content tokens");
  const std::uint64_t content = vocab.size() - kNumReserved;
  std::vector<TokenSeq> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto len = static_cast<std::size_t>(
        rng.uniform_range(static_cast<std::int64_t>(min_len), static_cast<std::int64_t>(max_len)));
    TokenSeq seq(len);
    for (auto& t : seq) t = static_cast<TokenId>(kNumReserved + rng.uniform_int(content));
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace dfd
