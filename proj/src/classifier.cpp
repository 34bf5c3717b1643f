// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "promptdfd/errors.hpp"

namespace dfd {

std::size_t bigram_bucket(TokenId first, TokenId second, std::size_t buckets) {
  const std::uint64_t key = (static_cast<std::uint64_t>(first) << 32) | second;
  return static_cast<std::size_t>(((key * 0x9E3779B97F4A7C15ULL) >> 32) % buckets);
}

ClassifierModel::ClassifierModel(std::size_t vocab_size, std::size_t dim, std::size_t num_classes,
                                 std::size_t buckets)
    : vocab_size_(vocab_size), dim_(dim), num_classes_(num_classes), buckets_(buckets) {
  if (vocab_size == 0 || dim == 0 || num_classes < 2 || buckets == 0)
    throw InvalidArgument("ClassifierModel: sizes must be positive and num_classes >= 2");
  params_.assign((vocab_size + buckets + num_classes) * dim + num_classes, 0.0);
}

ClassifierModel ClassifierModel::random(std::size_t vocab_size, std::size_t dim, std::size_t num_classes,
                                        RngStream& rng, double scale, std::size_t buckets) {
  ClassifierModel m(vocab_size, dim, num_classes, buckets);
  for (std::size_t i = 0; i < m.bias_offset(); ++i) m.params_[i] = scale * rng.normal();
  return m;
}

Vec ClassifierModel::pooled(const TokenSeq& x) const {
  if (x.empty()) throw InvalidArgument("classifier: empty sequence");
  Vec p(dim_, 0.0);
  const double inv_uni = 1.0 / static_cast<double>(x.size());
  for (TokenId t : x) {
    if (t >= vocab_size_) throw InvalidArgument("classifier: token id out of range");
    const double* e = params_.data() + embedding_offset(t);
    for (std::size_t k = 0; k < dim_; ++k) p[k] += inv_uni * e[k];
  }
  if (x.size() > 1) {
    const double inv_bi = 1.0 / static_cast<double>(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const double* b = params_.data() + bucket_offset(bigram_bucket(x[i], x[i + 1], buckets_));
      for (std::size_t k = 0; k < dim_; ++k) p[k] += inv_bi * b[k];
    }
  }
  return p;
}

Vec ClassifierModel::logits(const TokenSeq& x) const {
  const Vec p = pooled(x);
  Vec z(num_classes_);
  for (std::size_t c = 0; c < num_classes_; ++c) {
    const double* w = params_.data() + out_offset(c);
    double acc = params_[bias_offset() + c];
    for (std::size_t k = 0; k < dim_; ++k) acc += w[k] * p[k];
    z[c] = acc;
  }
  return z;
}

ProbVector classifier_forward(const ClassifierModel& model, const TokenSeq& x) { return softmax(model.logits(x)); }

ProbVector soften(const ProbVector& p, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("soften: tau must be positive");
  Vec out(p.size(), 0.0);
  double m = -INFINITY;
  for (double v : p)
    if (v > 0.0) m = std::max(m, std::log(v) / tau);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      out[i] = std::exp(std::log(p[i]) / tau - m);
      sum += out[i];
    }
  }
  for (double& v : out) v /= sum;
  return ProbVector::trusted(std::move(out));
}

namespace {

void check_kd_args(const ClassifierModel& student, const ProbVector& teacher_probs, std::size_t label, double alpha,
                   double tau) {
  if (teacher_probs.size() != student.num_classes()) throw InvalidArgument("kd: teacher/student class mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("kd: alpha must be in [0,1]");
  if (!(tau > 0.0)) throw InvalidArgument("kd: tau must be positive");
  if (label >= student.num_classes()) throw InvalidArgument("kd: pseudo label out of range");
}

// Loss and d(loss)/d(logits).
KdLoss kd_loss_and_dlogits(const Vec& z, const ProbVector& teacher_probs, std::size_t label, double alpha, double tau,
                           Vec* dz) {
  const std::size_t C = z.size();
  for (double v : z)
    if (!std::isfinite(v)) throw NonFiniteError("kd loss: non-finite student logit");
  KdLoss out;
  if (dz) dz->assign(C, 0.0);
  if (alpha > 0.0) {
    const Vec ls = log_softmax(z);
    out.ce = -alpha * ls[label];
    if (!std::isfinite(out.ce)) throw NonFiniteError("kd loss: non-finite cross-entropy term");
    if (dz)
      for (std::size_t c = 0; c < C; ++c) (*dz)[c] += alpha * (std::exp(ls[c]) - (c == label ? 1.0 : 0.0));
  }
  if (alpha < 1.0) {
    const ProbVector t = soften(teacher_probs, tau);
    const Vec ls_tau = log_softmax(z, tau);
    double kl = 0.0;
    for (std::size_t c = 0; c < C; ++c)
      if (t[c] > 0.0) kl += t[c] * (std::log(t[c]) - ls_tau[c]);
    out.kl = (1.0 - alpha) * tau * tau * std::max(kl, 0.0);
    if (!std::isfinite(out.kl)) throw NonFiniteError("kd loss: non-finite KL term");
    if (dz)
      for (std::size_t c = 0; c < C; ++c) (*dz)[c] += (1.0 - alpha) * tau * (std::exp(ls_tau[c]) - t[c]);
  }
  out.loss = out.ce + out.kl;
  return out;
}

void backprop_logits(const ClassifierModel& m, const TokenSeq& x, const Vec& p, const Vec& dz, GradVector& grad,
                     double scale) {
  const std::size_t d = m.dim();
  const auto& P = m.params();
  Vec dp(d, 0.0);
  for (std::size_t c = 0; c < m.num_classes(); ++c) {
    const double g = scale * dz[c];
    if (g == 0.0) continue;
    double* gw = grad.data() + m.out_offset(c);
    const double* w = P.data() + m.out_offset(c);
    for (std::size_t k = 0; k < d; ++k) {
      gw[k] += g * p[k];
      dp[k] += g * w[k];
    }
    grad[m.bias_offset() + c] += g;
  }
  const double inv_uni = 1.0 / static_cast<double>(x.size());
  for (TokenId t : x) {
    double* ge = grad.data() + m.embedding_offset(t);
    for (std::size_t k = 0; k < d; ++k) ge[k] += inv_uni * dp[k];
  }
  if (x.size() > 1) {
    const double inv_bi = 1.0 / static_cast<double>(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      double* gb = grad.data() + m.bucket_offset(bigram_bucket(x[i], x[i + 1], m.buckets()));
      for (std::size_t k = 0; k < d; ++k) gb[k] += inv_bi * dp[k];
    }
  }
}

Vec logits_from_pooled(const ClassifierModel& m, const Vec& p) {
  Vec z(m.num_classes());
  for (std::size_t c = 0; c < m.num_classes(); ++c) {
    auto w = m.out_row(c);
    double acc = m.bias()[c];
    for (std::size_t k = 0; k < m.dim(); ++k) acc += w[k] * p[k];
    z[c] = acc;
  }
  return z;
}

}  // namespace

KdLoss classifier_kd_loss(const ClassifierModel& student, const TokenSeq& x, const ProbVector& teacher_probs,
                          std::size_t pseudo_label, double alpha, double tau) {
  check_kd_args(student, teacher_probs, pseudo_label, alpha, tau);
  return kd_loss_and_dlogits(student.logits(x), teacher_probs, pseudo_label, alpha, tau, nullptr);
}

KdLoss accumulate_kd_grad(const ClassifierModel& student, const TokenSeq& x, const ProbVector& teacher_probs,
                          std::size_t pseudo_label, double alpha, double tau, GradVector& grad, double scale) {
  check_kd_args(student, teacher_probs, pseudo_label, alpha, tau);
  if (grad.size() != student.num_params()) throw InvalidArgument("kd: gradient buffer size mismatch");
  const Vec p = student.pooled(x);
  Vec dz;
  const KdLoss loss = kd_loss_and_dlogits(logits_from_pooled(student, p), teacher_probs, pseudo_label, alpha, tau, &dz);
  backprop_logits(student, x, p, dz, grad, scale);
  return loss;
}

KdLossGrad classifier_kd_grad(const ClassifierModel& student, const TokenSeq& x, const ProbVector& teacher_probs,
                              std::size_t pseudo_label, double alpha, double tau) {
  KdLossGrad out;
  out.grad.assign(student.num_params(), 0.0);
  out.loss = accumulate_kd_grad(student, x, teacher_probs, pseudo_label, alpha, tau, out.grad);
  return out;
}

KdLossGrad classifier_ce_grad(const ClassifierModel& model, const TokenSeq& x, std::size_t label) {
  if (label >= model.num_classes()) throw InvalidArgument("ce: label out of range");
  const Vec p = model.pooled(x);
  const Vec z = logits_from_pooled(model, p);
  const Vec ls = log_softmax(z);
  KdLossGrad out;
  out.loss.ce = out.loss.loss = -ls[label];
  if (!std::isfinite(out.loss.loss)) throw NonFiniteError("ce: non-finite loss");
  Vec dz(z.size());
  for (std::size_t c = 0; c < z.size(); ++c) dz[c] = std::exp(ls[c]) - (c == label ? 1.0 : 0.0);
  out.grad.assign(model.num_params(), 0.0);
  backprop_logits(model, x, p, dz, out.grad, 1.0);
  return out;
}

SupervisedLog train_classifier_supervised(ClassifierModel& model, const std::vector<LabeledExample>& data,
                                          const SupervisedOptions& opts, RngStream& rng) {
  if (data.empty()) throw InvalidArgument("train_classifier_supervised: empty data");
  if (opts.batch == 0) throw InvalidArgument("train_classifier_supervised: batch must be >= 1");
  SupervisedLog log;
  Optimizer opt(opts.optimizer, opts.lr);
  std::vector<std::size_t> order(data.size());
  GradVector grad(model.num_params());
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += opts.batch) {
      const std::size_t end = std::min(order.size(), start + opts.batch);
      const double scale = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t j = start; j < end; ++j) {
        const auto& ex = data[order[j]];
        const Vec p = model.pooled(ex.x);
        const Vec z = logits_from_pooled(model, p);
        const Vec ls = log_softmax(z);
        const double loss = -ls[ex.y];
        if (!std::isfinite(loss))
          throw NonFiniteError("supervised training diverged at epoch " + std::to_string(epoch) + ", example " +
                               std::to_string(order[j]));
        epoch_loss += loss;
        Vec dz(z.size());
        for (std::size_t c = 0; c < z.size(); ++c) dz[c] = std::exp(ls[c]) - (c == ex.y ? 1.0 : 0.0);
        backprop_logits(model, ex.x, p, dz, grad, scale);
      }
      opt.step(model.params(), grad);
    }
    log.epoch_loss.push_back(epoch_loss / static_cast<double>(data.size()));
  }
  return log;
}

ClassifierModel init_student_from_teacher(const ClassifierModel& teacher, std::size_t student_dim) {
  if (student_dim == 0 || student_dim > teacher.dim())
    throw InvalidArgument("init_student_from_teacher: need 0 < d_s <= teacher dim");
  ClassifierModel s(teacher.vocab_size(), student_dim, teacher.num_classes(), teacher.buckets());
  auto copy_rows = [&](std::size_t rows, std::size_t t_off, std::size_t s_off) {
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(teacher.params().begin() + static_cast<std::ptrdiff_t>(t_off + r * teacher.dim()), student_dim,
                  s.params().begin() + static_cast<std::ptrdiff_t>(s_off + r * student_dim));
  };
  copy_rows(teacher.vocab_size() + teacher.buckets() + teacher.num_classes(), 0, 0);
  std::copy(teacher.bias().begin(), teacher.bias().end(),
            s.params().begin() + static_cast<std::ptrdiff_t>(s.bias_offset()));
  return s;
}

}  // namespace dfd
