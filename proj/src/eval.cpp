// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "promptdfd/errors.hpp"

namespace dfd {

namespace {
std::size_t predict(const ClassifierModel& m, const TokenSeq& x) { return classifier_forward(m, x).argmax(); }
}  // namespace

double accuracy(const ClassifierModel& model, const std::vector<LabeledExample>& data) {
  if (data.empty()) throw InvalidArgument("accuracy: empty set");
  std::size_t hits = 0;
  for (const auto& ex : data) hits += predict(model, ex.x) == ex.y;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

std::vector<double> per_class_accuracy(const ClassifierModel& model, const std::vector<LabeledExample>& data) {
  std::vector<std::size_t> hits(model.num_classes(), 0), total(model.num_classes(), 0);
  for (const auto& ex : data) {
    ++total.at(ex.y);
    hits[ex.y] += predict(model, ex.x) == ex.y;
  }
  std::vector<double> out(model.num_classes(), 0.0);
  for (std::size_t c = 0; c < out.size(); ++c)
    if (total[c]) out[c] = static_cast<double>(hits[c]) / static_cast<double>(total[c]);
  return out;
}

double agreement(const ClassifierModel& teacher, const ClassifierModel& student, const std::vector<TokenSeq>& data) {
  if (data.empty()) throw InvalidArgument("agreement: empty set");
  std::size_t same = 0;
  for (const auto& x : data) same += predict(teacher, x) == predict(student, x);
  return static_cast<double>(same) / static_cast<double>(data.size());
}

double agreement(const ClassifierModel& teacher, const ClassifierModel& student,
                 const std::vector<LabeledExample>& data) {
  if (data.empty()) throw InvalidArgument("agreement: empty set");
  std::size_t same = 0;
  for (const auto& ex : data) same += predict(teacher, ex.x) == predict(student, ex.x);
  return static_cast<double>(same) / static_cast<double>(data.size());
}

std::map<TokenId, double> keyword_frequency(const std::vector<TokenSeq>& corpus, const std::vector<TokenId>& keywords) {
  if (corpus.empty()) throw InvalidArgument("keyword_frequency: empty corpus");
  std::map<TokenId, double> counts;
  for (TokenId k : keywords) counts[k] = 0.0;
  std::size_t total = 0;
  for (const auto& seq : corpus) {
    total += seq.size();
    for (TokenId t : seq) {
      auto it = counts.find(t);
      if (it != counts.end()) it->second += 1.0;
    }
  }
  if (total == 0) return counts;
  for (auto& [_, c] : counts) c = 1000.0 * c / static_cast<double>(total);
  return counts;
}

double keyword_rate(const std::vector<TokenSeq>& corpus, const std::vector<TokenId>& keywords) {
  double sum = 0.0;
  for (const auto& [_, r] : keyword_frequency(corpus, keywords)) sum += r;
  return sum;
}

std::vector<TokenSeq> shuffle_ablation(const std::vector<TokenSeq>& synth, RngStream& rng) {
  if (synth.empty()) throw InvalidArgument("shuffle_ablation: empty set");
  std::vector<TokenSeq> out = synth;
  for (auto& seq : out)
    for (std::size_t i = seq.size(); i > 1; --i) std::swap(seq[i - 1], seq[rng.uniform_int(i)]);
  return out;
}

double duplicate_token_rate(const std::vector<TokenSeq>& prompts) {
  if (prompts.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : prompts) {
    if (p.empty()) continue;
    std::set<TokenId> seen;
    std::size_t dup = 0;
    for (TokenId t : p) dup += !seen.insert(t).second;
    sum += static_cast<double>(dup) / static_cast<double>(p.size());
  }
  return sum / static_cast<double>(prompts.size());
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sign_test_p_value(const std::vector<double>& differences) {
  std::size_t pos = 0, neg = 0;
  for (double d : differences) {
    if (d > 0) ++pos;
    else if (d < 0) ++neg;
  }
  const std::size_t n = pos + neg;
  if (n == 0) return 1.0;
  const std::size_t k = std::min(pos, neg);
  // P(X <= k) for X ~ Binomial(n, 1/2), doubled.
  double p = 0.0, term = std::pow(0.5, static_cast<double>(n));
  for (std::size_t i = 0; i <= k; ++i) {
    p += term;
    term *= static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  return std::min(1.0, 2.0 * p);
}

}  // namespace dfd
