// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "promptdfd/classifier.hpp"
#include "promptdfd/rng.hpp"
#include "promptdfd/vocab.hpp"
#include "promptdfd/world.hpp"

namespace dfd {

/// Fraction of examples whose argmax prediction equals the label.
double accuracy(const ClassifierModel& model, const std::vector<LabeledExample>& data);

/// Accuracy restricted to each class; classes absent from `data` report 0.
std::vector<double> per_class_accuracy(const ClassifierModel& model, const std::vector<LabeledExample>& data);

/// Fraction of inputs where argmax S(x) == argmax T(x).
double agreement(const ClassifierModel& teacher, const ClassifierModel& student, const std::vector<TokenSeq>& data);
double agreement(const ClassifierModel& teacher, const ClassifierModel& student,
                 const std::vector<LabeledExample>& data);

/// Occurrences of each keyword per 1000 tokens of `corpus`.
std::map<TokenId, double> keyword_frequency(const std::vector<TokenSeq>& corpus, const std::vector<TokenId>& keywords);

/// Occurrences of any keyword per 1000 tokens.
double keyword_rate(const std::vector<TokenSeq>& corpus, const std::vector<TokenId>& keywords);

/// Independent uniform permutation of every sequence's tokens.
std::vector<TokenSeq> shuffle_ablation(const std::vector<TokenSeq>& synth, RngStream& rng);

/// Mean over prompts of (tokens equal to an earlier token in the same prompt) / length.
double duplicate_token_rate(const std::vector<TokenSeq>& prompts);

struct MetricsReport {
  double accuracy = 0.0;
  double agreement = 0.0;
  std::vector<double> per_class_accuracy;
  double duplicate_token_rate = 0.0;
  std::map<TokenId, double> keyword_frequency;
};

double median(std::vector<double> v);

/// Two-sided sign test p-value for paired differences (zeros dropped).
double sign_test_p_value(const std::vector<double>& differences);

}  // namespace dfd
