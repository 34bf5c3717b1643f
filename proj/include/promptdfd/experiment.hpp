// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "promptdfd/classifier.hpp"
#include "promptdfd/config.hpp"
#include "promptdfd/count_lm.hpp"
#include "promptdfd/kd.hpp"
#include "promptdfd/neural_lm.hpp"
#include "promptdfd/prompter.hpp"
#include "promptdfd/world.hpp"

namespace dfd {

struct Datasets {
  std::vector<LabeledExample> train, dev, test;
};

/// Labeled splits drawn from the class chains on streams derived from the
/// world seed, so every method sees the same data.
Datasets make_datasets(const World& world, const DataConfig& data);

/// Background/class mixture used to pretrain the content generator.
std::vector<TokenSeq> generator_corpus(const World& world, const DataConfig& data);

ClassifierModel train_teacher(const World& world, const Datasets& data, const TeacherConfig& cfg,
                              SupervisedLog* log = nullptr);

CountLM pretrain_generator(const World& world, const DataConfig& data, const GeneratorConfig& cfg);

/// Everything shared by all distillation runs of one config.
struct Setup {
  World world;
  Datasets data;
  ClassifierModel teacher;
  CountLM generator;
};

Setup build_setup(const ExperimentConfig& cfg);

struct MethodResult {
  Method method = Method::kRl;
  std::uint64_t seed = 0;
  ClassifierModel student;
  std::vector<EpochLog> log;
  /// Prompter and run report for the prompt-driven methods.
  std::optional<NeuralLM> prompter;
  std::optional<RunReport> report;
  /// Sequences the student was distilled on, in order.
  std::vector<TokenSeq> transfer;
  double test_accuracy = 0.0;
  double test_agreement = 0.0;
};

/// Distills a fresh student (truncated teacher) with `method`. Only `seed`
/// varies between repeated runs; world, data and teacher stay fixed.
MethodResult run_method(const Setup& setup, const ExperimentConfig& cfg, Method method, std::uint64_t seed);

struct SweepRow {
  std::string key;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double agreement = 0.0;
};

using RowSink = std::function<void(const SweepRow&)>;

/// run_method(rl) for every (length, seed). Rows reach `sink` as they finish.
std::vector<SweepRow> prompt_length_sweep(const Setup& setup, const ExperimentConfig& cfg,
                                          const std::vector<std::size_t>& lengths,
                                          const std::vector<std::uint64_t>& seeds, const RowSink& sink = {});

inline const std::vector<std::string>& ablation_variants() {
  static const std::vector<std::string> v = {"full", "no_adversarial", "no_repeat", "no_both"};
  return v;
}

/// `cfg` with the reward switched to teacher-only and/or lambda set to 0.
ExperimentConfig ablation_config(const ExperimentConfig& cfg, const std::string& variant);

struct AblationRow {
  SweepRow row;
  /// Duplicate-token rate of the final-epoch prompts.
  double duplicate_rate = 0.0;
};

std::vector<AblationRow> ablation_suite(const Setup& setup, const ExperimentConfig& cfg,
                                        const std::vector<std::uint64_t>& seeds,
                                        const std::function<void(const AblationRow&)>& sink = {});

struct ShuffleResult {
  double ordered_agreement = 0.0;
  double shuffled_agreement = 0.0;
  double ordered_accuracy = 0.0;
  double shuffled_accuracy = 0.0;
};

/// Distills two fresh students on `synth` and on its token-shuffled copy
/// with the same KD config and streams.
ShuffleResult shuffle_experiment(const Setup& setup, const ExperimentConfig& cfg, const std::vector<TokenSeq>& synth,
                                 std::uint64_t seed);

}  // namespace dfd
