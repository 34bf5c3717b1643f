// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "promptdfd/classifier.hpp"
#include "promptdfd/decoding.hpp"
#include "promptdfd/kd.hpp"
#include "promptdfd/prompter.hpp"
#include "promptdfd/world.hpp"

namespace dfd {

enum class Method { kVanilla, kRandomText, kUnlabel, kManual, kRl };

Method method_from_string(const std::string& s);
std::string to_string(Method m);
const std::vector<Method>& all_methods();

struct DataConfig {
  std::size_t teacher_train = 5000;
  std::size_t dev = 500;
  std::size_t test = 2000;
  std::size_t generator_corpus = 20000;
  /// Corpus size for the random-text and unlabeled baselines.
  std::size_t transfer = 2048;
  /// Fraction of background text in the unlabeled transfer corpus.
  double unlabel_background_mix = 1.0;
};

struct TeacherConfig {
  std::size_t dim = 32;
  std::size_t buckets = kDefaultBuckets;
  double init_scale = 0.1;
  SupervisedOptions train;
};

struct GeneratorConfig {
  std::size_t order = 3;
  double k_smooth = 0.1;
};

struct ManualConfig {
  std::vector<std::string> templates = {"A latest [Category] news"};
};

/// Every knob of an experiment. Loaded from JSON; unknown keys are errors.
struct ExperimentConfig {
  WorldParams world = WorldParams::reference();
  DataConfig data;
  TeacherConfig teacher;
  GeneratorConfig generator;
  std::size_t student_dim = 8;
  KDConfig kd;
  RLConfig rl;
  DecodeConfig decode;
  ManualConfig manual;
  Method method = Method::kRl;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<std::size_t> sweep_lengths = {3, 4, 5, 6, 8, 10};
  std::string output_dir = "out";

  /// Checks every sub-config; throws ValidationError naming the key.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a of the canonical (sorted-key, compact) JSON form.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hex64(std::uint64_t v);

}  // namespace dfd
