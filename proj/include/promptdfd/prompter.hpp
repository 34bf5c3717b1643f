// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "promptdfd/classifier.hpp"
#include "promptdfd/count_lm.hpp"
#include "promptdfd/decoding.hpp"
#include "promptdfd/kd.hpp"
#include "promptdfd/neural_lm.hpp"
#include "promptdfd/rng.hpp"
#include "promptdfd/vocab.hpp"

namespace dfd {

enum class RewardMode { kTeacherOnly, kAdversarial };

RewardMode reward_mode_from_string(const std::string& s);
std::string to_string(RewardMode m);

/// The nine common sentence openers p_1 is drawn from.
std::vector<std::string> default_initial_tokens();

struct RLConfig {
  RewardMode reward = RewardMode::kAdversarial;
  double repeat_lambda = 0.1;
  double lr = 0.01;
  std::size_t rollouts = 1;
  std::vector<std::string> initial_tokens = default_initial_tokens();
  std::size_t prompts_per_epoch = 1024;
  std::size_t prompt_length = 6;
  /// Subtract a running mean of Q (off by default).
  bool baseline = false;
  /// Use KL(d_i||d_j) + KL(d_j||d_i) in the repeat penalty.
  bool symmetric_repeat = false;
  /// Trajectories accumulated per prompter step.
  std::size_t update_every = 1;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::size_t prompter_dim = 16;
  std::size_t prompter_window = 4;
  double prompter_init_scale = 0.1;

  void validate(const Vocab& vocab) const;
  std::vector<TokenId> initial_ids(const Vocab& vocab) const;
};

/// A sampled prompt p_1..p_n with everything the policy-gradient step needs.
/// Step t (0-based, t < n-1) has state P_{1:t+1}, action p_{t+2}.
struct PromptTrajectory {
  TokenSeq prompt;
  /// log pi(. | state_t) over the vocabulary, <pad> = -inf.
  std::vector<Vec> step_log_probs;
  std::vector<double> q;
  /// Completions behind each q[t] (rollouts per step).
  std::vector<std::vector<SynthSample>> completions;

  std::size_t num_steps() const { return prompt.size() - 1; }
  TokenSeq state(std::size_t t) const { return TokenSeq(prompt.begin(), prompt.begin() + static_cast<std::ptrdiff_t>(t + 1)); }
  TokenId action(std::size_t t) const { return prompt[t + 1]; }
};

/// p_1 uniform over `initial_ids`; p_2..p_n from the unfiltered policy.
PromptTrajectory sample_prompt(const NeuralLM& prompter, std::size_t n, const std::vector<TokenId>& initial_ids,
                               RngStream& rng);

struct QOptions {
  RewardMode reward = RewardMode::kAdversarial;
  std::size_t rollouts = 1;
  DecodeConfig decode;
};

/// Reward of a prompt prefix: complete it into x (the full prefix+content
/// sequence) and score with the teacher (max_c T(x)_c) or adversarially
/// (T_c'(x) - S_c'(x), c' = argmax_c T(x)_c). Averaged over rollouts, each
/// using rng.derive(r). Completions are appended to `used` when given.
double q_value(const TokenSeq& prefix, const CountLM& generator, const ClassifierModel& teacher,
               const ClassifierModel& student, const QOptions& opts, const RngStream& rng,
               std::vector<SynthSample>* used = nullptr);

/// Reward of one already-synthesized sequence.
double reward_of(const TokenSeq& x, const ClassifierModel& teacher, const ClassifierModel& student, RewardMode mode);

/// L_repeat = -sum_{i>j} KL(d_i || d_j) over per-step log-distributions,
/// with log-probabilities floored at log(1e-12). Entries equal to -inf
/// (masked tokens) are ignored in both arguments.
double repeat_penalty_value(const std::vector<Vec>& log_dists, bool symmetric = false);

struct RepeatPenalty {
  double loss = 0.0;
  GradVector grad;
};

/// L_repeat over the policy distributions at `contexts` and its gradient
/// with respect to the prompter parameters (through both KL arguments).
RepeatPenalty repeat_penalty(const NeuralLM& prompter, const std::vector<TokenSeq>& contexts, bool symmetric = false);

struct PrompterGradient {
  /// sum_t (Q_t - baseline) grad log pi(a_t|s_t) - lambda grad L_repeat
  GradVector ascent;
  double repeat_loss = 0.0;
};

PrompterGradient prompter_gradient(const NeuralLM& prompter, const PromptTrajectory& traj, double lambda,
                                   bool symmetric = false, double baseline = 0.0);

/// Plain gradient-ascent step: phi += lr * ascent. Throws NonFiniteError on
/// a non-finite Q or gradient.
void prompter_update(NeuralLM& prompter, const PromptTrajectory& traj, double lambda, double lr);

/// Hand-crafted prompts: "[Category]" in each template is replaced by a
/// class name; every (template, class) pair is equally likely.
class ManualPromptSource {
 public:
  ManualPromptSource(const std::vector<std::string>& templates, const std::vector<std::string>& class_names,
                     const Vocab& vocab);

  TokenSeq next(RngStream& rng) const;
  const std::vector<TokenSeq>& prompts() const { return prompts_; }

  static constexpr const char* kPlaceholder = "[Category]";

 private:
  std::vector<TokenSeq> prompts_;
};

struct RunReport {
  std::vector<EpochLog> epochs;
  std::vector<double> epoch_mean_q;
  std::vector<double> epoch_duplicate_rate;
  /// First few decoded prompts of every epoch.
  std::vector<std::vector<std::string>> epoch_prompts;
  /// All prompts of the final epoch.
  std::vector<TokenSeq> final_prompts;
  /// Every sequence the student was trained on, in order.
  std::vector<TokenSeq> synthesized;
  std::size_t q_completions = 0;
  std::size_t student_completions = 0;
  std::uint64_t generator_checksum_before = 0;
  std::uint64_t generator_checksum_after = 0;
};

struct PromptDFDResult {
  ClassifierModel student;
  NeuralLM prompter;
  RunReport report;
};

struct PromptDFDOptions {
  EvalHook eval;
  /// When set, prompts come from here and the prompter is never updated.
  const ManualPromptSource* manual = nullptr;
  std::size_t logged_prompts_per_epoch = 5;
};

/// The full training loop. Per prompt: sample P_{1:n}; fill Q for every
/// prefix P_{1:m+1}, m = 1..n-1; complete the full prompt into a transfer
/// sample. Every kd.batch samples the student takes one KD step; then the
/// prompter is updated with the policy gradient and repeat penalty.
PromptDFDResult run_promptdfd(const ClassifierModel& teacher, const CountLM& generator, ClassifierModel student,
                              NeuralLM prompter, const KDConfig& kd, const RLConfig& rl, const DecodeConfig& decode_cfg,
                              const Vocab& vocab, const RngStream& rng, const PromptDFDOptions& opts = {});

}  // namespace dfd
