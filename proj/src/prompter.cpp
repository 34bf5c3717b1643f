// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/prompter.hpp"

#include <algorithm>
#include <cmath>

#include "promptdfd/errors.hpp"
#include "promptdfd/eval.hpp"
#include "promptdfd/parallel.hpp"

namespace dfd {

RewardMode reward_mode_from_string(const std::string& s) {
  if (s == "adversarial") return RewardMode::kAdversarial;
  if (s == "teacher_only") return RewardMode::kTeacherOnly;
  throw InvalidArgument("unknown reward mode '" + s + "' (expected adversarial or teacher_only)");
}

std::string to_string(RewardMode m) { return m == RewardMode::kAdversarial ? "adversarial" : "teacher_only"; }

std::vector<std::string> default_initial_tokens() {
  return {"The", "It", "To", "There", "What", "This", "All", "If", "We"};
}

void RLConfig::validate(const Vocab& vocab) const {
  if (rollouts < 1) throw InvalidArgument("rl: rollouts must be >= 1");
  if (initial_tokens.empty()) throw InvalidArgument("rl: initial token set is empty");
  for (const auto& t : initial_tokens)
    if (!vocab.find(t)) throw InvalidArgument("rl: initial token '" + t + "' is not in the vocabulary");
  if (!(repeat_lambda >= 0.0)) throw InvalidArgument("rl: repeat_lambda must be >= 0");
  if (!(lr >= 0.0)) throw InvalidArgument("rl: lr must be >= 0");
  if (prompt_length < 2 || prompt_length >= kMaxLen) throw InvalidArgument("rl: prompt_length must be in [2, 127]");
  if (prompts_per_epoch < 1) throw InvalidArgument("rl: prompts_per_epoch must be >= 1");
  if (update_every < 1) throw InvalidArgument("rl: update_every must be >= 1");
  if (prompter_dim < 1 || prompter_window < 1) throw InvalidArgument("rl: prompter dim/window must be >= 1");
}

std::vector<TokenId> RLConfig::initial_ids(const Vocab& vocab) const {
  validate(vocab);
  std::vector<TokenId> ids;
  for (const auto& t : initial_tokens) ids.push_back(*vocab.find(t));
  return ids;
}

PromptTrajectory sample_prompt(const NeuralLM& prompter, std::size_t n, const std::vector<TokenId>& initial_ids,
                               RngStream& rng) {
  if (n < 2) throw InvalidArgument("sample_prompt: n must be >= 2");
  if (initial_ids.empty()) throw InvalidArgument("sample_prompt: empty initial-token set");
  PromptTrajectory traj;
  traj.prompt.push_back(initial_ids[rng.uniform_int(initial_ids.size())]);
  for (std::size_t t = 0; t + 1 < n; ++t) {
    Vec lp = prompter.log_probs(traj.prompt);
    Vec p(lp.size());
    for (std::size_t v = 0; v < lp.size(); ++v) p[v] = std::exp(lp[v]);
    traj.prompt.push_back(static_cast<TokenId>(sample_categorical(p, rng)));
    traj.step_log_probs.push_back(std::move(lp));
  }
  return traj;
}

double reward_of(const TokenSeq& x, const ClassifierModel& teacher, const ClassifierModel& student, RewardMode mode) {
  const ProbVector t = classifier_forward(teacher, x);
  const std::size_t c = t.argmax();
  if (mode == RewardMode::kTeacherOnly) return t[c];
  return t[c] - classifier_forward(student, x)[c];
}

double q_value(const TokenSeq& prefix, const CountLM& generator, const ClassifierModel& teacher,
               const ClassifierModel& student, const QOptions& opts, const RngStream& rng,
               std::vector<SynthSample>* used) {
  if (prefix.empty()) throw InvalidArgument("q_value: empty prefix");
  if (opts.rollouts < 1) throw InvalidArgument("q_value: rollouts must be >= 1");
  double sum = 0.0;
  for (std::size_t r = 0; r < opts.rollouts; ++r) {
    RngStream child = rng.derive(r);
    SynthSample s = complete(generator, prefix, opts.decode, child);
    sum += reward_of(s.full(), teacher, student, opts.reward);
    if (used) used->push_back(std::move(s));
  }
  return sum / static_cast<double>(opts.rollouts);
}

namespace {

constexpr double kLogFloor = -27.631021115928547;  // log(1e-12)

struct PairTerms {
  double value = 0.0;
  std::vector<Vec> dlogits;  // d L_repeat / d logits per step
};

// KL(d_a || d_b) on floored log-probabilities, max(log d, log 1e-12). The
// gradient is that of the floored expression, so entries pinned at the
// floor stop contributing.
PairTerms repeat_terms(const std::vector<Vec>& log_dists, bool symmetric, bool want_grad) {
  const std::size_t n = log_dists.size();
  PairTerms out;
  if (want_grad) out.dlogits.assign(n, Vec(n ? log_dists[0].size() : 0, 0.0));
  auto kl = [&](std::size_t a, std::size_t b) {
    const Vec& la = log_dists[a];
    const Vec& lb = log_dists[b];
    double v = 0.0, mass_a = 0.0, mass_b = 0.0;
    for (std::size_t k = 0; k < la.size(); ++k) {
      if (std::isinf(la[k]) && std::isinf(lb[k])) continue;
      const double pa = std::exp(la[k]);
      v += pa * (std::max(la[k], kLogFloor) - std::max(lb[k], kLogFloor));
      if (la[k] > kLogFloor) mass_a += pa;
      if (lb[k] > kLogFloor) mass_b += pa;
    }
    out.value -= v;
    if (!want_grad) return;
    // L = -KL, so dL/dz = -dKL/dz.
    for (std::size_t k = 0; k < la.size(); ++k) {
      if (std::isinf(la[k]) && std::isinf(lb[k])) continue;
      const double pa = std::exp(la[k]), pb = std::exp(lb[k]);
      const double d = std::max(la[k], kLogFloor) - std::max(lb[k], kLogFloor);
      const double in_a = la[k] > kLogFloor ? 1.0 : 0.0;
      const double in_b = lb[k] > kLogFloor ? 1.0 : 0.0;
      out.dlogits[a][k] -= pa * (d - v) + pa * (in_a - mass_a);
      out.dlogits[b][k] -= pb * mass_b - pa * in_b;
    }
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      kl(i, j);
      if (symmetric) kl(j, i);
    }
  return out;
}

}  // namespace

double repeat_penalty_value(const std::vector<Vec>& log_dists, bool symmetric) {
  if (log_dists.size() < 2) throw InvalidArgument("repeat_penalty: need at least 2 distributions");
  return repeat_terms(log_dists, symmetric, false).value;
}

RepeatPenalty repeat_penalty(const NeuralLM& prompter, const std::vector<TokenSeq>& contexts, bool symmetric) {
  if (contexts.size() < 2) throw InvalidArgument("repeat_penalty: need at least 2 distributions");
  std::vector<Vec> lds;
  for (const auto& c : contexts) lds.push_back(prompter.log_probs(c));
  const PairTerms terms = repeat_terms(lds, symmetric, true);
  RepeatPenalty out;
  out.loss = terms.value;
  out.grad.assign(prompter.num_params(), 0.0);
  for (std::size_t i = 0; i < contexts.size(); ++i) prompter.backward(contexts[i], terms.dlogits[i], out.grad);
  return out;
}

PrompterGradient prompter_gradient(const NeuralLM& prompter, const PromptTrajectory& traj, double lambda,
                                   bool symmetric, double baseline) {
  const std::size_t steps = traj.num_steps();
  if (traj.q.size() != steps) throw InvalidArgument("prompter_update: trajectory Q values not filled");
  for (double q : traj.q)
    if (!std::isfinite(q)) throw NonFiniteError("prompter_update: non-finite Q value");

  std::vector<TokenSeq> contexts;
  std::vector<Vec> lds;
  for (std::size_t t = 0; t < steps; ++t) {
    contexts.push_back(traj.state(t));
    lds.push_back(prompter.log_probs(contexts.back()));
  }
  PrompterGradient out;
  std::vector<Vec> dz(steps, Vec(prompter.vocab_size(), 0.0));
  for (std::size_t t = 0; t < steps; ++t) {
    const double adv = traj.q[t] - baseline;
    if (adv == 0.0) continue;
    for (std::size_t v = 1; v < prompter.vocab_size(); ++v)
      dz[t][v] += adv * ((v == traj.action(t) ? 1.0 : 0.0) - std::exp(lds[t][v]));
  }
  if (steps >= 2) {
    const PairTerms terms = repeat_terms(lds, symmetric, lambda > 0.0);
    out.repeat_loss = terms.value;
    if (lambda > 0.0)
      for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t v = 0; v < dz[t].size(); ++v) dz[t][v] -= lambda * terms.dlogits[t][v];
  }
  out.ascent.assign(prompter.num_params(), 0.0);
  for (std::size_t t = 0; t < steps; ++t) prompter.backward(contexts[t], dz[t], out.ascent);
  for (double g : out.ascent)
    if (!std::isfinite(g)) throw NonFiniteError("prompter_update: non-finite gradient");
  return out;
}

void prompter_update(NeuralLM& prompter, const PromptTrajectory& traj, double lambda, double lr) {
  const PrompterGradient g = prompter_gradient(prompter, traj, lambda);
  auto& p = prompter.params();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += lr * g.ascent[i];
}

ManualPromptSource::ManualPromptSource(const std::vector<std::string>& templates,
                                       const std::vector<std::string>& class_names, const Vocab& vocab) {
  if (templates.empty() || class_names.empty()) throw InvalidArgument("manual prompts: need templates and classes");
  for (const auto& tmpl : templates) {
    for (const auto& name : class_names) {
      TokenSeq prompt;
      for (const auto& word : split_whitespace(tmpl)) {
        const std::string tok = word == kPlaceholder ? name : word;
        auto id = vocab.find(tok);
        if (!id) throw InvalidArgument("manual prompts: token '" + tok + "' of template '" + tmpl + "' is not in the vocabulary");
        prompt.push_back(*id);
      }
      if (prompt.empty()) throw InvalidArgument("manual prompts: empty template");
      prompts_.push_back(std::move(prompt));
    }
  }
}

TokenSeq ManualPromptSource::next(RngStream& rng) const { return prompts_[rng.uniform_int(prompts_.size())]; }

namespace {

struct PromptWork {
  PromptTrajectory traj;
  SynthSample sample;
};

}  // namespace

PromptDFDResult run_promptdfd(const ClassifierModel& teacher, const CountLM& generator, ClassifierModel student,
                              NeuralLM prompter, const KDConfig& kd, const RLConfig& rl, const DecodeConfig& decode_cfg,
                              const Vocab& vocab, const RngStream& rng, const PromptDFDOptions& opts) {
  kd.validate();
  decode_cfg.validate();
  const bool manual = opts.manual != nullptr;
  const std::vector<TokenId> initial = manual ? std::vector<TokenId>{} : rl.initial_ids(vocab);
  if (!manual && prompter.vocab_size() != vocab.size()) throw InvalidArgument("run_promptdfd: prompter vocab mismatch");

  PromptDFDResult result{std::move(student), std::move(prompter), {}};
  RunReport& report = result.report;
  report.generator_checksum_before = generator.checksum();

  Optimizer student_opt(kd.optimizer, kd.lr);
  Optimizer prompter_opt(rl.optimizer, rl.lr);
  const QOptions qopts{rl.reward, rl.rollouts, decode_cfg};
  double baseline = 0.0;
  bool baseline_ready = false;

  GradVector pending(result.prompter.num_params(), 0.0);
  std::size_t pending_count = 0;

  for (std::size_t epoch = 0; epoch < kd.epochs; ++epoch) {
    std::vector<TokenSeq> batch;
    std::vector<TokenSeq> epoch_prompts;
    double loss_sum = 0.0, q_sum = 0.0;
    std::size_t steps = 0, q_count = 0;
    std::vector<std::string> logged;

    for (std::size_t i = 0; i < rl.prompts_per_epoch; ++i) {
      const RngStream prompt_rng = rng.derive({epoch, i});
      PromptWork work;
      {
        RngStream r = prompt_rng.derive(0);
        if (manual) {
          work.traj.prompt = opts.manual->next(r);
        } else {
          work.traj = sample_prompt(result.prompter, rl.prompt_length, initial, r);
        }
      }
      if (!manual) {
        const std::size_t steps_n = work.traj.num_steps();
        work.traj.q.assign(steps_n, 0.0);
        work.traj.completions.assign(steps_n, {});
        parallel_for(steps_n, [&](std::size_t t) {
          TokenSeq prefix(work.traj.prompt.begin(), work.traj.prompt.begin() + static_cast<std::ptrdiff_t>(t + 2));
          work.traj.q[t] = q_value(prefix, generator, teacher, result.student, qopts, prompt_rng.derive({1, t}),
                                   &work.traj.completions[t]);
        });
        report.q_completions += steps_n * rl.rollouts;
        for (double q : work.traj.q) q_sum += q;
        q_count += steps_n;
      }
      {
        RngStream r = prompt_rng.derive(2);
        work.sample = complete(generator, work.traj.prompt, decode_cfg, r);
        ++report.student_completions;
      }
      if (logged.size() < opts.logged_prompts_per_epoch) logged.push_back(decode(vocab, work.traj.prompt));
      epoch_prompts.push_back(work.traj.prompt);
      batch.push_back(work.sample.full());
      report.synthesized.push_back(batch.back());

      // Student first, then prompter.
      if (batch.size() == kd.batch || i + 1 == rl.prompts_per_epoch) {
        loss_sum += student_step(result.student, batch, teacher, kd, student_opt);
        ++steps;
        batch.clear();
      }
      if (manual) continue;

      double b = 0.0;
      if (rl.baseline) {
        double mean_q = 0.0;
        for (double q : work.traj.q) mean_q += q;
        mean_q /= static_cast<double>(work.traj.q.size());
        if (!baseline_ready) {
          baseline = mean_q;
          baseline_ready = true;
        }
        b = baseline;
        baseline = 0.9 * baseline + 0.1 * mean_q;
      }
      const PrompterGradient g =
          prompter_gradient(result.prompter, work.traj, rl.repeat_lambda, rl.symmetric_repeat, b);
      for (std::size_t k = 0; k < pending.size(); ++k) pending[k] -= g.ascent[k];
      if (++pending_count == rl.update_every || i + 1 == rl.prompts_per_epoch) {
        const double inv = 1.0 / static_cast<double>(pending_count);
        for (double& v : pending) v *= inv;
        prompter_opt.step(result.prompter.params(), pending);
        std::fill(pending.begin(), pending.end(), 0.0);
        pending_count = 0;
      }
    }

    report.epochs.push_back(evaluate_epoch(epoch + 1, loss_sum / static_cast<double>(std::max<std::size_t>(steps, 1)),
                                           result.student, opts.eval));
    report.epoch_mean_q.push_back(q_count ? q_sum / static_cast<double>(q_count) : 0.0);
    report.epoch_duplicate_rate.push_back(duplicate_token_rate(epoch_prompts));
    report.epoch_prompts.push_back(std::move(logged));
    if (epoch + 1 == kd.epochs) report.final_prompts = std::move(epoch_prompts);
  }
  report.generator_checksum_after = generator.checksum();
  return result;
}

}  // namespace dfd
