// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/experiment.hpp"

#include "promptdfd/errors.hpp"
#include "promptdfd/eval.hpp"

namespace dfd {

namespace {

// Stream tags under the world seed (shared fixtures) and the run seed.
constexpr std::uint64_t kDataTag = 0x64617461;     // "data"
constexpr std::uint64_t kTeacherTag = 0x7465616368;  // "teach"
constexpr std::uint64_t kRunTag = 0x72756e;        // "run"

std::vector<TokenSeq> inputs(const std::vector<LabeledExample>& data) {
  std::vector<TokenSeq> xs;
  xs.reserve(data.size());
  for (const auto& ex : data) xs.push_back(ex.x);
  return xs;
}

std::uint64_t method_key(Method m) { return static_cast<std::uint64_t>(m); }

}  // namespace

Datasets make_datasets(const World& world, const DataConfig& data) {
  const RngStream root(world.params().seed, {kDataTag});
  Datasets d;
  auto train_rng = root.derive(1);
  auto dev_rng = root.derive(2);
  auto test_rng = root.derive(3);
  d.train = sample_labeled(world, data.teacher_train, train_rng);
  d.dev = sample_labeled(world, data.dev, dev_rng);
  d.test = sample_labeled(world, data.test, test_rng);
  return d;
}

std::vector<TokenSeq> generator_corpus(const World& world, const DataConfig& data) {
  auto rng = RngStream(world.params().seed, {kDataTag}).derive(4);
  return sample_unlabeled(world, data.generator_corpus, true, rng);
}

ClassifierModel train_teacher(const World& world, const Datasets& data, const TeacherConfig& cfg,
                              SupervisedLog* log) {
  const RngStream root(world.params().seed, {kTeacherTag});
  auto init_rng = root.derive(0);
  auto train_rng = root.derive(1);
  auto teacher = ClassifierModel::random(world.vocab().size(), cfg.dim, world.num_classes(), init_rng,
                                         cfg.init_scale, cfg.buckets);
  auto l = train_classifier_supervised(teacher, data.train, cfg.train, train_rng);
  if (log) *log = std::move(l);
  return teacher;
}

CountLM pretrain_generator(const World& world, const DataConfig& data, const GeneratorConfig& cfg) {
  return fit_count_lm(generator_corpus(world, data), world.vocab().size(), cfg.order, cfg.k_smooth);
}

Setup build_setup(const ExperimentConfig& cfg) {
  cfg.validate();
  Setup s{make_world(cfg.world), {}, {}, {}};
  s.data = make_datasets(s.world, cfg.data);
  s.teacher = train_teacher(s.world, s.data, cfg.teacher);
  s.generator = pretrain_generator(s.world, cfg.data, cfg.generator);
  return s;
}

MethodResult run_method(const Setup& setup, const ExperimentConfig& cfg, Method method, std::uint64_t seed) {
  const RngStream root = RngStream(seed, {kRunTag}).derive(method_key(method));
  const auto& vocab = setup.world.vocab();
  const EvalHook hook{&setup.teacher, &setup.data.dev};
  MethodResult r;
  r.method = method;
  r.seed = seed;
  r.student = init_student_from_teacher(setup.teacher, cfg.student_dim);

  auto corpus_rng = root.derive(1);
  auto train_rng = root.derive(2);
  switch (method) {
    case Method::kVanilla:
      r.transfer = inputs(setup.data.train);
      break;
    case Method::kRandomText:
      r.transfer = random_text_corpus(vocab, cfg.data.transfer, cfg.world.min_len, cfg.world.max_len, corpus_rng);
      break;
    case Method::kUnlabel:
      r.transfer = sample_unlabeled(setup.world, cfg.data.transfer, true, corpus_rng, cfg.data.unlabel_background_mix);
      break;
    case Method::kManual:
    case Method::kRl: {
      auto init_rng = root.derive(3);
      auto prompter = NeuralLM::random(vocab.size(), init_rng, cfg.rl.prompter_dim, cfg.rl.prompter_window,
                                       cfg.rl.prompter_init_scale);
      std::optional<ManualPromptSource> manual;
      PromptDFDOptions opts;
      opts.eval = hook;
      if (method == Method::kManual) {
        manual.emplace(cfg.manual.templates, cfg.world.class_names, vocab);
        opts.manual = &*manual;
      }
      auto out = run_promptdfd(setup.teacher, setup.generator, r.student, std::move(prompter), cfg.kd, cfg.rl,
                               cfg.decode, vocab, root.derive(4), opts);
      r.student = std::move(out.student);
      r.prompter = std::move(out.prompter);
      r.log = out.report.epochs;
      r.transfer = out.report.synthesized;
      r.report = std::move(out.report);
      break;
    }
  }
  if (method == Method::kVanilla || method == Method::kRandomText || method == Method::kUnlabel)
    r.log = distill_with_corpus(r.student, setup.teacher, r.transfer, cfg.kd, train_rng, hook);

  r.test_accuracy = accuracy(r.student, setup.data.test);
  r.test_agreement = agreement(setup.teacher, r.student, setup.data.test);
  return r;
}

std::vector<SweepRow> prompt_length_sweep(const Setup& setup, const ExperimentConfig& cfg,
                                          const std::vector<std::size_t>& lengths,
                                          const std::vector<std::uint64_t>& seeds, const RowSink& sink) {
  std::vector<SweepRow> rows;
  for (std::size_t n : lengths) {
    ExperimentConfig c = cfg;
    c.rl.prompt_length = n;
    c.validate();
    for (auto seed : seeds) {
      const auto r = run_method(setup, c, Method::kRl, seed);
      rows.push_back({std::to_string(n), seed, r.test_accuracy, r.test_agreement});
      if (sink) sink(rows.back());
    }
  }
  return rows;
}

ExperimentConfig ablation_config(const ExperimentConfig& cfg, const std::string& variant) {
  ExperimentConfig c = cfg;
  if (variant == "full") return c;
  if (variant == "no_adversarial" || variant == "no_both") c.rl.reward = RewardMode::kTeacherOnly;
  if (variant == "no_repeat" || variant == "no_both") c.rl.repeat_lambda = 0.0;
  if (variant != "no_adversarial" && variant != "no_repeat" && variant != "no_both")
    throw InvalidArgument("unknown ablation variant '" + variant + "'");
  return c;
}

std::vector<AblationRow> ablation_suite(const Setup& setup, const ExperimentConfig& cfg,
                                        const std::vector<std::uint64_t>& seeds,
                                        const std::function<void(const AblationRow&)>& sink) {
  std::vector<AblationRow> rows;
  for (const auto& variant : ablation_variants()) {
    const auto c = ablation_config(cfg, variant);
    for (auto seed : seeds) {
      const auto r = run_method(setup, c, Method::kRl, seed);
      rows.push_back({{variant, seed, r.test_accuracy, r.test_agreement},
                      duplicate_token_rate(r.report->final_prompts)});
      if (sink) sink(rows.back());
    }
  }
  return rows;
}

ShuffleResult shuffle_experiment(const Setup& setup, const ExperimentConfig& cfg, const std::vector<TokenSeq>& synth,
                                 std::uint64_t seed) {
  const RngStream root = RngStream(seed, {kRunTag}).derive(0x73687566);  // "shuf"
  auto shuffle_rng = root.derive(0);
  const auto shuffled = shuffle_ablation(synth, shuffle_rng);
  const EvalHook hook{&setup.teacher, &setup.data.dev};
  ShuffleResult out;
  for (int pass = 0; pass < 2; ++pass) {
    auto student = init_student_from_teacher(setup.teacher, cfg.student_dim);
    auto rng = root.derive(1);
    distill_with_corpus(student, setup.teacher, pass == 0 ? synth : shuffled, cfg.kd, rng, hook);
    const double acc = accuracy(student, setup.data.test);
    const double agr = agreement(setup.teacher, student, setup.data.test);
    (pass == 0 ? out.ordered_accuracy : out.shuffled_accuracy) = acc;
    (pass == 0 ? out.ordered_agreement : out.shuffled_agreement) = agr;
  }
  return out;
}

}  // namespace dfd
