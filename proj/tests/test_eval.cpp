// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "promptdfd/config.hpp"
#include "promptdfd/errors.hpp"
#include "promptdfd/eval.hpp"
#include "promptdfd/experiment.hpp"

namespace dfd {
namespace {

constexpr std::size_t kV = 10, kC = 3;

// One-dimensional model whose prediction is decided by token identity:
// token t votes for class (t - 4) % 3 through a one-hot bias-free head.
ClassifierModel voter() {
  ClassifierModel m(kV, kC, kC, 4);
  for (TokenId t = kNumReserved; t < kV; ++t) m.params()[m.embedding_offset(t) + (t - kNumReserved) % kC] = 5.0;
  for (std::size_t c = 0; c < kC; ++c) m.params()[m.out_offset(c) + c] = 1.0;
  return m;
}

TEST(Accuracy, RecountOnFixture) {
  const auto m = voter();
  // Predictions: 4->0, 5->1, 6->2, 7->0, 8->1.
  const std::vector<LabeledExample> data = {{{4}, 0}, {{5}, 1}, {{6}, 0}, {{7}, 0}, {{8}, 2},
                                            {{4, 4}, 0}, {{5}, 2}, {{6}, 2}, {{9}, 2}, {{7, 7}, 1}};
  // Hits: 4,5,7,4-4,6,9(->2) = 6 of 10.
  EXPECT_DOUBLE_EQ(accuracy(m, data), 0.6);
  const auto pc = per_class_accuracy(m, data);
  EXPECT_DOUBLE_EQ(pc[0], 0.75);
  EXPECT_DOUBLE_EQ(pc[1], 0.5);
  EXPECT_DOUBLE_EQ(pc[2], 0.5);
}

TEST(Accuracy, OracleAndChance) {
  const auto m = voter();
  RngStream rng(1);
  std::vector<LabeledExample> own;
  for (int i = 0; i < 10000; ++i) {
    const TokenId t = static_cast<TokenId>(kNumReserved + rng.uniform_int(kV - kNumReserved));
    own.push_back({{t}, classifier_forward(m, {t}).argmax()});
  }
  EXPECT_EQ(accuracy(m, own), 1.0);
  // A uniform model predicts class 0 everywhere.
  ClassifierModel uniform(kV, 2, 4, 4);
  std::vector<LabeledExample> four;
  for (int i = 0; i < 10000; ++i) four.push_back({{5}, static_cast<std::size_t>(rng.uniform_int(4))});
  EXPECT_NEAR(accuracy(uniform, four), 0.25, 0.02);
  EXPECT_THROW(accuracy(m, {}), InvalidArgument);
}

TEST(Agreement, IdentityAndPermutation) {
  const auto t = voter();
  std::vector<TokenSeq> xs;
  for (TokenId a = kNumReserved; a < kV; ++a) xs.push_back({a});
  EXPECT_EQ(agreement(t, t, xs), 1.0);
  // Rotate the class rows of the head: every confident prediction moves.
  auto s = t;
  for (std::size_t c = 0; c < kC; ++c)
    for (std::size_t k = 0; k < kC; ++k) s.params()[s.out_offset((c + 1) % kC) + k] = t.params()[t.out_offset(c) + k];
  EXPECT_EQ(agreement(t, s, xs), 0.0);
}

TEST(Agreement, RecountAndPermutationInvariance) {
  const auto t = voter();
  ClassifierModel s(kV, kC, kC, 4);  // uniform: always class 0
  std::vector<TokenSeq> xs = {{4}, {5}, {6}, {7}, {8}, {9}, {4, 7}, {5, 8}, {6, 9}, {7, 4}};
  // Teacher class 0 on 4, 7, 4-7, 7-4: 4 of 10.
  EXPECT_DOUBLE_EQ(agreement(t, s, xs), 0.4);
  std::reverse(xs.begin(), xs.end());
  EXPECT_DOUBLE_EQ(agreement(t, s, xs), 0.4);
}

TEST(Keywords, Rates) {
  EXPECT_EQ(keyword_frequency({{4, 5, 6}}, {7}).at(7), 0.0);
  EXPECT_DOUBLE_EQ(keyword_frequency({TokenSeq(10, 7)}, {7}).at(7), 1000.0);
  const auto f = keyword_frequency({{7, 5}, {5, 5, 8, 7}}, {7, 8});
  EXPECT_DOUBLE_EQ(f.at(7), 1000.0 * 2 / 6);
  EXPECT_DOUBLE_EQ(f.at(8), 1000.0 / 6);
  EXPECT_DOUBLE_EQ(keyword_rate({{7, 5}, {5, 5, 8, 7}}, {7, 8}), 500.0);
  EXPECT_THROW(keyword_frequency({}, {7}), InvalidArgument);
}

TEST(Shuffle, PreservesMultisets) {
  RngStream rng(2);
  std::vector<TokenSeq> synth;
  for (int i = 0; i < 500; ++i) {
    TokenSeq x(1 + rng.uniform_int(20));
    for (auto& t : x) t = static_cast<TokenId>(rng.uniform_int(50));
    synth.push_back(x);
  }
  RngStream srng(3);
  const auto shuffled = shuffle_ablation(synth, srng);
  ASSERT_EQ(shuffled.size(), synth.size());
  std::size_t changed = 0;
  for (std::size_t i = 0; i < synth.size(); ++i) {
    auto a = synth[i], b = shuffled[i];
    if (a.size() == 1) EXPECT_EQ(a, b);
    changed += a != b;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
  EXPECT_GT(changed, synth.size() / 2);
  EXPECT_THROW(shuffle_ablation({}, srng), InvalidArgument);
}

TEST(Shuffle, PositionsUniform) {
  std::vector<std::vector<int>> where(3, std::vector<int>(3, 0));
  RngStream rng(4);
  for (int i = 0; i < 30000; ++i) {
    const auto s = shuffle_ablation({{0, 1, 2}}, rng)[0];
    for (std::size_t p = 0; p < 3; ++p) ++where[s[p]][p];
  }
  for (const auto& row : where)
    for (int n : row) EXPECT_NEAR(n / 30000.0, 1.0 / 3, 0.02);
}

TEST(Duplicates, Rate) {
  EXPECT_DOUBLE_EQ(duplicate_token_rate({{4, 5, 6}}), 0.0);
  EXPECT_DOUBLE_EQ(duplicate_token_rate({{4, 4, 4, 4}}), 0.75);
  EXPECT_DOUBLE_EQ(duplicate_token_rate({{4, 5, 4, 5}, {4, 5}}), 0.25);
  EXPECT_DOUBLE_EQ(duplicate_token_rate({}), 0.0);
}

TEST(Stats, MedianAndSignTest) {
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_THROW(median({}), InvalidArgument);
  // Two-sided exact binomial test values.
  EXPECT_NEAR(sign_test_p_value({1, 1, 1, 1, 1}), 0.0625, 1e-15);
  EXPECT_NEAR(sign_test_p_value({1, 1, 1, 1, -1}), 0.375, 1e-15);
  EXPECT_NEAR(sign_test_p_value({1, 1, 1, 1, 1, 1, 1, 1, -1, -1}), 0.109375, 1e-15);
  EXPECT_DOUBLE_EQ(sign_test_p_value({0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(sign_test_p_value({1, -1}), 1.0);
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.data.teacher_train = 600;
  c.data.dev = 100;
  c.data.test = 200;
  c.data.generator_corpus = 600;
  c.data.transfer = 64;
  c.teacher.train.epochs = 3;
  c.teacher.buckets = 256;
  c.student_dim = 4;
  c.kd.epochs = 2;
  c.kd.batch = 16;
  c.rl.prompts_per_epoch = 32;
  c.rl.prompter_dim = 4;
  c.validate();
  return c;
}

class ExperimentTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { setup_ = new dfd::Setup(build_setup(small_config())); }
  static void TearDownTestSuite() { delete setup_; }
  static inline dfd::Setup* setup_ = nullptr;
};

TEST_F(ExperimentTest, SweepSingleRowMatchesDirectRun) {
  auto cfg = small_config();
  std::vector<SweepRow> streamed;
  const auto rows = prompt_length_sweep(*setup_, cfg, {6}, {3}, [&](const SweepRow& r) { streamed.push_back(r); });
  ASSERT_EQ(rows.size(), 1u);
  ASSERT_EQ(streamed.size(), 1u);
  cfg.rl.prompt_length = 6;
  const auto direct = run_method(*setup_, cfg, Method::kRl, 3);
  EXPECT_EQ(rows[0].key, "6");
  EXPECT_EQ(rows[0].agreement, direct.test_agreement);
  EXPECT_EQ(rows[0].accuracy, direct.test_accuracy);
}

TEST_F(ExperimentTest, SweepRowCountAndDeterminism) {
  const auto cfg = small_config();
  const auto a = prompt_length_sweep(*setup_, cfg, {3, 4}, {1, 2});
  const auto b = prompt_length_sweep(*setup_, cfg, {3, 4}, {1, 2});
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].key, b[i].key);
    EXPECT_EQ(a[i].agreement, b[i].agreement);
  }
}

TEST_F(ExperimentTest, AblationConfigsDifferOnlyInFlags) {
  const auto cfg = small_config();
  const auto full = ablation_config(cfg, "full");
  const auto both = ablation_config(cfg, "no_both");
  EXPECT_NE(config_hash(full), config_hash(both));
  auto patched = both;
  patched.rl.reward = full.rl.reward;
  patched.rl.repeat_lambda = full.rl.repeat_lambda;
  EXPECT_EQ(config_hash(patched), config_hash(full));
  EXPECT_EQ(ablation_config(cfg, "no_adversarial").rl.reward, RewardMode::kTeacherOnly);
  EXPECT_EQ(ablation_config(cfg, "no_repeat").rl.repeat_lambda, 0.0);
  EXPECT_THROW(ablation_config(cfg, "no_teacher"), InvalidArgument);
}

TEST_F(ExperimentTest, AblationSuiteReproducible) {
  const auto cfg = small_config();
  const auto a = ablation_suite(*setup_, cfg, {1});
  const auto b = ablation_suite(*setup_, cfg, {1});
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].row.key, ablation_variants()[i]);
    EXPECT_EQ(a[i].row.agreement, b[i].row.agreement);
    EXPECT_EQ(a[i].duplicate_rate, b[i].duplicate_rate);
  }
}

TEST_F(ExperimentTest, EveryMethodRunsDeterministically) {
  const auto cfg = small_config();
  for (Method m : all_methods()) {
    const auto a = run_method(*setup_, cfg, m, 7), b = run_method(*setup_, cfg, m, 7);
    EXPECT_EQ(a.student, b.student) << to_string(m);
    EXPECT_EQ(a.transfer, b.transfer) << to_string(m);
    EXPECT_FALSE(a.transfer.empty());
    EXPECT_EQ(a.report.has_value(), m == Method::kManual || m == Method::kRl);
  }
}

TEST_F(ExperimentTest, ShuffleUsesSameStreams) {
  const auto cfg = small_config();
  const auto r = run_method(*setup_, cfg, Method::kRl, 2);
  const auto a = shuffle_experiment(*setup_, cfg, r.transfer, 5);
  const auto b = shuffle_experiment(*setup_, cfg, r.transfer, 5);
  EXPECT_EQ(a.ordered_agreement, b.ordered_agreement);
  EXPECT_EQ(a.shuffled_agreement, b.shuffled_agreement);
  // Length-1 corpus is unchanged by shuffling, so both students coincide.
  const auto c = shuffle_experiment(*setup_, cfg, {{5}, {6}, {7}}, 5);
  EXPECT_EQ(c.ordered_agreement, c.shuffled_agreement);
}

}  // namespace
}  // namespace dfd
