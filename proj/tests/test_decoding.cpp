// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <numeric>

#include "promptdfd/count_lm.hpp"
#include "promptdfd/decoding.hpp"
#include "promptdfd/errors.hpp"
#include "promptdfd/world.hpp"

namespace dfd {

namespace {

DecodeConfig make_cfg(std::size_t k, double p, std::size_t max_new = 40) {
  DecodeConfig c;
  c.top_k = k;
  c.top_p = p;
  c.max_new_tokens = max_new;
  return c;
}

TEST(Filter, WorkedExample) {
  const ProbVector d(Vec{0.5, 0.3, 0.15, 0.05});
  const ProbVector f = filter_top_k_p(d, make_cfg(3, 0.9));
  EXPECT_NEAR(f[0], 0.5 / 0.95, 1e-15);
  EXPECT_NEAR(f[1], 0.3 / 0.95, 1e-15);
  EXPECT_NEAR(f[2], 0.15 / 0.95, 1e-15);
  EXPECT_EQ(f[3], 0.0);
  EXPECT_EQ(binding_bound(d, make_cfg(3, 0.9)), FilterBound::kTopP);
}

TEST(Filter, TopKOneIsArgmax) {
  const ProbVector d(Vec{0.2, 0.5, 0.3});
  const ProbVector f = filter_top_k_p(d, make_cfg(1, 0.95));
  EXPECT_EQ(f.values(), (Vec{0.0, 1.0, 0.0}));
  EXPECT_EQ(binding_bound(d, make_cfg(1, 0.95)), FilterBound::kTopK);
}

TEST(Filter, IdentityAtFullSupport) {
  const ProbVector d(Vec{0.1, 0.2, 0.3, 0.4});
  const ProbVector f = filter_top_k_p(d, make_cfg(4, 1.0));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(f[i], d[i], 1e-15);
}

TEST(Filter, TiesBreakByLowerId) {
  const ProbVector d(Vec{0.25, 0.25, 0.25, 0.25});
  const ProbVector f = filter_top_k_p(d, make_cfg(2, 1.0));
  EXPECT_EQ(f.values(), (Vec{0.5, 0.5, 0.0, 0.0}));
}

TEST(Filter, CrossingTokenIsKept) {
  const ProbVector d(Vec{0.6, 0.3, 0.1});
  // 0.6 < 0.7, 0.9 >= 0.7: keep the first two.
  const ProbVector f = filter_top_k_p(d, make_cfg(3, 0.7));
  EXPECT_NEAR(f[0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(f[1], 1.0 / 3, 1e-15);
  EXPECT_EQ(f[2], 0.0);
}

TEST(Filter, RandomizedInvariants) {
  RngStream rng(1);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 2 + rng.uniform_int(30);
    Vec z(n);
    for (auto& v : z) v = 3.0 * rng.normal();
    const ProbVector d = softmax(z);
    const auto cfg = make_cfg(1 + rng.uniform_int(n), 0.05 + 0.95 * rng.uniform());
    const ProbVector f = filter_top_k_p(d, cfg);
    ASSERT_TRUE(ProbVector::is_valid(f.span()));
    std::size_t support = 0;
    double kept_mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (f[j] > 0.0) {
        ++support;
        kept_mass += d[j];
      }
    }
    EXPECT_LE(support, cfg.top_k);
    if (binding_bound(d, cfg) == FilterBound::kTopP)
      EXPECT_GE(kept_mass, cfg.top_p - 1e-12);
    else
      EXPECT_EQ(support, cfg.top_k);
    // Kept tokens dominate dropped ones.
    double min_kept = 1.0, max_dropped = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (f[j] > 0.0)
        min_kept = std::min(min_kept, d[j]);
      else
        max_dropped = std::max(max_dropped, d[j]);
    }
    EXPECT_GE(min_kept, max_dropped);
  }
}

TEST(Filter, RejectsBadConfig) {
  const ProbVector d(Vec{0.5, 0.5});
  EXPECT_THROW(filter_top_k_p(d, make_cfg(0, 0.9)), InvalidArgument);
  EXPECT_THROW(filter_top_k_p(d, make_cfg(1, 0.0)), InvalidArgument);
  EXPECT_THROW(filter_top_k_p(d, make_cfg(1, 1.5)), InvalidArgument);
}

class CompleteTest : public ::testing::Test {
 protected:
  Vocab vocab{{"a", "b", "c"}};
  TokenId a = vocab.id("a"), b = vocab.id("b"), c = vocab.id("c");
};

TEST_F(CompleteTest, GreedyFollowsSingleSentence) {
  const CountLM lm = fit_count_lm({{a, b, c}}, vocab.size());
  RngStream rng(2);
  const SynthSample s = complete(lm, {a}, make_cfg(1, 0.95), rng);
  EXPECT_EQ(s.prompt, TokenSeq{a});
  EXPECT_EQ(s.content, (TokenSeq{b, c}));
  EXPECT_EQ(s.full(), (TokenSeq{a, b, c}));
}

TEST_F(CompleteTest, ZeroNewTokens) {
  const CountLM lm = fit_count_lm({{a, b, c}}, vocab.size());
  RngStream rng(3);
  const SynthSample s = complete(lm, {a, b}, make_cfg(50, 0.95, 0), rng);
  EXPECT_TRUE(s.content.empty());
  EXPECT_EQ(s.full(), (TokenSeq{a, b}));
}

TEST_F(CompleteTest, RespectsMaxLenAndPromptBound) {
  const CountLM lm = fit_count_lm({{a, a, a, a}}, vocab.size());
  auto cfg = make_cfg(1, 0.95, 100);
  cfg.max_len = 5;
  RngStream rng(4);
  const SynthSample s = complete(lm, {a}, cfg, rng);
  EXPECT_LE(s.full().size(), 5u);
  EXPECT_THROW(complete(lm, {a, a, a, a, a}, cfg, rng), InvalidArgument);
}

TEST(Complete, DeterministicAndNeverPads) {
  const World world = make_world(WorldParams::reference());
  RngStream data(5);
  const CountLM lm = fit_count_lm(sample_unlabeled(world, 400, true, data), world.vocab().size());
  const DecodeConfig cfg;
  for (std::uint64_t i = 0; i < 200; ++i) {
    RngStream r1(6, {i}), r2(6, {i});
    const TokenSeq prompt = {world.vocab().id("the")};
    const SynthSample s1 = complete(lm, prompt, cfg, r1), s2 = complete(lm, prompt, cfg, r2);
    EXPECT_EQ(s1, s2);
    EXPECT_LE(s1.content.size(), cfg.max_new_tokens);
    for (TokenId t : s1.content) {
      EXPECT_NE(t, kPad);
      EXPECT_NE(t, kEos);
    }
  }
}

TEST(Complete, FirstTokenFrequenciesMatchFilteredDistribution) {
  const World world = make_world(WorldParams::reference());
  RngStream data(7);
  const CountLM lm = fit_count_lm(sample_unlabeled(world, 400, true, data), world.vocab().size());
  const DecodeConfig cfg = make_cfg(50, 0.95, 1);
  const TokenSeq prompt = {world.vocab().id("the")};
  const ProbVector want = filter_top_k_p(lm.next_dist(prompt), cfg);
  constexpr std::size_t kDraws = 100000;
  Vec freq(want.size(), 0.0);
  RngStream rng(8);
  for (std::size_t i = 0; i < kDraws; ++i) {
    const SynthSample s = complete(lm, prompt, cfg, rng);
    freq[s.content.empty() ? kEos : s.content[0]] += 1.0 / kDraws;
  }
  for (std::size_t t = 0; t < want.size(); ++t) EXPECT_NEAR(freq[t], want[t], 0.02) << "token " << t;
}

}  // namespace
}  // namespace dfd
