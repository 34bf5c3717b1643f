// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "promptdfd/errors.hpp"
#include "promptdfd/eval.hpp"
#include "promptdfd/world.hpp"

namespace dfd {
namespace {

WorldParams tiny_params(double boost) {
  WorldParams s;
  s.class_names = {"alpha", "beta"};
  s.keywords = {{"alpha"}, {"beta"}};
  s.background = {"a", "b", "c", "d", "e", "f", "g", "h"};
  s.keyword_boost = boost;
  s.background_successors = 4;
  s.keyword_successors = 1;
  s.seed = 5;
  return s;
}

const World& reference_world() {
  static const World w = make_world(WorldParams::reference());
  return w;
}

TEST(WorldParams, ReferenceAccepted) {
  const auto s = WorldParams::reference();
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.num_classes(), 4u);
  EXPECT_EQ(s.class_names, (std::vector<std::string>{"world", "sports", "business", "science"}));
}

TEST(WorldParams, RejectsInvalid) {
  auto s = tiny_params(3.0);
  s.keywords = {{"alpha", "x"}, {"beta", "x"}};
  EXPECT_THROW(make_world(s), InvalidArgument);
  s = tiny_params(3.0);
  s.class_names = {"alpha"};
  s.keywords = {{"alpha"}};
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = tiny_params(3.0);
  s.min_len = 2;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = tiny_params(3.0);
  s.max_len = 129;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = tiny_params(0.5);
  EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(World, EveryRowIsADistribution) {
  const auto& w = reference_world();
  auto check = [](const TransitionTable& t) {
    for (std::size_t r = 0; r < t.dim; ++r) ASSERT_TRUE(ProbVector::is_valid(t.row(r))) << "row " << r;
  };
  for (std::size_t c = 0; c < w.num_classes(); ++c) check(w.class_chain(c));
  check(w.background_chain());
}

TEST(World, NeverEmitsReservedTokens) {
  const auto& w = reference_world();
  for (std::size_t c = 0; c < w.num_classes(); ++c)
    for (std::size_t r = 0; r < w.vocab().size(); ++r)
      for (TokenId t = 0; t < kNumReserved; ++t) EXPECT_EQ(w.class_chain(c).at(r, t), 0.0);
}

TEST(World, DeterministicUnderSeed) {
  EXPECT_TRUE(make_world(WorldParams::reference()) == reference_world());
  auto other = WorldParams::reference();
  other.seed += 1;
  EXPECT_FALSE(make_world(other) == reference_world());
}

TEST(World, OwnKeywordMoreFrequentInStationaryDistribution) {
  const auto w = make_world(tiny_params(4.0));
  const TokenId alpha = w.keyword_ids(0)[0], beta = w.keyword_ids(1)[0];
  const auto pi0 = stationary_distribution(w.class_chain(0));
  const auto pi1 = stationary_distribution(w.class_chain(1));
  EXPECT_GT(pi0[alpha], pi0[beta]);
  EXPECT_GT(pi1[beta], pi1[alpha]);
  EXPECT_NEAR(std::accumulate(pi0.begin(), pi0.end(), 0.0), 1.0, 1e-9);
}

TEST(World, BoostOneMakesClassesIdentical) {
  const auto w = make_world(tiny_params(1.0));
  EXPECT_EQ(w.class_chain(0), w.class_chain(1));
}

TEST(SampleLabeled, DeterministicBalancedAndInRange) {
  const auto& w = reference_world();
  RngStream a(1), b(1);
  EXPECT_EQ(sample_labeled(w, 1, a), sample_labeled(w, 1, b));
  RngStream rng(2);
  const auto data = sample_labeled(w, 10000, rng);
  std::vector<std::size_t> counts(4, 0);
  for (const auto& ex : data) {
    ASSERT_LT(ex.y, 4u);
    ++counts[ex.y];
    ASSERT_GE(ex.x.size(), w.params().min_len);
    ASSERT_LE(ex.x.size(), w.params().max_len);
  }
  for (auto c : counts) EXPECT_NEAR(static_cast<double>(c) / 10000.0, 0.25, 0.02);
  EXPECT_THROW(sample_labeled(w, 0, rng), InvalidArgument);
}

TEST(SampleUnlabeled, ClassOnlyStaysInClassSupport) {
  const auto& w = reference_world();
  RngStream rng(3);
  const auto xs = sample_unlabeled(w, 1, false, rng);
  ASSERT_EQ(xs.size(), 1u);
  TokenId prev = kBos;
  for (TokenId t : xs[0]) {
    bool supported = false;
    for (std::size_t c = 0; c < w.num_classes(); ++c) supported |= w.class_chain(c).at(prev, t) > 0.0;
    EXPECT_TRUE(supported);
    prev = t;
  }
}

TEST(SampleUnlabeled, FullMixtureIsPureBackground) {
  const auto& w = reference_world();
  RngStream rng(4), replay(4);
  const auto xs = sample_unlabeled(w, 50, true, rng, 1.0);
  for (const auto& x : xs) {
    const auto len = static_cast<std::size_t>(replay.uniform_range(
        static_cast<std::int64_t>(w.params().min_len), static_cast<std::int64_t>(w.params().max_len)));
    (void)replay.uniform();
    EXPECT_EQ(x, w.sample_chain(w.background_chain(), len, replay));
  }
}

TEST(SampleUnlabeled, BackgroundHasFewerKeywords) {
  const auto& w = reference_world();
  RngStream a(5), b(6);
  const auto background = sample_unlabeled(w, 10000, true, a, 1.0);
  std::vector<TokenSeq> labeled;
  for (const auto& ex : sample_labeled(w, 10000, b)) labeled.push_back(ex.x);
  const auto kws = w.all_keyword_ids();
  EXPECT_LT(keyword_rate(background, kws), keyword_rate(labeled, kws));
}

// A keyword counter with per-class centroids separates the classes, so the
// world is learnable before any model is involved.
TEST(World, NearestCentroidKeywordCounterIsAccurate) {
  const auto& w = reference_world();
  const std::size_t C = w.num_classes();
  auto features = [&](const TokenSeq& x) {
    Vec f(C, 0.0);
    for (TokenId t : x)
      if (auto c = w.keyword_class(t)) f[*c] += 1.0 / static_cast<double>(x.size());
    return f;
  };
  RngStream tr(7), te(8);
  const auto train = sample_labeled(w, 5000, tr);
  const auto test = sample_labeled(w, 2000, te);
  std::vector<Vec> centroid(C, Vec(C, 0.0));
  std::vector<double> n(C, 0.0);
  for (const auto& ex : train) {
    const auto f = features(ex.x);
    for (std::size_t k = 0; k < C; ++k) centroid[ex.y][k] += f[k];
    n[ex.y] += 1.0;
  }
  for (std::size_t c = 0; c < C; ++c)
    for (auto& v : centroid[c]) v /= n[c];
  std::size_t correct = 0;
  for (const auto& ex : test) {
    const auto f = features(ex.x);
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t c = 0; c < C; ++c) {
      double d = 0.0;
      for (std::size_t k = 0; k < C; ++k) d += (f[k] - centroid[c][k]) * (f[k] - centroid[c][k]);
      if (d < best_d) best_d = d, best = c;
    }
    correct += best == ex.y;
  }
  EXPECT_GT(static_cast<double>(correct) / test.size(), 0.90);
}

TEST(Split, Sizes) {
  std::vector<int> data(1000);
  std::iota(data.begin(), data.end(), 0);
  const auto s = split(data, {0.8, 0.1, 0.1});
  EXPECT_EQ(s.train.size(), 800u);
  EXPECT_EQ(s.dev.size(), 100u);
  EXPECT_EQ(s.test.size(), 100u);
  const auto all = split(data, {1.0, 0.0, 0.0});
  EXPECT_EQ(all.train.size(), 1000u);
  EXPECT_TRUE(all.dev.empty());
  EXPECT_TRUE(all.test.empty());
  EXPECT_THROW(split(data, {0.5, 0.6, 0.1}), InvalidArgument);
  EXPECT_THROW(split(data, {-0.1, 1.0, 0.1}), InvalidArgument);
}

TEST(Split, DisjointCover) {
  RngStream rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> data(1 + rng.uniform_int(500));
    std::iota(data.begin(), data.end(), 0);
    const double a = rng.uniform(), b = rng.uniform() * (1.0 - a);
    const auto s = split(data, {a, b, 1.0 - a - b});
    std::multiset<int> seen(s.train.begin(), s.train.end());
    seen.insert(s.dev.begin(), s.dev.end());
    seen.insert(s.test.begin(), s.test.end());
    EXPECT_EQ(seen, std::multiset<int>(data.begin(), data.end()));
  }
}

}  // namespace
}  // namespace dfd
