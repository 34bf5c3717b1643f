// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "promptdfd/errors.hpp"
#include "promptdfd/rng.hpp"
#include "promptdfd/vocab.hpp"
#include "promptdfd/world.hpp"

namespace dfd {
namespace {

TEST(Vocab, ReservedIds) {
  const Vocab v({"x"});
  EXPECT_EQ(v.token(kPad), "<pad>");
  EXPECT_EQ(v.token(kBos), "<bos>");
  EXPECT_EQ(v.token(kEos), "<eos>");
  EXPECT_EQ(v.token(kUnk), "<unk>");
  EXPECT_EQ(v.size(), 5u);
  EXPECT_EQ(v.id("x"), 4u);
  EXPECT_THROW(v.token(5), InvalidArgument);
}

TEST(Vocab, RejectsDuplicatesAndReserved) {
  EXPECT_THROW(Vocab({"a", "a"}), InvalidArgument);
  EXPECT_THROW(Vocab({"a", "<eos>"}), InvalidArgument);
}

TEST(BuildVocab, FrequencyThenLexicographic) {
  const auto v = build_vocab({"a b", "b c"});
  ASSERT_EQ(v.size(), 7u);
  EXPECT_EQ(v.token(4), "b");
  EXPECT_EQ(v.token(5), "a");
  EXPECT_EQ(v.token(6), "c");
}

TEST(BuildVocab, EmptyStringGivesReservedOnly) {
  const auto v = build_vocab({""});
  EXPECT_EQ(v.size(), kNumReserved);
  const auto ids = encode(v, "hello world");
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(ids[0], kUnk);
  EXPECT_EQ(ids[1], kUnk);
}

TEST(BuildVocab, EmptyCorpusRejected) { EXPECT_THROW(build_vocab({}), InvalidArgument); }

TEST(BuildVocab, Deterministic) {
  const std::vector<std::string> corpus = {"z y x", "x y", "w", "x"};
  EXPECT_EQ(build_vocab(corpus), build_vocab(corpus));
  const auto v = build_vocab(corpus);
  EXPECT_EQ(v.token(4), "x");
  EXPECT_EQ(v.token(5), "y");
  EXPECT_EQ(v.token(6), "w");
  EXPECT_EQ(v.token(7), "z");
}

TEST(Encode, RoundTripAndUnknown) {
  const auto v = build_vocab({"the game ended"});
  EXPECT_EQ(decode(v, encode(v, "the game ended")), "the game ended");
  const auto unk = encode(v, "zzz-not-in-vocab");
  ASSERT_EQ(unk.size(), 1u);
  EXPECT_EQ(unk[0], kUnk);
  EXPECT_EQ(encode(v, "  the \t game\n").size(), 2u);
}

TEST(Encode, TruncatesToMaxLen) {
  const auto v = build_vocab({"a"});
  std::string text;
  for (int i = 0; i < 200; ++i) text += "a ";
  EXPECT_EQ(encode(v, text).size(), kMaxLen);
  EXPECT_EQ(encode(v, text, 10).size(), 10u);
}

TEST(Decode, RejectsOutOfRange) {
  const auto v = build_vocab({"a"});
  EXPECT_THROW(decode(v, {4, 5}), InvalidArgument);
}

TEST(Vocab, RoundTripOnSyntheticCorpus) {
  const auto world = make_world(WorldParams::reference());
  RngStream rng(1);
  const auto data = sample_labeled(world, 10000, rng);
  std::vector<std::string> corpus;
  for (const auto& ex : data) corpus.push_back(decode(world.vocab(), ex.x));
  const auto v = build_vocab(corpus);
  for (const auto& s : corpus) ASSERT_EQ(decode(v, encode(v, s)), s);
  for (TokenId id = 0; id < v.size(); ++id) EXPECT_EQ(v.id(v.token(id)), id);
}

}  // namespace
}  // namespace dfd
