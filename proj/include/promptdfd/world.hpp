// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "promptdfd/errors.hpp"
#include "promptdfd/numerics.hpp"
#include "promptdfd/rng.hpp"
#include "promptdfd/vocab.hpp"

namespace dfd {

/// Parameters of the synthetic ground-truth text distribution.
///
/// Every class shares one sparse random bigram skeleton; class c multiplies
/// the weight of transitions into its own keywords by `keyword_boost`. With
/// boost 1 all class chains coincide. The background chain instead scales
/// every keyword column by `background_keyword_factor`.
struct WorldParams {
  std::vector<std::string> class_names;
  std::vector<std::vector<std::string>> keywords;
  std::vector<std::string> background;
  double keyword_boost = 6.0;
  double background_keyword_factor = 0.25;
  std::size_t background_successors = 6;
  std::size_t keyword_successors = 2;
  std::size_t min_len = 8;
  std::size_t max_len = 32;
  double background_mix = 0.5;
  std::uint64_t seed = 20220723;

  std::size_t num_classes() const { return class_names.size(); }

  /// Throws InvalidArgument naming the broken invariant.
  void validate() const;

  /// Four news-like classes: world, sports, business, science.
  static WorldParams reference();
};

struct LabeledExample {
  TokenSeq x;
  std::size_t y = 0;
  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Row-stochastic bigram table over the vocabulary. Row r is the next-token
/// distribution after token r (row kBos starts a sentence).
struct TransitionTable {
  std::size_t dim = 0;
  Vec probs;  // dim x dim, row major
  double at(std::size_t from, std::size_t to) const { return probs[from * dim + to]; }
  std::span<const double> row(std::size_t from) const { return {probs.data() + from * dim, dim}; }
  friend bool operator==(const TransitionTable&, const TransitionTable&) = default;
};

class World {
 public:
  World(WorldParams wp, Vocab vocab, std::vector<TransitionTable> class_chains,
        TransitionTable background_chain);

  const WorldParams& params() const { return params_; }
  const Vocab& vocab() const { return vocab_; }
  std::size_t num_classes() const { return params_.num_classes(); }
  const TransitionTable& class_chain(std::size_t c) const { return class_chains_.at(c); }
  const TransitionTable& background_chain() const { return background_chain_; }

  /// Keyword ids of class c.
  const std::vector<TokenId>& keyword_ids(std::size_t c) const { return keyword_ids_.at(c); }
  /// Every keyword id, class by class.
  std::vector<TokenId> all_keyword_ids() const;
  std::optional<std::size_t> keyword_class(TokenId id) const;
  TokenId class_name_id(std::size_t c) const;

  /// Draws `length` tokens from `chain` starting after <bos>.
  TokenSeq sample_chain(const TransitionTable& chain, std::size_t length, RngStream& rng) const;

  friend bool operator==(const World&, const World&);

 private:
  WorldParams params_;
  Vocab vocab_;
  std::vector<TransitionTable> class_chains_;
  TransitionTable background_chain_;
  std::vector<std::vector<TokenId>> keyword_ids_;
};

bool operator==(const WorldParams&, const WorldParams&);

/// Deterministic realization of `wp` from wp.seed.
World make_world(const WorldParams& wp);

/// Uniform class, uniform length, tokens from the class chain.
std::vector<LabeledExample> sample_labeled(const World& world, std::size_t n, RngStream& rng);

/// Unlabeled text. With include_background each sequence comes from the
/// background chain with probability `background_mix` (default: the world's).
std::vector<TokenSeq> sample_unlabeled(const World& world, std::size_t n, bool include_background,
                                       RngStream& rng, std::optional<double> background_mix = {});

/// Stationary distribution of a row-stochastic table by power iteration
/// started from the <bos> row.
Vec stationary_distribution(const TransitionTable& chain, std::size_t iterations = 2000);

template <typename T>
struct Split {
  std::vector<T> train, dev, test;
};

/// Contiguous deterministic partition by cumulative rounded fractions.
template <typename T>
Split<T> split(const std::vector<T>& data, const std::vector<double>& fractions) {
  if (fractions.size() != 3) throw InvalidArgument("split: expected 3 fractions");
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0 || !std::isfinite(f)) throw InvalidArgument("split: fractions must be >= 0");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("split: fractions must sum to 1");
  const auto n = static_cast<double>(data.size());
  const auto b1 = static_cast<std::size_t>(std::llround(fractions[0] * n));
  const auto b2 = std::min(data.size(), static_cast<std::size_t>(std::llround((fractions[0] + fractions[1]) * n)));
  Split<T> out;
  out.train.assign(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(b1));
  out.dev.assign(data.begin() + static_cast<std::ptrdiff_t>(b1), data.begin() + static_cast<std::ptrdiff_t>(b2));
  out.test.assign(data.begin() + static_cast<std::ptrdiff_t>(b2), data.end());
  return out;
}

}  // namespace dfd
