// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "promptdfd/numerics.hpp"
#include "promptdfd/vocab.hpp"

namespace dfd {

/// Frozen add-k smoothed n-gram model.
///
/// Training pads every sequence with (order - 1) <bos> tokens and appends
/// <eos>. A query uses the longest history (up to order - 1 tokens) that was
/// seen in training:
///
///   Pr(w | h) = (c(h, w) + k) / (c(h) + k * |V \ {<pad>}|)
///
/// falling back to shorter histories while c(h) = 0. <pad> always gets 0.
class CountLM {
 public:
  CountLM() = default;
  CountLM(std::size_t vocab_size, std::size_t order, double k_smooth);

  std::size_t order() const { return order_; }
  double k_smooth() const { return k_smooth_; }
  std::size_t vocab_size() const { return vocab_size_; }

  /// Counts for history `h` (length < order), or nullptr when unseen.
  const std::vector<std::uint32_t>* counts(const TokenSeq& h) const;
  std::uint64_t history_total(const TokenSeq& h) const;

  ProbVector next_dist(const TokenSeq& context) const;

  /// FNV-1a over the count tables; changes iff the tables change.
  std::uint64_t checksum() const;

  /// Raw tables, keyed by history, for serialization.
  const std::map<TokenSeq, std::vector<std::uint32_t>>& tables() const { return tables_; }
  void set_table(const TokenSeq& history, std::vector<std::uint32_t> counts);

  friend bool operator==(const CountLM&, const CountLM&) = default;

 private:
  friend CountLM fit_count_lm(const std::vector<TokenSeq>&, std::size_t, std::size_t, double);
  std::size_t vocab_size_ = 0, order_ = 0;
  double k_smooth_ = 0.0;
  std::map<TokenSeq, std::vector<std::uint32_t>> tables_;
};

CountLM fit_count_lm(const std::vector<TokenSeq>& corpus, std::size_t vocab_size, std::size_t order = 3,
                     double k_smooth = 0.1);

}  // namespace dfd
