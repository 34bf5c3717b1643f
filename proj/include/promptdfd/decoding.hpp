// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "promptdfd/count_lm.hpp"
#include "promptdfd/numerics.hpp"
#include "promptdfd/rng.hpp"
#include "promptdfd/vocab.hpp"

namespace dfd {

struct DecodeConfig {
  std::size_t top_k = 50;
  double top_p = 0.95;
  std::size_t max_new_tokens = 40;
  std::size_t max_len = kMaxLen;

  /// Throws InvalidArgument on top_k < 1, top_p outside (0,1] or max_len > 128.
  void validate() const;
};

/// Top-k truncation followed by nucleus truncation among the survivors.
///
/// Candidates are ranked by descending probability with ties broken by
/// lower id. The first top_k are kept, then the shortest ranked prefix whose
/// mass reaches top_p (the crossing token is included). The result is
/// renormalized.
ProbVector filter_top_k_p(const ProbVector& dist, const DecodeConfig& cfg);

/// Which bound ended the kept prefix in filter_top_k_p.
enum class FilterBound { kTopP, kTopK };
FilterBound binding_bound(const ProbVector& dist, const DecodeConfig& cfg);

struct SynthSample {
  TokenSeq prompt;
  TokenSeq content;
  TokenSeq full() const;
  friend bool operator==(const SynthSample&, const SynthSample&) = default;
};

/// Autoregressive completion of `prompt` with the frozen generator. Stops on
/// <eos> (not emitted), after max_new_tokens, or when the full sequence
/// reaches max_len. Prompt tokens are conditioned on and never resampled.
SynthSample complete(const CountLM& generator, const TokenSeq& prompt, const DecodeConfig& cfg, RngStream& rng);

}  // namespace dfd
