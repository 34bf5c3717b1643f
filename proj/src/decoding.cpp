// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/decoding.hpp"

#include <algorithm>
#include <numeric>

#include "promptdfd/errors.hpp"

namespace dfd {

void DecodeConfig::validate() const {
  if (top_k < 1) throw InvalidArgument("decode: top_k must be >= 1");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw InvalidArgument("decode: top_p must be in (0, 1]");
  if (max_len < 1 || max_len > kMaxLen) throw InvalidArgument("decode: max_len must be in [1, 128]");
}

namespace {

struct Kept {
  std::vector<std::size_t> ids;
  FilterBound bound;
};

Kept kept_prefix(const ProbVector& dist, const DecodeConfig& cfg) {
  cfg.validate();
  std::vector<std::size_t> order(dist.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
  const std::size_t k = std::min(cfg.top_k, order.size());
  Kept out{{}, FilterBound::kTopK};
  double mass = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (dist[order[i]] <= 0.0) break;
    out.ids.push_back(order[i]);
    mass += dist[order[i]];
    // Small slack so a distribution that sums to 1 - 1e-15 still meets top_p = 1.
    if (mass >= cfg.top_p - 1e-12) {
      out.bound = FilterBound::kTopP;
      break;
    }
  }
  return out;
}

}  // namespace

FilterBound binding_bound(const ProbVector& dist, const DecodeConfig& cfg) { return kept_prefix(dist, cfg).bound; }

ProbVector filter_top_k_p(const ProbVector& dist, const DecodeConfig& cfg) {
  const Kept kept = kept_prefix(dist, cfg);
  Vec out(dist.size(), 0.0);
  double mass = 0.0;
  for (std::size_t i : kept.ids) mass += dist[i];
  for (std::size_t i : kept.ids) out[i] = dist[i] / mass;
  return ProbVector::trusted(std::move(out));
}

TokenSeq SynthSample::full() const {
  TokenSeq out = prompt;
  out.insert(out.end(), content.begin(), content.end());
  return out;
}

SynthSample complete(const CountLM& generator, const TokenSeq& prompt, const DecodeConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (prompt.size() >= cfg.max_len) throw InvalidArgument("complete: prompt must be shorter than max_len");
  SynthSample s{prompt, {}};
  TokenSeq context = prompt;
  while (s.content.size() < cfg.max_new_tokens && context.size() < cfg.max_len) {
    const ProbVector dist = filter_top_k_p(generator.next_dist(context), cfg);
    const auto tok = static_cast<TokenId>(sample_categorical(dist, rng));
    if (tok == kEos) break;
    s.content.push_back(tok);
    context.push_back(tok);
  }
  return s;
}

}  // namespace dfd
