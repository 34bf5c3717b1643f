// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/count_lm.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include "promptdfd/errors.hpp"

namespace dfd {

CountLM::CountLM(std::size_t vocab_size, std::size_t order, double k_smooth)
    : vocab_size_(vocab_size), order_(order), k_smooth_(k_smooth) {
  if (order < 1) throw InvalidArgument("CountLM: order must be >= 1");
  if (!(k_smooth > 0.0)) throw InvalidArgument("CountLM: smoothing constant must be > 0");
  if (vocab_size <= kNumReserved) throw InvalidArgument("CountLM: vocabulary too small");
}

const std::vector<std::uint32_t>* CountLM::counts(const TokenSeq& h) const {
  auto it = tables_.find(h);
  return it == tables_.end() ? nullptr : &it->second;
}

std::uint64_t CountLM::history_total(const TokenSeq& h) const {
  const auto* c = counts(h);
  if (!c) return 0;
  return std::accumulate(c->begin(), c->end(), std::uint64_t{0});
}

void CountLM::set_table(const TokenSeq& history, std::vector<std::uint32_t> counts) {
  if (history.size() >= order_ || counts.size() != vocab_size_)
    throw InvalidArgument("CountLM: malformed count table");
  tables_[history] = std::move(counts);
}

ProbVector CountLM::next_dist(const TokenSeq& context) const {
  // Last (order - 1) tokens of <bos>-padded context.
  const std::size_t h = order_ - 1;
  TokenSeq hist(h, kBos);
  const std::size_t take = std::min(h, context.size());
  std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(),
            hist.end() - static_cast<std::ptrdiff_t>(take));

  const double support = static_cast<double>(vocab_size_ - 1);  // all but <pad>
  for (std::size_t len = h + 1; len-- > 0;) {
    const TokenSeq sub(hist.end() - static_cast<std::ptrdiff_t>(len), hist.end());
    const auto* c = counts(sub);
    if (!c) continue;
    const double total = static_cast<double>(std::accumulate(c->begin(), c->end(), std::uint64_t{0}));
    if (total == 0.0) continue;
    Vec p(vocab_size_);
    const double denom = total + k_smooth_ * support;
    for (std::size_t w = 0; w < vocab_size_; ++w) p[w] = w == kPad ? 0.0 : ((*c)[w] + k_smooth_) / denom;
    return ProbVector::trusted(std::move(p));
  }
  Vec uniform(vocab_size_, 1.0 / support);
  uniform[kPad] = 0.0;
  return ProbVector::trusted(std::move(uniform));
}

std::uint64_t CountLM::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  feed(vocab_size_);
  feed(order_);
  std::uint64_t kbits;
  static_assert(sizeof(kbits) == sizeof(k_smooth_));
  std::memcpy(&kbits, &k_smooth_, sizeof(kbits));
  feed(kbits);
  for (const auto& [hist, counts] : tables_) {
    feed(hist.size());
    for (TokenId t : hist) feed(t);
    for (auto c : counts) feed(c);
  }
  return h;
}

CountLM fit_count_lm(const std::vector<TokenSeq>& corpus, std::size_t vocab_size, std::size_t order,
                     double k_smooth) {
  if (corpus.empty()) throw InvalidArgument("fit_count_lm: empty corpus");
  CountLM lm(vocab_size, order, k_smooth);
  const std::size_t h = order - 1;
  for (const auto& seq : corpus) {
    TokenSeq padded(h, kBos);
    padded.insert(padded.end(), seq.begin(), seq.end());
    padded.push_back(kEos);
    for (std::size_t i = h; i < padded.size(); ++i) {
      const TokenId w = padded[i];
      if (w >= vocab_size) throw InvalidArgument("fit_count_lm: token id out of range");
      for (std::size_t len = 0; len <= h; ++len) {
        TokenSeq hist(padded.begin() + static_cast<std::ptrdiff_t>(i - len),
                      padded.begin() + static_cast<std::ptrdiff_t>(i));
        auto& row = lm.tables_[hist];
        if (row.empty()) row.assign(vocab_size, 0);
        ++row[w];
      }
    }
  }
  return lm;
}

}  // namespace dfd
