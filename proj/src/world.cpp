// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/world.hpp"

#include <algorithm>
#include <set>

namespace dfd {

void WorldParams::validate() const {
  const std::size_t c = class_names.size();
  if (c < 2) throw InvalidArgument("world: need at least 2 classes");
  if (keywords.size() != c) throw InvalidArgument("world: one keyword set per class required");
  std::set<std::string> seen;
  for (const auto& n : class_names)
    if (n.empty()) throw InvalidArgument("world: empty class name");
  for (std::size_t i = 0; i < c; ++i) {
    if (keywords[i].empty()) throw InvalidArgument("world: class " + class_names[i] + " has no keywords");
    for (const auto& k : keywords[i])
      if (!seen.insert(k).second) throw InvalidArgument("world: keyword '" + k + "' appears in more than one set");
  }
  if (background.empty()) throw InvalidArgument("world: empty background pool");
  for (const auto& b : background)
    if (!seen.insert(b).second) throw InvalidArgument("world: background token '" + b + "' duplicates a keyword");
  if (!(keyword_boost >= 1.0)) throw InvalidArgument("world: keyword_boost must be >= 1");
  if (!(background_keyword_factor > 0.0)) throw InvalidArgument("world: background_keyword_factor must be > 0");
  if (min_len < 3) throw InvalidArgument("world: min_len must be >= 3");
  if (max_len > kMaxLen || max_len < min_len) throw InvalidArgument("world: need min_len <= max_len <= 128");
  if (background_successors == 0 || background_successors > background.size())
    throw InvalidArgument("world: background_successors out of range");
  for (const auto& k : keywords)
    if (keyword_successors > k.size()) throw InvalidArgument("world: keyword_successors exceeds a keyword set");
  if (!(background_mix >= 0.0 && background_mix <= 1.0)) throw InvalidArgument("world: background_mix must be in [0,1]");
}

WorldParams WorldParams::reference() {
  WorldParams s;
  s.class_names = {"world", "sports", "business", "science"};
  s.keywords = {
      {"world", "war", "election", "president", "minister", "treaty", "embassy", "border", "refugees", "summit"},
      {"sports", "game", "team", "coach", "season", "league", "match", "player", "tournament", "goal"},
      {"business", "market", "stocks", "profit", "company", "shares", "investors", "bank", "trade", "earnings"},
      {"science", "research", "space", "study", "scientists", "lab", "energy", "data", "climate", "telescope"},
  };
  s.background = {"The", "It",   "To",    "There", "What", "This",  "All",  "If",   "We",    "A",
                  "latest", "news", "the", "of",    "and",  "to",    "in",   "on",   "for",   "with",
                  "said", "at",   "by",    "from",  "was",  "is",    "has",  "it",   "that",  "as",
                  "new",  "after", "over", "his",   "their", "about", "more", "first", "year", "week",
                  "two",  "could", "will", "one",   "people", "also", "but",  "report", "today", "time"};
  return s;
}

bool operator==(const WorldParams& a, const WorldParams& b) {
  return a.class_names == b.class_names && a.keywords == b.keywords && a.background == b.background &&
         a.keyword_boost == b.keyword_boost && a.background_keyword_factor == b.background_keyword_factor &&
         a.background_successors == b.background_successors && a.keyword_successors == b.keyword_successors &&
         a.min_len == b.min_len && a.max_len == b.max_len && a.background_mix == b.background_mix &&
         a.seed == b.seed;
}

World::World(WorldParams wp, Vocab vocab, std::vector<TransitionTable> class_chains,
             TransitionTable background_chain)
    : params_(std::move(wp)),
      vocab_(std::move(vocab)),
      class_chains_(std::move(class_chains)),
      background_chain_(std::move(background_chain)) {
  params_.validate();
  if (class_chains_.size() != params_.num_classes()) throw InvalidArgument("World: chain count mismatch");
  for (const auto* t : {&background_chain_}) {
    if (t->dim != vocab_.size()) throw InvalidArgument("World: table dimension mismatch");
  }
  for (const auto& t : class_chains_)
    if (t.dim != vocab_.size()) throw InvalidArgument("World: table dimension mismatch");
  for (const auto& ks : params_.keywords) {
    std::vector<TokenId> ids;
    for (const auto& k : ks) {
      auto id = vocab_.find(k);
      if (!id) throw InvalidArgument("World: keyword '" + k + "' missing from vocab");
      ids.push_back(*id);
    }
    keyword_ids_.push_back(std::move(ids));
  }
}

std::vector<TokenId> World::all_keyword_ids() const {
  std::vector<TokenId> out;
  for (const auto& ks : keyword_ids_) out.insert(out.end(), ks.begin(), ks.end());
  return out;
}

std::optional<std::size_t> World::keyword_class(TokenId id) const {
  for (std::size_t c = 0; c < keyword_ids_.size(); ++c)
    if (std::find(keyword_ids_[c].begin(), keyword_ids_[c].end(), id) != keyword_ids_[c].end()) return c;
  return std::nullopt;
}

TokenId World::class_name_id(std::size_t c) const { return vocab_.id(params_.class_names.at(c)); }

TokenSeq World::sample_chain(const TransitionTable& chain, std::size_t length, RngStream& rng) const {
  TokenSeq out;
  out.reserve(length);
  std::size_t prev = kBos;
  for (std::size_t i = 0; i < length; ++i) {
    prev = sample_categorical(chain.row(prev), rng);
    out.push_back(static_cast<TokenId>(prev));
  }
  return out;
}

bool operator==(const World& a, const World& b) {
  return a.params_ == b.params_ && a.vocab_ == b.vocab_ && a.class_chains_ == b.class_chains_ &&
         a.background_chain_ == b.background_chain_;
}

namespace {

// Picks k distinct entries of `pool` uniformly.
std::vector<TokenId> pick_distinct(const std::vector<TokenId>& pool, std::size_t k, RngStream& rng) {
  std::vector<TokenId> p = pool;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + rng.uniform_int(p.size() - i);
    std::swap(p[i], p[j]);
  }
  p.resize(k);
  return p;
}

TransitionTable normalized(std::size_t dim, Vec weights) {
  for (std::size_t r = 0; r < dim; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < dim; ++c) sum += weights[r * dim + c];
    if (sum > 0.0)
      for (std::size_t c = 0; c < dim; ++c) weights[r * dim + c] /= sum;
  }
  return TransitionTable{dim, std::move(weights)};
}

}  // namespace

World make_world(const WorldParams& wp) {
  wp.validate();
  std::vector<std::string> content = wp.background;
  for (const auto& ks : wp.keywords) content.insert(content.end(), ks.begin(), ks.end());
  Vocab vocab(content);
  const std::size_t dim = vocab.size();

  std::vector<TokenId> background_ids;
  for (const auto& b : wp.background) background_ids.push_back(*vocab.find(b));
  std::vector<std::vector<TokenId>> keyword_ids;
  std::vector<int> owner(dim, -1);
  for (std::size_t c = 0; c < wp.num_classes(); ++c) {
    std::vector<TokenId> ids;
    for (const auto& k : wp.keywords[c]) {
      ids.push_back(*vocab.find(k));
      owner[ids.back()] = static_cast<int>(c);
    }
    keyword_ids.push_back(std::move(ids));
  }

  // Shared sparse skeleton. Rows: <bos> and every content token.
  RngStream rng(wp.seed, {0x776f726c64});
  Vec base(dim * dim, 0.0);
  for (std::size_t r = 0; r < dim; ++r) {
    if (r != kBos && r < kNumReserved) continue;
    for (TokenId t : pick_distinct(background_ids, wp.background_successors, rng))
      base[r * dim + t] = 0.5 + rng.uniform();
    for (const auto& ks : keyword_ids)
      for (TokenId t : pick_distinct(ks, wp.keyword_successors, rng)) base[r * dim + t] = 0.5 + rng.uniform();
  }

  // Rows of <pad>, <eos> and <unk> restart like <bos> so every row is a
  // distribution.
  for (std::size_t r : {std::size_t{kPad}, std::size_t{kEos}, std::size_t{kUnk}})
    std::copy(base.begin() + static_cast<std::ptrdiff_t>(kBos * dim),
              base.begin() + static_cast<std::ptrdiff_t>((kBos + 1) * dim),
              base.begin() + static_cast<std::ptrdiff_t>(r * dim));

  std::vector<TransitionTable> chains;
  for (std::size_t c = 0; c < wp.num_classes(); ++c) {
    Vec w = base;
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t t = 0; t < dim; ++t)
        if (owner[t] == static_cast<int>(c)) w[r * dim + t] *= wp.keyword_boost;
    chains.push_back(normalized(dim, std::move(w)));
  }
  Vec bg = base;
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t t = 0; t < dim; ++t)
      if (owner[t] >= 0) bg[r * dim + t] *= wp.background_keyword_factor;

  return World(wp, std::move(vocab), std::move(chains), normalized(dim, std::move(bg)));
}

std::vector<LabeledExample> sample_labeled(const World& world, std::size_t n, RngStream& rng) {
  if (n == 0) throw InvalidArgument("sample_labeled: n must be >= 1");
  const auto& wp = world.params();
  std::vector<LabeledExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(rng.uniform_int(world.num_classes()));
    const auto len = static_cast<std::size_t>(
        rng.uniform_range(static_cast<std::int64_t>(wp.min_len), static_cast<std::int64_t>(wp.max_len)));
    out.push_back({world.sample_chain(world.class_chain(y), len, rng), y});
  }
  return out;
}

std::vector<TokenSeq> sample_unlabeled(const World& world, std::size_t n, bool include_background,
                                       RngStream& rng, std::optional<double> background_mix) {
  if (n == 0) throw InvalidArgument("sample_unlabeled: n must be >= 1");
  const auto& wp = world.params();
  const double mix = background_mix.value_or(wp.background_mix);
  if (!(mix >= 0.0 && mix <= 1.0)) throw InvalidArgument("sample_unlabeled: mixture weight must be in [0,1]");
  std::vector<TokenSeq> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto len = static_cast<std::size_t>(
        rng.uniform_range(static_cast<std::int64_t>(wp.min_len), static_cast<std::int64_t>(wp.max_len)));
    const bool from_background = include_background && rng.uniform() < mix;
    if (from_background) {
      out.push_back(world.sample_chain(world.background_chain(), len, rng));
    } else {
      const auto y = static_cast<std::size_t>(rng.uniform_int(world.num_classes()));
      out.push_back(world.sample_chain(world.class_chain(y), len, rng));
    }
  }
  return out;
}

Vec stationary_distribution(const TransitionTable& chain, std::size_t iterations) {
  const std::size_t dim = chain.dim;
  Vec pi(chain.row(kBos).begin(), chain.row(kBos).end());
  Vec next(dim);
  for (std::size_t it = 0; it < iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < dim; ++r) {
      if (pi[r] == 0.0) continue;
      for (std::size_t c = 0; c < dim; ++c) next[c] += pi[r] * chain.at(r, c);
    }
    // Lazy step: converges even when the chain is periodic.
    for (std::size_t c = 0; c < dim; ++c) pi[c] = 0.5 * (pi[c] + next[c]);
  }
  return pi;
}

}  // namespace dfd
