// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "promptdfd/errors.hpp"

namespace dfd {

namespace {
const char* const kReservedNames[kNumReserved] = {"<pad>", "<bos>", "<eos>", "<unk>"};
}

Vocab::Vocab(const std::vector<std::string>& content) {
  tokens_.reserve(kNumReserved + content.size());
  for (const char* r : kReservedNames) {
    index_.emplace(r, static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(r);
  }
  for (const auto& t : content) {
    if (t.empty()) throw InvalidArgument("Vocab: empty token");
    if (!index_.emplace(t, static_cast<TokenId>(tokens_.size())).second)
      throw InvalidArgument("Vocab: duplicate token '" + t + "'");
    tokens_.push_back(t);
  }
}

const std::string& Vocab::token(TokenId id) const {
  if (id >= tokens_.size()) throw InvalidArgument("Vocab: id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

std::optional<TokenId> Vocab::find(std::string_view s) const {
  auto it = index_.find(std::string(s));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocab::id(std::string_view s) const { return find(s).value_or(kUnk); }

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

Vocab build_vocab(const std::vector<std::string>& corpus) {
  if (corpus.empty()) throw InvalidArgument("build_vocab: empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& line : corpus)
    for (auto& t : split_whitespace(line)) ++counts[t];
  for (const char* r : kReservedNames) counts.erase(r);

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> content;
  content.reserve(ranked.size());
  for (auto& [tok, _] : ranked) content.push_back(tok);
  return Vocab(content);
}

TokenSeq encode(const Vocab& vocab, std::string_view text, std::size_t max_len) {
  TokenSeq out;
  for (const auto& t : split_whitespace(text)) {
    if (out.size() >= max_len) break;
    out.push_back(vocab.id(t));
  }
  return out;
}

std::string decode(const Vocab& vocab, const TokenSeq& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += vocab.token(seq[i]);
  }
  return out;
}

}  // namespace dfd
