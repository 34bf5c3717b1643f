// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dfd {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

inline constexpr std::size_t kMaxLen = 128;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kNumReserved = 4;

/// Shared whitespace vocabulary. Ids 0..3 are <pad>, <bos>, <eos>, <unk>.
class Vocab {
 public:
  /// Reserved tokens followed by `content` in the given order. Duplicates
  /// and reserved strings inside `content` are rejected.
  explicit Vocab(const std::vector<std::string>& content = {});

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view s) const;
  /// Id of `s`, or <unk>.
  TokenId id(std::string_view s) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool is_reserved(TokenId id) const { return id < kNumReserved; }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Vocabulary of every whitespace token in `corpus`, ordered by descending
/// frequency then lexicographically.
Vocab build_vocab(const std::vector<std::string>& corpus);

/// Whitespace split; unknown tokens map to <unk>; truncated to max_len.
TokenSeq encode(const Vocab& vocab, std::string_view text, std::size_t max_len = kMaxLen);

/// Space-joined token strings. Throws InvalidArgument on an id >= vocab size.
std::string decode(const Vocab& vocab, const TokenSeq& seq);

std::vector<std::string> split_whitespace(std::string_view text);

}  // namespace dfd
