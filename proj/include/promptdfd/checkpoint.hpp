// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "promptdfd/classifier.hpp"
#include "promptdfd/count_lm.hpp"
#include "promptdfd/neural_lm.hpp"
#include "promptdfd/rng.hpp"

namespace dfd {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class DType : std::uint8_t { kF64 = 1, kU64 = 2, kStr = 3 };

/// A named tensor: shape header plus flat little-endian payload.
struct Block {
  DType dtype = DType::kF64;
  std::vector<std::uint64_t> shape;
  std::vector<double> f64;
  std::vector<std::uint64_t> u64;
  std::vector<std::string> str;

  static Block of(std::vector<double> v, std::vector<std::uint64_t> shape = {});
  static Block of(std::vector<std::string> v);
  static Block of(std::vector<std::uint64_t> v, std::vector<std::uint64_t> shape = {});
  std::uint64_t numel() const;

  friend bool operator==(const Block&, const Block&) = default;
};

/// Layout: "DFD1" | u32 version | u32 endian marker | u64 config hash |
/// RNG (seed, path, counter) | u64 block count | blocks in name order.
/// Each block: u64 name length, name, u8 dtype, u64 rank, u64 dims, payload.
/// String payloads are (u64 length, bytes) per element.
struct Checkpoint {
  std::uint64_t config_hash = 0;
  RngStream rng;
  std::map<std::string, Block> blocks;

  const Block& at(const std::string& name) const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt);
/// Throws ValidationError on bad magic, version, endianness or truncation.
Checkpoint deserialize(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Vocabulary token strings in id order.
void put_vocab(Checkpoint& ckpt, const Vocab& vocab);
Vocab get_vocab(const Checkpoint& ckpt);

void put_classifier(Checkpoint& ckpt, const std::string& prefix, const ClassifierModel& m);
ClassifierModel get_classifier(const Checkpoint& ckpt, const std::string& prefix);

void put_neural_lm(Checkpoint& ckpt, const std::string& prefix, const NeuralLM& m);
NeuralLM get_neural_lm(const Checkpoint& ckpt, const std::string& prefix);

void put_count_lm(Checkpoint& ckpt, const std::string& prefix, const CountLM& m);
CountLM get_count_lm(const Checkpoint& ckpt, const std::string& prefix);

}  // namespace dfd
