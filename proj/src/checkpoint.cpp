// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "promptdfd/errors.hpp"

namespace dfd {

namespace {

constexpr char kMagic[4] = {'D', 'F', 'D', '1'};
constexpr std::uint32_t kEndianMarker = 0x01020304;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::uint64_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }
  void need(std::uint64_t n) const {
    if (n > in_.size() - pos_) throw ValidationError("checkpoint", "truncated file");
  }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

std::uint64_t product(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

}  // namespace

Block Block::of(std::vector<double> v, std::vector<std::uint64_t> shape) {
  Block b;
  b.dtype = DType::kF64;
  b.shape = shape.empty() ? std::vector<std::uint64_t>{v.size()} : std::move(shape);
  if (product(b.shape) != v.size()) throw InvalidArgument("Block: shape does not match data size");
  b.f64 = std::move(v);
  return b;
}

Block Block::of(std::vector<std::uint64_t> v, std::vector<std::uint64_t> shape) {
  Block b;
  b.dtype = DType::kU64;
  b.shape = shape.empty() ? std::vector<std::uint64_t>{v.size()} : std::move(shape);
  if (product(b.shape) != v.size()) throw InvalidArgument("Block: shape does not match data size");
  b.u64 = std::move(v);
  return b;
}

Block Block::of(std::vector<std::string> v) {
  Block b;
  b.dtype = DType::kStr;
  b.shape = {v.size()};
  b.str = std::move(v);
  return b;
}

std::uint64_t Block::numel() const { return product(shape); }

const Block& Checkpoint::at(const std::string& name) const {
  auto it = blocks.find(name);
  if (it == blocks.end()) throw ValidationError(name, "missing checkpoint block");
  return it->second;
}

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(kEndianMarker);
  w.u64(ckpt.config_hash);
  w.u64(ckpt.rng.seed());
  w.u64(ckpt.rng.path().size());
  for (auto p : ckpt.rng.path()) w.u64(p);
  w.u64(ckpt.rng.counter());
  w.u64(ckpt.blocks.size());
  for (const auto& [name, b] : ckpt.blocks) {
    w.u64(name.size());
    w.bytes(name.data(), name.size());
    w.u8(static_cast<std::uint8_t>(b.dtype));
    w.u64(b.shape.size());
    for (auto d : b.shape) w.u64(d);
    switch (b.dtype) {
      case DType::kF64:
        for (double v : b.f64) w.f64(v);
        break;
      case DType::kU64:
        for (auto v : b.u64) w.u64(v);
        break;
      case DType::kStr:
        for (const auto& v : b.str) {
          w.u64(v.size());
          w.bytes(v.data(), v.size());
        }
        break;
    }
  }
  return w.take();
}

Checkpoint deserialize(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.str(4) != std::string(kMagic, 4)) throw ValidationError("checkpoint", "bad magic (not a checkpoint file)");
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw ValidationError("checkpoint", "unsupported format version " + std::to_string(version) + " (expected " +
                                            std::to_string(kCheckpointVersion) + ")");
  if (r.u32() != kEndianMarker) throw ValidationError("checkpoint", "endianness marker mismatch");
  Checkpoint ckpt;
  ckpt.config_hash = r.u64();
  const auto seed = r.u64();
  const auto path_len = r.u64();
  r.need(path_len * 8);
  std::vector<std::uint64_t> path(path_len);
  for (auto& p : path) p = r.u64();
  ckpt.rng = RngStream(seed, path);
  ckpt.rng.set_counter(r.u64());
  const auto n_blocks = r.u64();
  for (std::uint64_t i = 0; i < n_blocks; ++i) {
    const auto name = r.str(r.u64());
    Block b;
    const auto dtype = r.u8();
    if (dtype < 1 || dtype > 3) throw ValidationError(name, "unknown block dtype");
    b.dtype = static_cast<DType>(dtype);
    const auto rank = r.u64();
    r.need(rank * 8);
    b.shape.resize(rank);
    for (auto& d : b.shape) d = r.u64();
    const auto n = product(b.shape);
    r.need(n * 8);
    if (b.dtype == DType::kF64) {
      b.f64.resize(n);
      for (auto& v : b.f64) v = r.f64();
    } else if (b.dtype == DType::kU64) {
      b.u64.resize(n);
      for (auto& v : b.u64) v = r.u64();
    } else {
      b.str.resize(n);
      for (auto& v : b.str) v = r.str(r.u64());
    }
    if (!ckpt.blocks.emplace(name, std::move(b)).second) throw ValidationError(name, "duplicate checkpoint block");
  }
  if (!r.done()) throw ValidationError("checkpoint", "trailing bytes after last block");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = serialize(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(path.string(), "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError(path.string(), "write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string(), "cannot open checkpoint");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

void put_vocab(Checkpoint& ckpt, const Vocab& vocab) { ckpt.blocks["vocab"] = Block::of(vocab.tokens()); }

Vocab get_vocab(const Checkpoint& ckpt) {
  const auto& b = ckpt.at("vocab");
  if (b.dtype != DType::kStr) throw ValidationError("vocab", "expected a string block");
  std::vector<std::string> content(b.str.begin() + std::min<std::ptrdiff_t>(4, static_cast<std::ptrdiff_t>(b.str.size())), b.str.end());
  Vocab v(content);
  if (v.tokens() != b.str) throw ValidationError("vocab", "reserved tokens do not match");
  return v;
}

void put_classifier(Checkpoint& ckpt, const std::string& prefix, const ClassifierModel& m) {
  ckpt.blocks[prefix + ".shape"] =
      Block::of(std::vector<std::uint64_t>{m.vocab_size(), m.dim(), m.num_classes(), m.buckets()});
  ckpt.blocks[prefix + ".params"] = Block::of(m.params());
}

ClassifierModel get_classifier(const Checkpoint& ckpt, const std::string& prefix) {
  const auto& s = ckpt.at(prefix + ".shape");
  const auto& p = ckpt.at(prefix + ".params");
  if (s.dtype != DType::kU64 || s.u64.size() != 4 || p.dtype != DType::kF64)
    throw ValidationError(prefix, "malformed classifier blocks");
  ClassifierModel m(s.u64[0], s.u64[1], s.u64[2], s.u64[3]);
  if (p.f64.size() != m.num_params()) throw ValidationError(prefix, "parameter count does not match shape");
  m.params() = p.f64;
  return m;
}

void put_neural_lm(Checkpoint& ckpt, const std::string& prefix, const NeuralLM& m) {
  ckpt.blocks[prefix + ".shape"] = Block::of(std::vector<std::uint64_t>{m.vocab_size(), m.dim(), m.window()});
  ckpt.blocks[prefix + ".params"] = Block::of(m.params());
}

NeuralLM get_neural_lm(const Checkpoint& ckpt, const std::string& prefix) {
  const auto& s = ckpt.at(prefix + ".shape");
  const auto& p = ckpt.at(prefix + ".params");
  if (s.dtype != DType::kU64 || s.u64.size() != 3 || p.dtype != DType::kF64)
    throw ValidationError(prefix, "malformed prompter blocks");
  NeuralLM m(s.u64[0], s.u64[1], s.u64[2]);
  if (p.f64.size() != m.num_params()) throw ValidationError(prefix, "parameter count does not match shape");
  m.params() = p.f64;
  return m;
}

// Histories are stored as rows of `order` ids: the history length first,
// then the ids, zero-padded.
void put_count_lm(Checkpoint& ckpt, const std::string& prefix, const CountLM& m) {
  const auto& tables = m.tables();
  std::vector<std::uint64_t> hist, counts;
  for (const auto& [h, c] : tables) {
    hist.push_back(h.size());
    for (std::size_t i = 0; i + 1 < m.order(); ++i) hist.push_back(i < h.size() ? h[i] : 0);
    counts.insert(counts.end(), c.begin(), c.end());
  }
  const std::uint64_t rows = tables.size();
  ckpt.blocks[prefix + ".shape"] = Block::of(std::vector<std::uint64_t>{m.vocab_size(), m.order()});
  ckpt.blocks[prefix + ".k_smooth"] = Block::of(std::vector<double>{m.k_smooth()});
  ckpt.blocks[prefix + ".histories"] = Block::of(std::move(hist), {rows, m.order()});
  ckpt.blocks[prefix + ".counts"] = Block::of(std::move(counts), {rows, m.vocab_size()});
}

CountLM get_count_lm(const Checkpoint& ckpt, const std::string& prefix) {
  const auto& s = ckpt.at(prefix + ".shape");
  const auto& k = ckpt.at(prefix + ".k_smooth");
  const auto& h = ckpt.at(prefix + ".histories");
  const auto& c = ckpt.at(prefix + ".counts");
  if (s.dtype != DType::kU64 || s.u64.size() != 2 || k.dtype != DType::kF64 || k.f64.size() != 1 ||
      h.dtype != DType::kU64 || c.dtype != DType::kU64 || h.shape.size() != 2 || c.shape.size() != 2)
    throw ValidationError(prefix, "malformed generator blocks");
  const std::size_t vocab = s.u64[0], order = s.u64[1];
  if (h.shape[1] != order || c.shape[1] != vocab || h.shape[0] != c.shape[0])
    throw ValidationError(prefix, "generator block shapes disagree");
  CountLM m(vocab, order, k.f64[0]);
  for (std::uint64_t r = 0; r < h.shape[0]; ++r) {
    const auto* row = h.u64.data() + r * order;
    if (row[0] >= order) throw ValidationError(prefix, "history longer than order");
    TokenSeq hist(row + 1, row + 1 + row[0]);
    std::vector<std::uint32_t> counts(c.u64.begin() + static_cast<std::ptrdiff_t>(r * vocab),
                                      c.u64.begin() + static_cast<std::ptrdiff_t>((r + 1) * vocab));
    m.set_table(hist, std::move(counts));
  }
  return m;
}

}  // namespace dfd
