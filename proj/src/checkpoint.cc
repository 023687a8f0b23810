// Copyright 2026 The NEL Transfer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nel/checkpoint.h"

#include <bit>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nel/errors.h"

namespace nel {

namespace {

constexpr uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr uint64_t kFnvPrime = 1099511628211ULL;

uint64_t Fnv1a(std::string_view bytes) {
  uint64_t hash = kFnvOffset;
  for (char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= kFnvPrime;
  }
  return hash;
}

class Writer {
 public:
  void U8(uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) U8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) U8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void F64(double v) { U64(std::bit_cast<uint64_t>(v)); }
  void Doubles(std::span<const double> values) {
    for (double v : values) F64(v);
  }
  void String(std::string_view s) {
    U32(static_cast<uint32_t>(s.size()));
    out_.append(s);
  }
  void Raw(std::string_view s) { out_.append(s); }
  std::string &bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  uint8_t U8() {
    Need(1);
    return static_cast<uint8_t>(bytes_[pos_++]);
  }
  uint32_t U32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(U8()) << (8 * i);
    return v;
  }
  uint64_t U64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(U8()) << (8 * i);
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  Vector Doubles(size_t n) {
    Need(n * 8);
    Vector out(n);
    for (double &v : out) v = F64();
    return out;
  }
  std::string String() {
    const uint32_t n = U32();
    Need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view Raw(size_t n) {
    Need(n);
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(size_t n) const {
    if (bytes_.size() - pos_ < n) throw InputError("checkpoint is truncated");
  }

  std::string_view bytes_;
  size_t pos_ = 0;
};

// Upper bound for sizes read from a file before allocating.
constexpr uint32_t kMaxExtent = 1u << 24;

}  // namespace

std::string SerializeCheckpoint(const Checkpoint &checkpoint) {
  const LocalModelParams &local = checkpoint.local;
  local.Validate();
  Writer w;
  w.Raw(kCheckpointMagic);
  w.U32(kCheckpointVersion);
  w.U32(static_cast<uint32_t>(local.dim));
  w.U32(static_cast<uint32_t>(local.hidden));
  w.U32(static_cast<uint32_t>(local.top_r));
  w.U32(static_cast<uint32_t>(local.window));
  w.U32(static_cast<uint32_t>(checkpoint.frozen.size()));
  for (ParamGroup group : checkpoint.frozen) {
    w.U8(static_cast<uint8_t>(group));
  }
  w.String(checkpoint.space_ref);
  w.String(checkpoint.provenance);
  for (ParamGroup group : kAllParamGroups) w.Doubles(local.Group(group));
  if (checkpoint.global) {
    const GlobalModelParams &global = *checkpoint.global;
    global.Validate();
    if (global.pairwise.size() != static_cast<size_t>(local.dim)) {
      throw InputError("pairwise matrix dimension does not match the model");
    }
    w.U8(1);
    w.U32(static_cast<uint32_t>(global.lbp_iterations));
    w.F64(global.damping);
    w.F64(global.pairwise_weight);
    w.Doubles(global.pairwise);
  } else {
    w.U8(0);
  }
  w.U64(Fnv1a(w.bytes()));
  return std::move(w.bytes());
}

Checkpoint DeserializeCheckpoint(std::string_view bytes,
                                 const EmbeddingSpace *space) {
  if (bytes.size() < kCheckpointMagic.size() ||
      bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw InputError("not a checkpoint file (bad magic)");
  }
  Reader r(bytes);
  r.Raw(kCheckpointMagic.size());
  const uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw InputError("unsupported checkpoint version " +
                     std::to_string(version));
  }
  if (bytes.size() < 8 + kCheckpointMagic.size() + 4) {
    throw InputError("checkpoint is truncated");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - 8);
  Reader tail(bytes.substr(bytes.size() - 8));
  if (tail.U64() != Fnv1a(body)) {
    throw InputError("checkpoint checksum mismatch (truncated or corrupt)");
  }

  Reader b(body);
  b.Raw(kCheckpointMagic.size());
  b.U32();
  const uint32_t dim = b.U32();
  const uint32_t hidden = b.U32();
  const uint32_t top_r = b.U32();
  const uint32_t window = b.U32();
  if (dim == 0 || dim > kMaxExtent || hidden == 0 || hidden > kMaxExtent) {
    throw InputError("checkpoint has implausible dimensions");
  }
  Checkpoint checkpoint;
  const uint32_t num_frozen = b.U32();
  if (num_frozen > kAllParamGroups.size()) {
    throw InputError("checkpoint freeze mask is malformed");
  }
  for (uint32_t i = 0; i < num_frozen; ++i) {
    const uint8_t id = b.U8();
    if (id >= kAllParamGroups.size()) {
      throw InputError("checkpoint names unknown parameter group");
    }
    checkpoint.frozen.insert(static_cast<ParamGroup>(id));
  }
  checkpoint.space_ref = b.String();
  checkpoint.provenance = b.String();

  LocalModelParams &local = checkpoint.local;
  local.dim = static_cast<int>(dim);
  local.hidden = static_cast<int>(hidden);
  local.top_r = static_cast<int>(top_r);
  local.window = static_cast<int>(window);
  local.attention = b.Doubles(dim);
  local.combination = b.Doubles(dim);
  local.hidden_weights = b.Doubles(static_cast<size_t>(hidden) * kNumFeatures);
  local.hidden_bias = b.Doubles(hidden);
  local.output_weights = b.Doubles(hidden);
  local.output_bias = b.F64();
  local.Validate();

  const uint8_t has_global = b.U8();
  if (has_global > 1) throw InputError("checkpoint global flag is malformed");
  if (has_global == 1) {
    GlobalModelParams global;
    global.lbp_iterations = static_cast<int>(b.U32());
    global.damping = b.F64();
    global.pairwise_weight = b.F64();
    global.pairwise = b.Doubles(dim);
    global.Validate();
    checkpoint.global = std::move(global);
  }
  if (!b.done()) throw InputError("checkpoint has trailing bytes");

  if (space != nullptr && space->dim() != local.dim) {
    throw InputError("checkpoint dimension " + std::to_string(local.dim) +
                     " does not match embedding dimension " +
                     std::to_string(space->dim()));
  }
  return checkpoint;
}

void SaveCheckpoint(const Checkpoint &checkpoint, const std::string &path) {
  const std::string bytes = SerializeCheckpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write checkpoint " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.flush()) throw InputError("failed writing " + path);
}

Checkpoint LoadCheckpoint(const std::string &path,
                          const EmbeddingSpace *space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return DeserializeCheckpoint(buffer.str(), space);
  } catch (const InputError &e) {
    throw InputError(path + ": " + e.what());
  }
}

std::string ExportCheckpointJson(const Checkpoint &checkpoint) {
  nlohmann::ordered_json j;
  j["format"] = std::string(kCheckpointMagic);
  j["version"] = kCheckpointVersion;
  j["space_ref"] = checkpoint.space_ref;
  j["provenance"] = checkpoint.provenance;
  std::vector<std::string> frozen;
  for (ParamGroup group : checkpoint.frozen) {
    frozen.emplace_back(ParamGroupName(group));
  }
  j["frozen"] = frozen;
  const LocalModelParams &local = checkpoint.local;
  j["local"]["d"] = local.dim;
  j["local"]["H"] = local.hidden;
  j["local"]["R"] = local.top_r;
  j["local"]["W"] = local.window;
  for (ParamGroup group : kAllParamGroups) {
    std::span<const double> values = local.Group(group);
    j["local"][std::string(ParamGroupName(group))] =
        std::vector<double>(values.begin(), values.end());
  }
  if (checkpoint.global) {
    j["global"]["C"] = checkpoint.global->pairwise;
    j["global"]["lbp_iterations"] = checkpoint.global->lbp_iterations;
    j["global"]["damping"] = checkpoint.global->damping;
    j["global"]["pairwise_weight"] = checkpoint.global->pairwise_weight;
  }
  return j.dump(2) + "\n";
}

}  // namespace nel
