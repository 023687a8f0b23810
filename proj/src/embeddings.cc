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

#include "nel/embeddings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "nel/errors.h"

namespace nel {

namespace {

constexpr double kMinNorm = 1e-12;

std::string Lowercase(std::string_view text) {
  std::string out(text);
  for (char &c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string EntityKey(std::string_view entity_id) {
  std::string key(kEntityPrefix);
  key += entity_id;
  return key;
}

bool IsEntityKey(std::string_view key) {
  return key.substr(0, kEntityPrefix.size()) == kEntityPrefix;
}

Vector Normalized(std::span<const double> vec, const std::string &key) {
  const double norm = Norm(vec);
  if (!std::isfinite(norm) || norm < kMinNorm) {
    throw InputError("vector for '" + key + "' has zero norm");
  }
  Vector out(vec.begin(), vec.end());
  for (double &x : out) x /= norm;
  return out;
}

}  // namespace

std::vector<std::string> DefaultEvidence(const std::string &entity_id) {
  std::vector<std::string> tokens;
  size_t start = 0;
  while (start <= entity_id.size()) {
    size_t end = entity_id.find('_', start);
    if (end == std::string::npos) end = entity_id.size();
    if (end > start) tokens.push_back(entity_id.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double Norm(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

EmbeddingSpace::EmbeddingSpace(int dim) : dim_(dim) {
  if (dim <= 0) throw InputError("embedding dimension must be positive");
}

void EmbeddingSpace::Insert(std::string key, std::span<const double> vec) {
  if (vec.size() != static_cast<size_t>(dim_)) {
    throw InputError("vector for '" + key + "' has dimension " +
                     std::to_string(vec.size()) + ", expected " +
                     std::to_string(dim_));
  }
  Vector unit = Normalized(vec, key);
  auto it = index_.find(key);
  if (it != index_.end()) {
    std::copy(unit.begin(), unit.end(),
              data_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
    return;
  }
  if (IsEntityKey(key)) ++num_entities_;
  index_.emplace(key, keys_.size());
  keys_.push_back(std::move(key));
  data_.insert(data_.end(), unit.begin(), unit.end());
}

void EmbeddingSpace::AddWord(const std::string &token,
                             std::span<const double> vec) {
  if (token.empty() || IsEntityKey(token)) {
    throw InputError("invalid word token '" + token + "'");
  }
  if (index_.count(token)) throw InputError("duplicate token '" + token + "'");
  Insert(token, vec);
}

void EmbeddingSpace::AddEntity(const std::string &entity_id,
                               std::span<const double> vec) {
  std::string key = EntityKey(entity_id);
  if (index_.count(key)) {
    throw InputError("duplicate entity '" + entity_id + "'");
  }
  Insert(std::move(key), vec);
}

std::span<const double> EmbeddingSpace::VectorAt(size_t index) const {
  return std::span<const double>(data_).subspan(index * dim_, dim_);
}

std::span<const double> EmbeddingSpace::FindKey(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return {};
  return VectorAt(it->second);
}

std::span<const double> EmbeddingSpace::FindWord(std::string_view token) const {
  if (token.empty() || IsEntityKey(token)) return {};
  std::span<const double> vec = FindKey(token);
  if (vec.empty()) vec = FindKey(Lowercase(token));
  return vec;
}

std::span<const double> EmbeddingSpace::FindEntity(
    std::string_view entity_id) const {
  return FindKey(EntityKey(entity_id));
}

Vector EmbeddingSpace::BuildEntityEmbedding(
    const std::string &entity_id, std::span<const std::string> evidence_tokens) {
  Vector sum(dim_, 0.0);
  size_t found = 0;
  for (const std::string &token : evidence_tokens) {
    std::span<const double> vec = FindWord(token);
    if (vec.empty()) continue;
    for (int k = 0; k < dim_; ++k) sum[k] += vec[k];
    ++found;
  }
  if (found == 0) {
    throw InputError("no evidence token of entity '" + entity_id +
                     "' is in the vocabulary");
  }
  for (double &x : sum) x /= static_cast<double>(found);
  Insert(EntityKey(entity_id), sum);
  std::span<const double> stored = FindEntity(entity_id);
  return Vector(stored.begin(), stored.end());
}

ExtensionReport EmbeddingSpace::ExtendForDataset(
    const Dataset &ds, const EvidenceSource &evidence) {
  ExtensionReport report;
  std::unordered_set<std::string> visited;
  for (const MentionInstance &instance : ds.instances) {
    for (const Candidate &candidate : instance.candidates) {
      const std::string &id = candidate.entity_id;
      if (!visited.insert(id).second || HasEntity(id)) continue;
      const std::vector<std::string> tokens = evidence(id);
      try {
        BuildEntityEmbedding(id, tokens);
        ++report.added;
      } catch (const InputError &) {
        report.skipped.push_back(id);
      }
    }
  }
  return report;
}

double EmbeddingSpace::Similarity(std::string_view key_a,
                                  std::string_view key_b) const {
  auto lookup = [this](std::string_view key) {
    std::span<const double> vec =
        IsEntityKey(key) ? FindKey(key) : FindWord(key);
    if (vec.empty()) throw InputError("unknown key '" + std::string(key) + "'");
    return vec;
  };
  return Dot(lookup(key_a), lookup(key_b));
}

std::string EmbeddingSpace::Serialize() const {
  std::string out = std::to_string(keys_.size()) + " " + std::to_string(dim_) +
                    "\n";
  for (size_t i = 0; i < keys_.size(); ++i) {
    out += keys_[i];
    for (double x : VectorAt(i)) {
      out += ' ';
      out += FormatDouble(x);
    }
    out += '\n';
  }
  return out;
}

void EmbeddingSpace::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write embeddings file " + path);
  out << Serialize();
  if (!out.flush()) throw InputError("failed writing " + path);
}

EmbeddingSpace ParseWordVectors(std::string_view text,
                                const std::string &source) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(source, 1, "missing '<count> <dim>' header");
  }
  std::vector<std::string> header = Tokenize(line);
  long long count = -1;
  long long dim = -1;
  if (header.size() == 2) {
    std::from_chars(header[0].data(), header[0].data() + header[0].size(),
                    count);
    std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim);
  }
  if (count < 0 || dim <= 0) {
    throw ParseError(source, 1, "malformed header '" + line + "'");
  }

  EmbeddingSpace space(static_cast<int>(dim));
  std::vector<std::pair<std::string, Vector>> entities;
  size_t lineno = 1;
  long long rows = 0;
  Vector values;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields = Tokenize(line);
    if (fields.size() != static_cast<size_t>(dim) + 1) {
      throw ParseError(source, lineno,
                       "row has " + std::to_string(fields.size() - 1) +
                           " values, header says " + std::to_string(dim));
    }
    values.assign(dim, 0.0);
    for (long long k = 0; k < dim; ++k) {
      const std::string &field = fields[k + 1];
      const char *end = field.data() + field.size();
      auto [ptr, ec] = std::from_chars(field.data(), end, values[k]);
      if (ec != std::errc() || ptr != end) {
        throw ParseError(source, lineno, "bad number '" + field + "'");
      }
    }
    try {
      if (IsEntityKey(fields[0])) {
        entities.emplace_back(fields[0].substr(kEntityPrefix.size()), values);
      } else {
        space.AddWord(fields[0], values);
      }
    } catch (const InputError &e) {
      throw ParseError(source, lineno, e.what());
    }
    ++rows;
  }
  for (const auto &[id, vec] : entities) space.AddEntity(id, vec);
  if (rows != count) {
    throw ParseError(source, lineno,
                     "header announces " + std::to_string(count) +
                         " rows, found " + std::to_string(rows));
  }
  return space;
}

EmbeddingSpace LoadWordVectors(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open embeddings file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseWordVectors(buffer.str(), path);
}

}  // namespace nel
