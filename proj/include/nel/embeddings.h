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

#ifndef NEL_EMBEDDINGS_H_
#define NEL_EMBEDDINGS_H_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nel/corpus.h"

namespace nel {

using Vector = std::vector<double>;

// Key prefix that separates entity vectors from word vectors.
inline constexpr std::string_view kEntityPrefix = "ENTITY/";

// Maps an entity id to the tokens describing it.
using EvidenceSource =
    std::function<std::vector<std::string>(const std::string &entity_id)>;

// Splits the entity id on underscores: "Paris_Hilton" -> {"Paris", "Hilton"}.
std::vector<std::string> DefaultEvidence(const std::string &entity_id);

struct ExtensionReport {
  size_t added = 0;
  // Entities for which no evidence token was found in the vocabulary.
  std::vector<std::string> skipped;
};

double Dot(std::span<const double> a, std::span<const double> b);
double Norm(std::span<const double> v);

// Joint word/entity vector store. Every stored vector has unit norm, so dot
// products are cosine similarities. Keys starting with "ENTITY/" refer to
// entities; all other keys are words.
class EmbeddingSpace {
 public:
  explicit EmbeddingSpace(int dim);

  int dim() const { return dim_; }
  size_t num_words() const { return keys_.size() - num_entities_; }
  size_t num_entities() const { return num_entities_; }

  // Adds a vector after normalizing it. Throws InputError on a dimension
  // mismatch, zero norm or duplicate key.
  void AddWord(const std::string &token, std::span<const double> vec);
  void AddEntity(const std::string &entity_id, std::span<const double> vec);

  // Word lookup tries the token verbatim, then its ASCII-lowercased form.
  // Returns an empty span for out-of-vocabulary tokens.
  std::span<const double> FindWord(std::string_view token) const;
  std::span<const double> FindEntity(std::string_view entity_id) const;
  bool HasEntity(std::string_view entity_id) const {
    return !FindEntity(entity_id).empty();
  }

  // Entity vector = normalized mean of the in-vocabulary evidence vectors.
  // Stores the result under `entity_id`, replacing any previous vector.
  Vector BuildEntityEmbedding(const std::string &entity_id,
                              std::span<const std::string> evidence_tokens);

  // Embeds every candidate entity of `ds` that has no vector yet. Existing
  // entity vectors are never overwritten.
  ExtensionReport ExtendForDataset(const Dataset &ds,
                                   const EvidenceSource &evidence =
                                       DefaultEvidence);

  // Cosine similarity of two keys (words or "ENTITY/..." keys). Throws
  // InputError naming a missing key.
  double Similarity(std::string_view key_a, std::string_view key_b) const;

  // All keys in insertion order, entities with their prefix.
  const std::vector<std::string> &keys() const { return keys_; }
  std::span<const double> VectorAt(size_t index) const;

  // Text vector format: "<count> <dim>" header, then one row per key.
  void Save(const std::string &path) const;
  std::string Serialize() const;

 private:
  void Insert(std::string key, std::span<const double> vec);
  std::span<const double> FindKey(std::string_view key) const;

  int dim_;
  size_t num_entities_ = 0;
  std::vector<std::string> keys_;
  std::vector<double> data_;
  std::unordered_map<std::string, size_t> index_;
};

// Loads the text vector format. Rows keyed "ENTITY/<id>" become entity
// vectors; all rows are renormalized to unit length.
EmbeddingSpace LoadWordVectors(const std::string &path);
EmbeddingSpace ParseWordVectors(std::string_view text,
                                const std::string &source = "<memory>");

}  // namespace nel

#endif  // NEL_EMBEDDINGS_H_
