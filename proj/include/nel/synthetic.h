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

#ifndef NEL_SYNTHETIC_H_
#define NEL_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nel/corpus.h"
#include "nel/embeddings.h"

namespace nel {

// Generator for linearly separable linking corpora. Every entity owns a
// random unit direction; its name word sits on that direction and a small
// cluster of context words scatters around it. Contexts mix words from the
// gold entity's cluster with shared noise words, so the gold entity is always
// recoverable from the context (Bayes-optimal F1 = 1).
struct SyntheticConfig {
  int num_entities = 40;
  int dim = 16;
  int words_per_entity = 6;
  int noise_words = 200;
  // Spread of cluster words around their entity direction.
  double cluster_noise = 0.35;
  int min_candidates = 2;
  int max_candidates = 5;
  // Tokens per context side.
  int min_context = 6;
  int max_context = 20;
  // Probability that a context token comes from the gold cluster.
  double signal_fraction = 0.3;
  int mentions_per_doc = 5;
  uint64_t seed = 0;
};

struct SyntheticWorld {
  SyntheticConfig config;
  EmbeddingSpace space{1};  // word vectors only
  std::vector<std::string> entity_ids;
  std::vector<std::vector<std::string>> cluster_words;
  std::vector<std::string> noise_words;
};

SyntheticWorld MakeSyntheticWorld(const SyntheticConfig &config);

// Samples `num_instances` mentions whose gold entities are drawn from
// `entities` (indices into world.entity_ids), cycling through all of them
// first so that each appears at least once when num_instances allows.
// Distractor candidates come from the same pool.
Dataset SampleSyntheticDataset(const SyntheticWorld &world,
                               std::span<const size_t> entities,
                               size_t num_instances, const std::string &name,
                               uint64_t seed);

// Indices 0..n-1.
std::vector<size_t> EntityRange(size_t begin, size_t end);

}  // namespace nel

#endif  // NEL_SYNTHETIC_H_
