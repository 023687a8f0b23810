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

#ifndef NEL_GLOBAL_MODEL_H_
#define NEL_GLOBAL_MODEL_H_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nel/corpus.h"
#include "nel/embeddings.h"
#include "nel/local_model.h"

namespace nel {

// Documents with more mentions than this get a sparse mention graph in which
// every mention is linked to its kSparseNeighbors nearest mentions.
inline constexpr size_t kMaxDenseMentions = 200;
inline constexpr size_t kSparseNeighbors = 50;

struct GlobalModelParams {
  Vector pairwise;  // diagonal of C
  int lbp_iterations = 10;
  double damping = 0.5;
  double pairwise_weight = 1.0;

  // C = identity with default inference settings.
  static GlobalModelParams Identity(int dim);

  void Validate() const;
};

// lambda * a' diag(C) b.
double PairwiseScore(std::span<const double> a, std::span<const double> b,
                     const GlobalModelParams &params);
double PairwiseScore(const std::string &entity_a, const std::string &entity_b,
                     const EmbeddingSpace &space,
                     const GlobalModelParams &params);

struct PairwiseFactor {
  size_t first = 0;
  size_t second = 0;
  // states(first) x states(second), row-major.
  std::vector<double> table;
};

// Pairwise Markov random field in the log domain.
struct FactorGraph {
  std::vector<std::vector<double>> node_potentials;
  std::vector<PairwiseFactor> factors;
};

// Subtracts the maximum entry. Throws Error on non-finite input.
std::vector<double> NormalizeMessage(std::span<const double> message);

// Damped max-product loopy belief propagation with synchronous updates.
// Each message takes its first computed value undamped; later updates mix
// `damping` of the old message with the new one. Returns the belief argmax
// per node, lowest state index on ties.
std::vector<size_t> DecodeMaxProduct(const FactorGraph &graph, int iterations,
                                     double damping);

// Edges of the mention graph of a document with `num_mentions` mentions, in
// instance order: complete up to kMaxDenseMentions, otherwise each mention
// connects to its kSparseNeighbors nearest mentions by position.
std::vector<std::pair<size_t, size_t>> MentionGraphEdges(size_t num_mentions);

// Node potentials are the local scores, edge potentials PairwiseScore.
FactorGraph BuildDocumentGraph(std::span<const MentionInstance> mentions,
                               const EmbeddingSpace &space,
                               const LocalModelParams &local,
                               const GlobalModelParams &global);

// Collective prediction for all mentions of one document.
std::vector<std::string> PredictDocument(
    std::span<const MentionInstance> mentions, const EmbeddingSpace &space,
    const LocalModelParams &local, const GlobalModelParams &global);

}  // namespace nel

#endif  // NEL_GLOBAL_MODEL_H_
