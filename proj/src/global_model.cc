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

#include "nel/global_model.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nel/errors.h"

namespace nel {

GlobalModelParams GlobalModelParams::Identity(int dim) {
  GlobalModelParams params;
  params.pairwise.assign(dim, 1.0);
  return params;
}

void GlobalModelParams::Validate() const {
  if (lbp_iterations < 1) throw InputError("LBP needs at least one iteration");
  if (!(damping >= 0.0 && damping < 1.0)) {
    throw InputError("damping must lie in [0, 1)");
  }
  if (!(pairwise_weight >= 0.0)) {
    throw InputError("pairwise weight must be non-negative");
  }
}

double PairwiseScore(std::span<const double> a, std::span<const double> b,
                     const GlobalModelParams &params) {
  if (a.size() != params.pairwise.size() || b.size() != params.pairwise.size()) {
    throw InputError("pairwise matrix dimension does not match embeddings");
  }
  double sum = 0.0;
  for (size_t k = 0; k < a.size(); ++k) sum += (a[k] * b[k]) * params.pairwise[k];
  return params.pairwise_weight * sum;
}

double PairwiseScore(const std::string &entity_a, const std::string &entity_b,
                     const EmbeddingSpace &space,
                     const GlobalModelParams &params) {
  std::span<const double> a = space.FindEntity(entity_a);
  if (a.empty()) throw Error("entity '" + entity_a + "' has no embedding");
  std::span<const double> b = space.FindEntity(entity_b);
  if (b.empty()) throw Error("entity '" + entity_b + "' has no embedding");
  return PairwiseScore(a, b, params);
}

std::vector<double> NormalizeMessage(std::span<const double> message) {
  if (message.empty()) return {};
  for (double x : message) {
    if (!std::isfinite(x)) throw Error("non-finite message entry");
  }
  const double top = *std::max_element(message.begin(), message.end());
  std::vector<double> out(message.begin(), message.end());
  for (double &x : out) x -= top;
  return out;
}

std::vector<size_t> DecodeMaxProduct(const FactorGraph &graph, int iterations,
                                     double damping) {
  const size_t n = graph.node_potentials.size();
  for (const auto &potentials : graph.node_potentials) {
    if (potentials.empty()) throw Error("factor graph node without states");
  }

  // Directed message slots: 2f carries first->second, 2f+1 second->first.
  struct Slot {
    size_t from;
    size_t to;
    size_t factor;
    bool forward;
  };
  std::vector<Slot> slots;
  std::vector<std::vector<size_t>> incoming(n);
  for (size_t f = 0; f < graph.factors.size(); ++f) {
    const PairwiseFactor &factor = graph.factors[f];
    if (factor.first >= n || factor.second >= n ||
        factor.first == factor.second ||
        factor.table.size() != graph.node_potentials[factor.first].size() *
                                   graph.node_potentials[factor.second].size()) {
      throw Error("malformed pairwise factor");
    }
    incoming[factor.second].push_back(slots.size());
    slots.push_back({factor.first, factor.second, f, true});
    incoming[factor.first].push_back(slots.size());
    slots.push_back({factor.second, factor.first, f, false});
  }

  std::vector<std::vector<double>> messages(slots.size());
  for (size_t s = 0; s < slots.size(); ++s) {
    messages[s].assign(graph.node_potentials[slots[s].to].size(), 0.0);
  }
  auto belief = [&](size_t node) {
    std::vector<double> b = graph.node_potentials[node];
    for (size_t s : incoming[node]) {
      for (size_t x = 0; x < b.size(); ++x) b[x] += messages[s][x];
    }
    return b;
  };

  std::vector<std::vector<double>> next(slots.size());
  for (int iter = 0; iter < iterations && !slots.empty(); ++iter) {
    std::vector<std::vector<double>> beliefs(n);
    for (size_t i = 0; i < n; ++i) beliefs[i] = belief(i);

    for (size_t s = 0; s < slots.size(); ++s) {
      const Slot &slot = slots[s];
      const PairwiseFactor &factor = graph.factors[slot.factor];
      const size_t reverse = slot.forward ? s + 1 : s - 1;
      const size_t from_states = graph.node_potentials[slot.from].size();
      const size_t to_states = graph.node_potentials[slot.to].size();
      const size_t cols = graph.node_potentials[factor.second].size();

      std::vector<double> candidate(to_states,
                                    -std::numeric_limits<double>::infinity());
      for (size_t xf = 0; xf < from_states; ++xf) {
        const double base = beliefs[slot.from][xf] - messages[reverse][xf];
        for (size_t xt = 0; xt < to_states; ++xt) {
          const double pair = slot.forward ? factor.table[xf * cols + xt]
                                           : factor.table[xt * cols + xf];
          candidate[xt] = std::max(candidate[xt], base + pair);
        }
      }
      candidate = NormalizeMessage(candidate);
      if (iter > 0) {
        for (size_t x = 0; x < to_states; ++x) {
          candidate[x] =
              damping * messages[s][x] + (1.0 - damping) * candidate[x];
        }
        candidate = NormalizeMessage(candidate);
      }
      next[s] = std::move(candidate);
    }
    messages.swap(next);
  }

  std::vector<size_t> assignment(n);
  for (size_t i = 0; i < n; ++i) assignment[i] = ArgMax(belief(i));
  return assignment;
}

std::vector<std::pair<size_t, size_t>> MentionGraphEdges(size_t num_mentions) {
  std::vector<std::pair<size_t, size_t>> edges;
  if (num_mentions <= kMaxDenseMentions) {
    for (size_t i = 0; i < num_mentions; ++i) {
      for (size_t j = i + 1; j < num_mentions; ++j) edges.emplace_back(i, j);
    }
    return edges;
  }
  for (size_t i = 0; i < num_mentions; ++i) {
    // Walk outwards, preferring the earlier mention at equal distance.
    size_t taken = 0;
    for (size_t dist = 1; taken < kSparseNeighbors; ++dist) {
      const bool has_left = dist <= i;
      const bool has_right = i + dist < num_mentions;
      if (!has_left && !has_right) break;
      if (has_left && taken < kSparseNeighbors) {
        edges.emplace_back(i - dist, i);
        ++taken;
      }
      if (has_right && taken < kSparseNeighbors) {
        edges.emplace_back(i, i + dist);
        ++taken;
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

FactorGraph BuildDocumentGraph(std::span<const MentionInstance> mentions,
                               const EmbeddingSpace &space,
                               const LocalModelParams &local,
                               const GlobalModelParams &global) {
  global.Validate();
  if (global.pairwise.size() != static_cast<size_t>(space.dim())) {
    throw InputError("pairwise matrix dimension does not match embeddings");
  }
  FactorGraph graph;
  for (const MentionInstance &mention : mentions) {
    if (mention.doc_id != mentions.front().doc_id) {
      throw InputError("mentions of different documents in one graph");
    }
    graph.node_potentials.push_back(ScoreCandidates(mention, space, local));
  }
  for (const auto &[i, j] : MentionGraphEdges(mentions.size())) {
    PairwiseFactor factor{i, j, {}};
    for (const Candidate &a : mentions[i].candidates) {
      std::span<const double> va = space.FindEntity(a.entity_id);
      for (const Candidate &b : mentions[j].candidates) {
        factor.table.push_back(
            PairwiseScore(va, space.FindEntity(b.entity_id), global));
      }
    }
    graph.factors.push_back(std::move(factor));
  }
  return graph;
}

std::vector<std::string> PredictDocument(
    std::span<const MentionInstance> mentions, const EmbeddingSpace &space,
    const LocalModelParams &local, const GlobalModelParams &global) {
  if (mentions.empty()) return {};
  const FactorGraph graph = BuildDocumentGraph(mentions, space, local, global);
  const std::vector<size_t> states =
      DecodeMaxProduct(graph, global.lbp_iterations, global.damping);
  std::vector<std::string> entities;
  for (size_t i = 0; i < mentions.size(); ++i) {
    entities.push_back(mentions[i].candidates[states[i]].entity_id);
  }
  return entities;
}

}  // namespace nel
