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

#ifndef NEL_LOCAL_MODEL_H_
#define NEL_LOCAL_MODEL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nel/corpus.h"
#include "nel/embeddings.h"

namespace nel {

// Local scorer inputs per candidate: entity/context similarity and log prior.
inline constexpr int kNumFeatures = 2;
inline constexpr double kPriorEpsilon = 1e-6;
inline constexpr double kDefaultMargin = 0.1;
inline constexpr int kDefaultHidden = 100;
inline constexpr int kDefaultTopR = 20;

// Trainable parameter groups of the local model.
enum class ParamGroup {
  kAttention,      // A
  kCombination,    // B
  kHiddenWeights,  // f_W1
  kHiddenBias,     // f_b1
  kOutputWeights,  // f_W2
  kOutputBias,     // f_b2
};

inline constexpr std::array<ParamGroup, 6> kAllParamGroups = {
    ParamGroup::kAttention,     ParamGroup::kCombination,
    ParamGroup::kHiddenWeights, ParamGroup::kHiddenBias,
    ParamGroup::kOutputWeights, ParamGroup::kOutputBias};

// Short names used on the command line and in checkpoints: A, B, f_W1, f_b1,
// f_W2, f_b2.
std::string_view ParamGroupName(ParamGroup group);
std::optional<ParamGroup> ParseParamGroup(std::string_view name);

// Parameters of the local disambiguator. A and B are diagonal bilinear forms
// stored as their diagonals; f is a two-layer ReLU network mapping the
// kNumFeatures inputs to a scalar score.
struct LocalModelParams {
  int dim = 0;
  int hidden = kDefaultHidden;
  int top_r = kDefaultTopR;
  int window = static_cast<int>(kContextWindow);

  Vector attention;       // dim
  Vector combination;     // dim
  Vector hidden_weights;  // hidden x kNumFeatures, row-major
  Vector hidden_bias;     // hidden
  Vector output_weights;  // hidden
  double output_bias = 0.0;

  // All-zero parameters of the given shape.
  static LocalModelParams Zeros(int dim, int hidden = kDefaultHidden,
                                int top_r = kDefaultTopR,
                                int window = static_cast<int>(kContextWindow));

  // A = B = identity; f initialized with Glorot-uniform weights, zero biases.
  static LocalModelParams Initialize(int dim, uint64_t seed,
                                     int hidden = kDefaultHidden,
                                     int top_r = kDefaultTopR);

  std::span<double> Group(ParamGroup group);
  std::span<const double> Group(ParamGroup group) const;

  // Throws InputError if the shape invariants do not hold.
  void Validate() const;
};

// True if every group has identical bits in `a` and `b`.
bool BitEqual(std::span<const double> a, std::span<const double> b);
bool BitEqual(const LocalModelParams &a, const LocalModelParams &b);

// Left window followed by right window, each cut to the `window` tokens
// nearest to the mention.
std::vector<std::string> ContextTokens(const MentionInstance &instance,
                                       int window);

// u(w) = max over embedded candidates e of e' diag(A) w. Out-of-vocabulary
// tokens score -infinity. Throws Error if no candidate is embedded.
std::vector<double> AttentionScores(std::span<const std::string> context,
                                    std::span<const Candidate> candidates,
                                    const EmbeddingSpace &space,
                                    const LocalModelParams &params);

// Softmax over the `top_r` highest finite scores (ties to the earlier
// position); pruned tokens get weight 0. Throws Error if no score is finite.
std::vector<double> PruneTopR(std::span<const double> scores, int top_r);

// Attention-weighted sum of the context token vectors.
Vector ContextVector(std::span<const std::string> context,
                     std::span<const double> weights,
                     const EmbeddingSpace &space);

// Scores psi(e) of every candidate, in candidate order.
std::vector<double> ScoreCandidates(const MentionInstance &instance,
                                    const EmbeddingSpace &space,
                                    const LocalModelParams &params);

// Index of the largest score, lowest index on ties.
size_t ArgMax(std::span<const double> scores);

std::string PredictLocal(const MentionInstance &instance,
                         const EmbeddingSpace &space,
                         const LocalModelParams &params);

// Summed hinge: sum over e != gold of max(0, margin - psi(gold) + psi(e)).
double RankingLoss(std::span<const double> scores, size_t gold_index,
                   double margin = kDefaultMargin);

struct LocalGradient {
  double loss = 0.0;
  // Same shape as the model parameters.
  LocalModelParams grad;
};

// Exact gradient of RankingLoss with respect to all local parameters. The
// retained top-R set is treated as fixed; the softmax over it is
// differentiated. The instance's gold entity must be among its candidates.
LocalGradient GradLocal(const MentionInstance &instance,
                        const EmbeddingSpace &space,
                        const LocalModelParams &params,
                        double margin = kDefaultMargin);

}  // namespace nel

#endif  // NEL_LOCAL_MODEL_H_
