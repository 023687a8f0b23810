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

#include "nel/local_model.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "nel/errors.h"

namespace nel {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Intermediate values of one forward pass, kept for backpropagation.
struct Forward {
  std::vector<std::span<const double>> token_vecs;   // empty span if OOV
  std::vector<std::span<const double>> entity_vecs;  // per candidate
  std::vector<double> attention;                     // u(w)
  std::vector<size_t> attended_entity;               // argmax e of u(w)
  std::vector<double> beta;
  Vector context;
  std::vector<std::array<double, kNumFeatures>> features;
  std::vector<Vector> preactivation;  // per candidate, hidden
  std::vector<double> scores;
};

Forward RunForward(const MentionInstance &instance, const EmbeddingSpace &space,
                   const LocalModelParams &params) {
  params.Validate();
  if (space.dim() != params.dim) {
    throw InputError("model dimension " + std::to_string(params.dim) +
                     " does not match embedding dimension " +
                     std::to_string(space.dim()));
  }
  Forward fw;
  const int d = params.dim;
  for (const Candidate &candidate : instance.candidates) {
    std::span<const double> vec = space.FindEntity(candidate.entity_id);
    if (vec.empty()) {
      throw Error("candidate entity '" + candidate.entity_id +
                  "' has no embedding");
    }
    fw.entity_vecs.push_back(vec);
  }

  const std::vector<std::string> context =
      ContextTokens(instance, params.window);
  fw.attention.assign(context.size(), kNegInf);
  fw.attended_entity.assign(context.size(), 0);
  for (size_t t = 0; t < context.size(); ++t) {
    std::span<const double> w = space.FindWord(context[t]);
    fw.token_vecs.push_back(w);
    if (w.empty()) continue;
    for (size_t e = 0; e < fw.entity_vecs.size(); ++e) {
      double u = 0.0;
      for (int k = 0; k < d; ++k) {
        u += fw.entity_vecs[e][k] * params.attention[k] * w[k];
      }
      if (u > fw.attention[t]) {
        fw.attention[t] = u;
        fw.attended_entity[t] = e;
      }
    }
  }
  fw.beta = PruneTopR(fw.attention, params.top_r);
  fw.context.assign(d, 0.0);
  for (size_t t = 0; t < context.size(); ++t) {
    if (fw.beta[t] == 0.0) continue;
    for (int k = 0; k < d; ++k) fw.context[k] += fw.beta[t] * fw.token_vecs[t][k];
  }

  const int h = params.hidden;
  for (size_t e = 0; e < instance.candidates.size(); ++e) {
    double similarity = 0.0;
    for (int k = 0; k < d; ++k) {
      similarity += fw.entity_vecs[e][k] * params.combination[k] * fw.context[k];
    }
    const std::array<double, kNumFeatures> x = {
        similarity, std::log(instance.candidates[e].prior + kPriorEpsilon)};
    Vector pre(h);
    double score = params.output_bias;
    for (int j = 0; j < h; ++j) {
      double z = params.hidden_bias[j];
      for (int i = 0; i < kNumFeatures; ++i) {
        z += params.hidden_weights[j * kNumFeatures + i] * x[i];
      }
      pre[j] = z;
      if (z > 0.0) score += params.output_weights[j] * z;
    }
    fw.features.push_back(x);
    fw.preactivation.push_back(std::move(pre));
    fw.scores.push_back(score);
  }
  return fw;
}

}  // namespace

std::string_view ParamGroupName(ParamGroup group) {
  switch (group) {
    case ParamGroup::kAttention: return "A";
    case ParamGroup::kCombination: return "B";
    case ParamGroup::kHiddenWeights: return "f_W1";
    case ParamGroup::kHiddenBias: return "f_b1";
    case ParamGroup::kOutputWeights: return "f_W2";
    case ParamGroup::kOutputBias: return "f_b2";
  }
  return "?";
}

std::optional<ParamGroup> ParseParamGroup(std::string_view name) {
  for (ParamGroup group : kAllParamGroups) {
    if (ParamGroupName(group) == name) return group;
  }
  return std::nullopt;
}

LocalModelParams LocalModelParams::Zeros(int dim, int hidden, int top_r,
                                         int window) {
  LocalModelParams params;
  params.dim = dim;
  params.hidden = hidden;
  params.top_r = top_r;
  params.window = window;
  params.attention.assign(dim, 0.0);
  params.combination.assign(dim, 0.0);
  params.hidden_weights.assign(static_cast<size_t>(hidden) * kNumFeatures, 0.0);
  params.hidden_bias.assign(hidden, 0.0);
  params.output_weights.assign(hidden, 0.0);
  params.output_bias = 0.0;
  params.Validate();
  return params;
}

LocalModelParams LocalModelParams::Initialize(int dim, uint64_t seed,
                                              int hidden, int top_r) {
  LocalModelParams params = Zeros(dim, hidden, top_r);
  std::fill(params.attention.begin(), params.attention.end(), 1.0);
  std::fill(params.combination.begin(), params.combination.end(), 1.0);
  std::mt19937_64 rng(seed);
  const double first = std::sqrt(6.0 / (kNumFeatures + hidden));
  const double second = std::sqrt(6.0 / (hidden + 1));
  std::uniform_real_distribution<double> w1(-first, first);
  std::uniform_real_distribution<double> w2(-second, second);
  for (double &w : params.hidden_weights) w = w1(rng);
  for (double &w : params.output_weights) w = w2(rng);
  return params;
}

std::span<double> LocalModelParams::Group(ParamGroup group) {
  switch (group) {
    case ParamGroup::kAttention: return attention;
    case ParamGroup::kCombination: return combination;
    case ParamGroup::kHiddenWeights: return hidden_weights;
    case ParamGroup::kHiddenBias: return hidden_bias;
    case ParamGroup::kOutputWeights: return output_weights;
    case ParamGroup::kOutputBias: return std::span<double>(&output_bias, 1);
  }
  return {};
}

std::span<const double> LocalModelParams::Group(ParamGroup group) const {
  return const_cast<LocalModelParams *>(this)->Group(group);
}

void LocalModelParams::Validate() const {
  if (dim <= 0) throw InputError("model dimension must be positive");
  if (hidden <= 0) throw InputError("hidden width must be positive");
  if (window <= 0 || window > static_cast<int>(kContextWindow)) {
    throw InputError("context window must lie in [1, " +
                     std::to_string(kContextWindow) + "]");
  }
  if (top_r < 1 || top_r > 2 * window) {
    throw InputError("retained-word count must lie in [1, 2 * window]");
  }
  const auto d = static_cast<size_t>(dim);
  const auto h = static_cast<size_t>(hidden);
  if (attention.size() != d || combination.size() != d ||
      hidden_weights.size() != h * kNumFeatures || hidden_bias.size() != h ||
      output_weights.size() != h) {
    throw InputError("local model parameter shapes are inconsistent");
  }
}

bool BitEqual(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<uint64_t>(a[i]) != std::bit_cast<uint64_t>(b[i])) {
      return false;
    }
  }
  return true;
}

bool BitEqual(const LocalModelParams &a, const LocalModelParams &b) {
  if (a.dim != b.dim || a.hidden != b.hidden || a.top_r != b.top_r ||
      a.window != b.window) {
    return false;
  }
  for (ParamGroup group : kAllParamGroups) {
    if (!BitEqual(a.Group(group), b.Group(group))) return false;
  }
  return true;
}

std::vector<std::string> ContextTokens(const MentionInstance &instance,
                                       int window) {
  const auto w = static_cast<size_t>(window);
  const auto &left = instance.left_context;
  const auto &right = instance.right_context;
  std::vector<std::string> tokens;
  tokens.insert(tokens.end(), left.end() - std::min(w, left.size()), left.end());
  tokens.insert(tokens.end(), right.begin(),
                right.begin() + std::min(w, right.size()));
  return tokens;
}

std::vector<double> AttentionScores(std::span<const std::string> context,
                                    std::span<const Candidate> candidates,
                                    const EmbeddingSpace &space,
                                    const LocalModelParams &params) {
  if (candidates.empty()) throw InputError("empty candidate set");
  std::vector<std::span<const double>> entities;
  for (const Candidate &candidate : candidates) {
    std::span<const double> vec = space.FindEntity(candidate.entity_id);
    if (!vec.empty()) entities.push_back(vec);
  }
  if (entities.empty()) {
    throw Error("no candidate entity has an embedding");
  }
  std::vector<double> scores(context.size(), kNegInf);
  for (size_t t = 0; t < context.size(); ++t) {
    std::span<const double> w = space.FindWord(context[t]);
    if (w.empty()) continue;
    for (std::span<const double> e : entities) {
      double u = 0.0;
      for (int k = 0; k < params.dim; ++k) u += e[k] * params.attention[k] * w[k];
      scores[t] = std::max(scores[t], u);
    }
  }
  return scores;
}

std::vector<double> PruneTopR(std::span<const double> scores, int top_r) {
  std::vector<size_t> finite;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (std::isfinite(scores[i])) finite.push_back(i);
  }
  if (finite.empty()) {
    throw Error("no context token has a finite attention score");
  }
  const size_t keep = std::min(finite.size(), static_cast<size_t>(top_r));
  std::stable_sort(finite.begin(), finite.end(), [&](size_t a, size_t b) {
    return scores[a] > scores[b];
  });
  finite.resize(keep);

  std::vector<double> weights(scores.size(), 0.0);
  const double top = scores[finite.front()];
  double total = 0.0;
  for (size_t i : finite) {
    weights[i] = std::exp(scores[i] - top);
    total += weights[i];
  }
  for (size_t i : finite) weights[i] /= total;
  return weights;
}

Vector ContextVector(std::span<const std::string> context,
                     std::span<const double> weights,
                     const EmbeddingSpace &space) {
  Vector out(space.dim(), 0.0);
  for (size_t t = 0; t < context.size(); ++t) {
    if (weights[t] == 0.0) continue;
    std::span<const double> w = space.FindWord(context[t]);
    if (w.empty()) throw Error("attention weight on unknown token");
    for (int k = 0; k < space.dim(); ++k) out[k] += weights[t] * w[k];
  }
  return out;
}

std::vector<double> ScoreCandidates(const MentionInstance &instance,
                                    const EmbeddingSpace &space,
                                    const LocalModelParams &params) {
  return RunForward(instance, space, params).scores;
}

size_t ArgMax(std::span<const double> scores) {
  if (scores.empty()) throw Error("argmax of an empty score list");
  size_t best = 0;
  for (size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::string PredictLocal(const MentionInstance &instance,
                         const EmbeddingSpace &space,
                         const LocalModelParams &params) {
  const std::vector<double> scores = ScoreCandidates(instance, space, params);
  return instance.candidates[ArgMax(scores)].entity_id;
}

double RankingLoss(std::span<const double> scores, size_t gold_index,
                   double margin) {
  if (gold_index >= scores.size()) {
    throw InputError("gold index " + std::to_string(gold_index) +
                     " out of range for " + std::to_string(scores.size()) +
                     " candidates");
  }
  double loss = 0.0;
  for (size_t e = 0; e < scores.size(); ++e) {
    if (e == gold_index) continue;
    loss += std::max(0.0, margin - scores[gold_index] + scores[e]);
  }
  return loss;
}

LocalGradient GradLocal(const MentionInstance &instance,
                        const EmbeddingSpace &space,
                        const LocalModelParams &params, double margin) {
  const std::optional<size_t> gold = instance.GoldIndex();
  if (!gold) {
    throw InputError("gold entity of mention '" + instance.mention +
                     "' is not among its candidates");
  }
  const Forward fw = RunForward(instance, space, params);
  const int d = params.dim;
  const int h = params.hidden;

  LocalGradient out;
  out.grad = LocalModelParams::Zeros(d, h, params.top_r, params.window);
  out.loss = RankingLoss(fw.scores, *gold, margin);

  // dL/dpsi: +1 for every violating competitor, minus their count for gold.
  std::vector<double> dscore(fw.scores.size(), 0.0);
  for (size_t e = 0; e < fw.scores.size(); ++e) {
    if (e == *gold) continue;
    if (margin - fw.scores[*gold] + fw.scores[e] > 0.0) {
      dscore[e] += 1.0;
      dscore[*gold] -= 1.0;
    }
  }

  LocalModelParams &g = out.grad;
  Vector dcontext(d, 0.0);
  for (size_t e = 0; e < fw.scores.size(); ++e) {
    if (dscore[e] == 0.0) continue;
    g.output_bias += dscore[e];
    double dsimilarity = 0.0;
    for (int j = 0; j < h; ++j) {
      const double z = fw.preactivation[e][j];
      if (z <= 0.0) continue;
      g.output_weights[j] += dscore[e] * z;
      const double dz = dscore[e] * params.output_weights[j];
      g.hidden_bias[j] += dz;
      for (int i = 0; i < kNumFeatures; ++i) {
        g.hidden_weights[j * kNumFeatures + i] += dz * fw.features[e][i];
      }
      dsimilarity += dz * params.hidden_weights[j * kNumFeatures];
    }
    // similarity = sum_k e_k B_k c_k
    for (int k = 0; k < d; ++k) {
      g.combination[k] += dsimilarity * fw.entity_vecs[e][k] * fw.context[k];
      dcontext[k] += dsimilarity * fw.entity_vecs[e][k] * params.combination[k];
    }
  }

  // context = sum_t beta_t w_t, beta = softmax over the retained tokens.
  std::vector<double> dbeta(fw.beta.size(), 0.0);
  double expected = 0.0;
  for (size_t t = 0; t < fw.beta.size(); ++t) {
    if (fw.beta[t] == 0.0) continue;
    dbeta[t] = Dot(dcontext, fw.token_vecs[t]);
    expected += fw.beta[t] * dbeta[t];
  }
  for (size_t t = 0; t < fw.beta.size(); ++t) {
    if (fw.beta[t] == 0.0) continue;
    const double du = fw.beta[t] * (dbeta[t] - expected);
    std::span<const double> e = fw.entity_vecs[fw.attended_entity[t]];
    for (int k = 0; k < d; ++k) {
      g.attention[k] += du * e[k] * fw.token_vecs[t][k];
    }
  }
  return out;
}

}  // namespace nel
