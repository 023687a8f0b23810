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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "nel/errors.h"
#include "test_util.h"

namespace nel {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MentionInstance Instance(std::vector<std::string> left,
                         std::vector<std::string> right,
                         std::vector<Candidate> candidates,
                         std::optional<std::string> gold = std::nullopt) {
  MentionInstance inst;
  inst.doc_id = "d";
  inst.mention = "m";
  inst.left_context = std::move(left);
  inst.right_context = std::move(right);
  inst.candidates = std::move(candidates);
  inst.gold = std::move(gold);
  return inst;
}

TEST(ParamGroupTest, NamesRoundTrip) {
  for (ParamGroup g : kAllParamGroups) {
    EXPECT_EQ(ParseParamGroup(ParamGroupName(g)), g);
  }
  EXPECT_FALSE(ParseParamGroup("W3").has_value());
}

TEST(LocalModelParamsTest, DefaultsAndValidation) {
  const LocalModelParams p = LocalModelParams::Initialize(8, 1);
  EXPECT_EQ(p.hidden, 100);
  EXPECT_EQ(p.top_r, 20);
  EXPECT_EQ(p.window, 100);
  EXPECT_EQ(p.hidden_weights.size(), 200u);
  LocalModelParams bad = p;
  bad.top_r = 0;
  EXPECT_THROW(bad.Validate(), InputError);
  bad.top_r = 201;
  EXPECT_THROW(bad.Validate(), InputError);
  bad = p;
  bad.hidden_bias.pop_back();
  EXPECT_THROW(bad.Validate(), InputError);
}

TEST(AttentionScoresTest, IdentityReducesToCosine) {
  EmbeddingSpace space(3);
  space.AddWord("a", std::vector<double>{1, 2, 3});
  space.AddWord("b", std::vector<double>{-1, 0, 1});
  space.AddEntity("E", std::vector<double>{0, 1, 1});
  LocalModelParams p = LocalModelParams::Zeros(3);
  std::fill(p.attention.begin(), p.attention.end(), 1.0);
  const std::vector<std::string> ctx = {"a", "b"};
  const std::vector<Candidate> cands = {{"E", 1.0, std::nullopt}};
  const std::vector<double> u = AttentionScores(ctx, cands, space, p);
  EXPECT_NEAR(u[0], space.Similarity("a", "ENTITY/E"), 1e-15);
  EXPECT_NEAR(u[1], space.Similarity("b", "ENTITY/E"), 1e-15);
}

TEST(AttentionScoresTest, OutOfVocabularyTokens) {
  EmbeddingSpace space(2);
  space.AddEntity("E", std::vector<double>{1, 0});
  const LocalModelParams p = LocalModelParams::Initialize(2, 0);
  const std::vector<std::string> ctx = {"unknown", "words"};
  const std::vector<double> u =
      AttentionScores(ctx, std::vector<Candidate>{{"E", 1, std::nullopt}}, space, p);
  EXPECT_EQ(u, (std::vector<double>{-kInf, -kInf}));
  EXPECT_THROW(PruneTopR(u, 20), Error);
}

TEST(AttentionScoresTest, NeedsAnEmbeddedCandidate) {
  EmbeddingSpace space(2);
  space.AddWord("a", std::vector<double>{1, 0});
  const LocalModelParams p = LocalModelParams::Initialize(2, 0);
  const std::vector<std::string> ctx = {"a"};
  EXPECT_THROW(AttentionScores(ctx, std::vector<Candidate>{{"E", 1, std::nullopt}},
                               space, p),
               Error);
}

TEST(AttentionScoresTest, MatchesBruteForcePairMaximum) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    EmbeddingSpace space(6);
    std::vector<Vector> words, entities;
    for (int i = 0; i < 3; ++i) {
      space.AddWord("t" + std::to_string(i), testing::RandomVector(6, rng));
      words.emplace_back(space.FindWord("t" + std::to_string(i)).begin(),
                         space.FindWord("t" + std::to_string(i)).end());
    }
    std::vector<Candidate> cands;
    for (int e = 0; e < 2; ++e) {
      const std::string id = "e" + std::to_string(e);
      space.AddEntity(id, testing::RandomVector(6, rng));
      entities.emplace_back(space.FindEntity(id).begin(), space.FindEntity(id).end());
      cands.push_back({id, 0.5, std::nullopt});
    }
    LocalModelParams p = LocalModelParams::Zeros(6);
    p.attention = testing::RandomVector(6, rng);
    const std::vector<std::string> ctx = {"t0", "t1", "t2"};
    const std::vector<double> u = AttentionScores(ctx, cands, space, p);
    for (int t = 0; t < 3; ++t) {
      double best = -kInf;
      for (int e = 0; e < 2; ++e) {
        double s = 0;
        for (int k = 0; k < 6; ++k) s += entities[e][k] * p.attention[k] * words[t][k];
        best = std::max(best, s);
      }
      EXPECT_NEAR(u[t], best, 1e-14);
    }
  }
}

TEST(PruneTopRTest, FewerThanRKeepsAll) {
  const std::vector<double> scores = {0.1, 0.5, -0.2, 0.3, 0.0};
  const std::vector<double> beta = PruneTopR(scores, 20);
  for (double b : beta) EXPECT_GT(b, 0.0);
  EXPECT_NEAR(std::accumulate(beta.begin(), beta.end(), 0.0), 1.0, 1e-15);
}

TEST(PruneTopRTest, EqualScoresGiveUniformWeights) {
  const std::vector<double> scores = {0.7, 0.7, -kInf, 0.7, 0.7};
  const std::vector<double> beta = PruneTopR(scores, 20);
  EXPECT_EQ(beta, (std::vector<double>{0.25, 0.25, 0.0, 0.25, 0.25}));
}

TEST(PruneTopRTest, TiesPreferEarlierPositions) {
  const std::vector<double> scores = {0.2, 0.5, 0.5, 0.5, 0.1};
  const std::vector<double> beta = PruneTopR(scores, 2);
  EXPECT_EQ(beta[1], 0.5);
  EXPECT_EQ(beta[2], 0.5);
  EXPECT_EQ(beta[3], 0.0);
}

TEST(PruneTopRTest, MatchesSortingOracle) {
  std::mt19937_64 rng(30);
  std::normal_distribution<double> normal(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> scores(30);
    for (double &s : scores) s = normal(rng);
    for (int k = 0; k < 3; ++k) scores[rng() % 30] = -kInf;
    const std::vector<double> beta = PruneTopR(scores, 20);

    std::vector<std::pair<double, int>> order;
    for (int i = 0; i < 30; ++i) {
      if (std::isfinite(scores[i])) order.push_back({-scores[i], i});
    }
    std::sort(order.begin(), order.end());
    std::set<int> retained;
    for (int i = 0; i < 20; ++i) retained.insert(order[i].second);
    double z = 0;
    for (int i : retained) z += std::exp(scores[i]);
    double total = 0;
    int support = 0;
    for (int i = 0; i < 30; ++i) {
      if (retained.count(i)) {
        EXPECT_NEAR(beta[i], std::exp(scores[i]) / z, 1e-12);
        ++support;
      } else {
        EXPECT_EQ(beta[i], 0.0);
      }
      total += beta[i];
    }
    EXPECT_EQ(support, 20);
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(ContextVectorTest, WeightedSum) {
  EmbeddingSpace space(2);
  space.AddWord("a", std::vector<double>{1, 0});
  space.AddWord("b", std::vector<double>{0, 1});
  const std::vector<std::string> ctx = {"a", "b", "oov"};
  EXPECT_EQ(ContextVector(ctx, std::vector<double>{0, 1, 0}, space),
            (Vector{0, 1}));
  EXPECT_EQ(ContextVector(ctx, std::vector<double>{0.5, 0.5, 0}, space),
            (Vector{0.5, 0.5}));

  std::mt19937_64 rng(2);
  EmbeddingSpace big(5);
  std::vector<std::string> tokens;
  for (int i = 0; i < 10; ++i) {
    tokens.push_back("w" + std::to_string(i));
    big.AddWord(tokens.back(), testing::RandomVector(5, rng));
  }
  std::vector<double> raw(10);
  for (double &x : raw) x = std::uniform_real_distribution<double>(-1, 1)(rng);
  const std::vector<double> beta = PruneTopR(raw, 6);
  const Vector c = ContextVector(tokens, beta, big);
  for (int k = 0; k < 5; ++k) {
    double sum = 0;
    for (int t = 0; t < 10; ++t) sum += beta[t] * big.FindWord(tokens[t])[k];
    EXPECT_NEAR(c[k], sum, 1e-12);
  }
}

TEST(ScoreCandidatesTest, ZeroNetworkIsConstant) {
  EmbeddingSpace space(2);
  space.AddWord("a", std::vector<double>{1, 0});
  space.AddEntity("E", std::vector<double>{1, 1});
  space.AddEntity("F", std::vector<double>{1, -1});
  LocalModelParams p = LocalModelParams::Zeros(2);
  p.attention = {1, 1};
  p.combination = {1, 1};
  p.output_bias = 0.25;
  const MentionInstance inst =
      Instance({"a"}, {}, {{"E", 0.9, std::nullopt}, {"F", 0.1, std::nullopt}});
  EXPECT_EQ(ScoreCandidates(inst, space, p), (std::vector<double>{0.25, 0.25}));
}

// Two candidates, d = 2, H = 2, every quantity worked out by hand:
//   words x = (1,0), y = (0,1); entities e1 = (1,0), e2 = (0.6,0.8)
//   A = (1,1): u(x) = max(1, 0.6) = 1, u(y) = max(0, 0.8) = 0.8
//   beta = softmax(1, 0.8), c = (beta_x, beta_y)
//   B = (1,2): s1 = beta_x, s2 = 0.6 beta_x + 1.6 beta_y
//   W1 = [[1, 0.5], [-1, 1]], b1 = (0.1, 0.2), W2 = (2, 3), b2 = 0.5
// Hidden unit 2 is negative for both candidates and contributes nothing.
TEST(ScoreCandidatesTest, HandComputedForwardPass) {
  EmbeddingSpace space(2);
  space.AddWord("x", std::vector<double>{1, 0});
  space.AddWord("y", std::vector<double>{0, 1});
  space.AddEntity("e1", std::vector<double>{1, 0});
  space.AddEntity("e2", std::vector<double>{0.6, 0.8});
  LocalModelParams p = LocalModelParams::Zeros(2, 2);
  p.attention = {1, 1};
  p.combination = {1, 2};
  p.hidden_weights = {1, 0.5, -1, 1};
  p.hidden_bias = {0.1, 0.2};
  p.output_weights = {2, 3};
  p.output_bias = 0.5;
  const MentionInstance inst =
      Instance({"x"}, {"y"}, {{"e1", 0.5, std::nullopt}, {"e2", 0.25, std::nullopt}});

  const double bx = 1.0 / (1.0 + std::exp(-0.2));
  const double by = 1.0 - bx;
  const double s1 = bx;
  const double s2 = 0.6 * bx + 1.6 * by;
  const double l1 = std::log(0.5 + 1e-6);
  const double l2 = std::log(0.25 + 1e-6);
  const double psi1 = 2.0 * (s1 + 0.5 * l1 + 0.1) + 0.5;
  const double psi2 = 2.0 * (s2 + 0.5 * l2 + 0.1) + 0.5;
  ASSERT_LT(-s1 + l1 + 0.2, 0.0);
  ASSERT_LT(-s2 + l2 + 0.2, 0.0);

  const std::vector<double> psi = ScoreCandidates(inst, space, p);
  EXPECT_NEAR(psi[0], psi1, 1e-12);
  EXPECT_NEAR(psi[1], psi2, 1e-12);
  EXPECT_NEAR(psi[0], 1.106523, 1e-6);
  EXPECT_NEAR(psi[1], 1.414042, 1e-6);
  EXPECT_EQ(PredictLocal(inst, space, p), "e2");
}

TEST(ScoreCandidatesTest, MissingCandidateEmbeddingIsAnError) {
  EmbeddingSpace space(2);
  space.AddWord("x", std::vector<double>{1, 0});
  space.AddEntity("e1", std::vector<double>{1, 0});
  const MentionInstance inst =
      Instance({"x"}, {}, {{"e1", 0.5, std::nullopt}, {"e2", 0.5, std::nullopt}});
  EXPECT_THROW(ScoreCandidates(inst, space, LocalModelParams::Initialize(2, 0)),
               Error);
}

TEST(ScoreCandidatesTest, InvariantUnderContextPermutation) {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    testing::GradientCase c = testing::MakeGradientCase(seed);
    const std::vector<double> before = ScoreCandidates(c.instance, c.space, c.params);
    std::mt19937_64 rng(seed);
    std::vector<std::string> all = c.instance.left_context;
    all.insert(all.end(), c.instance.right_context.begin(),
               c.instance.right_context.end());
    // Permuting distinct-score tokens changes only summation order; duplicate
    // tokens are interchangeable even at the top-R boundary.
    std::shuffle(all.begin(), all.end(), rng);
    MentionInstance shuffled = c.instance;
    const size_t left = shuffled.left_context.size();
    shuffled.left_context.assign(all.begin(), all.begin() + left);
    shuffled.right_context.assign(all.begin() + left, all.end());
    const std::vector<double> after = ScoreCandidates(shuffled, c.space, c.params);
    for (size_t e = 0; e < before.size(); ++e) EXPECT_NEAR(before[e], after[e], 1e-10);
  }
}

TEST(PredictLocalTest, SingleCandidateAndShiftInvariance) {
  testing::GradientCase c = testing::MakeGradientCase(3);
  MentionInstance one = c.instance;
  one.candidates.resize(1);
  EXPECT_EQ(PredictLocal(one, c.space, c.params), one.candidates[0].entity_id);

  for (uint64_t seed = 0; seed < 40; ++seed) {
    testing::GradientCase g = testing::MakeGradientCase(seed);
    const std::vector<double> scores = ScoreCandidates(g.instance, g.space, g.params);
    // Brute-force argmax with lowest-index ties.
    size_t best = 0;
    for (size_t e = 0; e < scores.size(); ++e) {
      if (scores[e] > scores[best]) best = e;
    }
    const std::string predicted = PredictLocal(g.instance, g.space, g.params);
    EXPECT_EQ(predicted, g.instance.candidates[best].entity_id);
    const double loss = RankingLoss(scores, *g.instance.GoldIndex());

    LocalModelParams shifted = g.params;
    shifted.output_bias += 3.75;
    EXPECT_EQ(PredictLocal(g.instance, g.space, shifted), predicted);
    EXPECT_NEAR(RankingLoss(ScoreCandidates(g.instance, g.space, shifted),
                            *g.instance.GoldIndex()),
                loss, 1e-12);
  }
}

TEST(ArgMaxTest, LowestIndexOnTies) {
  EXPECT_EQ(ArgMax(std::vector<double>{1, 3, 3, 2}), 1u);
  EXPECT_THROW(ArgMax(std::vector<double>{}), Error);
}

TEST(RankingLossTest, Examples) {
  EXPECT_EQ(RankingLoss(std::vector<double>{1.0, 0.5, 0.9}, 0, 0.1), 0.0);
  EXPECT_NEAR(RankingLoss(std::vector<double>{0.5, 0.55}, 0, 0.1), 0.15, 1e-15);
  EXPECT_THROW(RankingLoss(std::vector<double>{0.5}, 1, 0.1), InputError);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0, 1);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> s(1 + rng() % 6);
    for (double &x : s) x = normal(rng);
    EXPECT_GE(RankingLoss(s, rng() % s.size(), 0.1), 0.0);
  }
}

TEST(GradLocalTest, ZeroLossGivesZeroGradient) {
  testing::GradientCase c = testing::MakeGradientCase(5);
  // A huge prior weight on the gold candidate satisfies every margin.
  for (auto &cand : c.instance.candidates) cand.prior = 1e-9;
  c.instance.candidates[*c.instance.GoldIndex()].prior = 1.0;
  LocalModelParams &p = c.params;
  std::fill(p.hidden_weights.begin(), p.hidden_weights.end(), 0.0);
  std::fill(p.hidden_bias.begin(), p.hidden_bias.end(), 20.0);
  p.hidden_weights[1] = 1.0;
  p.output_weights[0] = 1.0;
  const LocalGradient g = GradLocal(c.instance, c.space, p);
  ASSERT_EQ(g.loss, 0.0);
  for (ParamGroup group : kAllParamGroups) {
    for (double v : g.grad.Group(group)) EXPECT_EQ(v, 0.0);
  }
}

TEST(GradLocalTest, OutputBiasGradientIsExactlyZero) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    testing::GradientCase c = testing::MakeGradientCase(seed);
    EXPECT_EQ(GradLocal(c.instance, c.space, c.params).grad.output_bias, 0.0);
  }
}

TEST(GradLocalTest, RequiresGoldAmongCandidates) {
  testing::GradientCase c = testing::MakeGradientCase(1);
  c.instance.gold = "not_a_candidate";
  EXPECT_THROW(GradLocal(c.instance, c.space, c.params), InputError);
}

TEST(GradLocalTest, LossMatchesForwardPass) {
  testing::GradientCase c = testing::MakeGradientCase(9);
  EXPECT_EQ(GradLocal(c.instance, c.space, c.params).loss, testing::LossAt(c, c.params));
}

TEST(GradLocalTest, MatchesFiniteDifferences) {
  int checked = 0;
  for (uint64_t seed = 1000; seed < 1030; ++seed) {
    const testing::GradientCase c = testing::MakeGradientCase(seed);
    if (testing::KinkDistance(c) < 1e-6) continue;
    const testing::GradientCheck check = testing::CheckGradient(c);
    EXPECT_LT(check.max_rel_error, 1e-4) << "seed " << seed;
    ++checked;
  }
  EXPECT_GE(checked, 25);
}

TEST(GradLocalTest, SmallerWindowAndTopR) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    testing::GradientCase c = testing::MakeGradientCase(seed, 4, 7);
    c.params.top_r = 3;
    c.params.window = 5;
    if (testing::KinkDistance(c) < 1e-6) continue;
    EXPECT_LT(testing::CheckGradient(c).max_rel_error, 1e-4) << seed;
  }
}

}  // namespace
}  // namespace nel
