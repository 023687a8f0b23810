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

#ifndef NEL_TESTS_TEST_UTIL_H_
#define NEL_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nel/corpus.h"
#include "nel/embeddings.h"
#include "nel/local_model.h"
#include "nel/synthetic.h"
#include "nel/trainer.h"
#include "nel/transfer.h"

namespace nel::testing {

// Fresh per-process scratch directory.
inline std::filesystem::path ScratchDir(const std::string &name) {
  std::filesystem::path dir = std::filesystem::temp_directory_path() /
                              ("nel_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string ReadAll(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void WriteAll(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

// Random dataset that satisfies every corpus invariant. Entity ids come from
// a small pool so that overlaps and duplicates across instances are common;
// gold is sometimes absent from the candidates and occasionally missing.
inline Dataset RandomDataset(std::mt19937_64 &rng, const std::string &name,
                             bool allow_missing_gold = true) {
  auto pick = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  static const std::vector<std::string> kWords = {
      "the", "Court", "of", "Justice", "ruled", "on", "1.2", "€", "Article",
      "(a)", "#tag", "x,y", "a|b", "über"};
  Dataset ds;
  ds.name = name;
  const int num_docs = pick(1, 6);
  const int num = pick(0, 25);
  for (int i = 0; i < num; ++i) {
    MentionInstance inst;
    inst.doc_id = "doc" + std::to_string(pick(0, num_docs - 1));
    inst.mention = kWords[pick(0, static_cast<int>(kWords.size()) - 1)] +
                   (pick(0, 3) == 0 ? " Union" : "");
    for (int side = 0; side < 2; ++side) {
      auto &ctx = side == 0 ? inst.left_context : inst.right_context;
      const int len = pick(0, 3) == 0 ? pick(90, 100) : pick(0, 8);
      for (int t = 0; t < len; ++t) {
        ctx.push_back(kWords[pick(0, static_cast<int>(kWords.size()) - 1)]);
      }
    }
    const int num_candidates = pick(1, 5);
    std::vector<int> ids;
    while (static_cast<int>(ids.size()) < num_candidates) {
      const int id = pick(0, 12);
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    std::uniform_real_distribution<double> prior(0.0, 1.0);
    for (int id : ids) {
      double p = prior(rng);
      if (pick(0, 9) == 0) p = pick(0, 1);  // exact 0 and 1
      inst.candidates.push_back(
          Candidate{"E_" + std::to_string(id) + "_(x)", p, std::nullopt});
    }
    const int gold_mode = pick(0, 9);
    if (gold_mode < 7) {
      inst.gold = inst.candidates[pick(0, num_candidates - 1)].entity_id;
    } else if (gold_mode < 9 || !allow_missing_gold) {
      inst.gold = "E_" + std::to_string(pick(13, 15)) + "_(x)";
    }
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

inline Vector RandomVector(int dim, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (double &x : v) x = normal(rng);
  return v;
}

// One randomized gradient-check configuration.
struct GradientCase {
  EmbeddingSpace space{1};
  MentionInstance instance;
  LocalModelParams params;
};

inline GradientCase MakeGradientCase(uint64_t seed, int dim = 8,
                                     int hidden = kDefaultHidden) {
  std::mt19937_64 rng(seed);
  auto pick = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  GradientCase c;
  c.space = EmbeddingSpace(dim);
  const int vocab = 40;
  for (int w = 0; w < vocab; ++w) {
    c.space.AddWord("w" + std::to_string(w), RandomVector(dim, rng));
  }
  const int num_candidates = pick(2, 6);
  c.instance.doc_id = "d";
  c.instance.mention = "m";
  for (int e = 0; e < num_candidates; ++e) {
    const std::string id = "e" + std::to_string(e);
    c.space.AddEntity(id, RandomVector(dim, rng));
    c.instance.candidates.push_back(
        Candidate{id, std::uniform_real_distribution<double>(0.01, 1.0)(rng),
                  std::nullopt});
  }
  c.instance.gold = c.instance.candidates[pick(0, num_candidates - 1)].entity_id;
  for (int side = 0; side < 2; ++side) {
    auto &ctx = side == 0 ? c.instance.left_context : c.instance.right_context;
    const int len = pick(3, 18);
    for (int t = 0; t < len; ++t) {
      // Roughly one token in ten is out of vocabulary.
      ctx.push_back(pick(0, 9) == 0 ? "oov" + std::to_string(t)
                                    : "w" + std::to_string(pick(0, vocab - 1)));
    }
  }
  c.params = LocalModelParams::Initialize(dim, seed * 7919 + 1, hidden);
  for (double &a : c.params.attention) a = 1.0 + 0.5 * unit(rng);
  for (double &b : c.params.combination) b = 1.0 + 0.5 * unit(rng);
  for (double &b : c.params.hidden_bias) b = 0.3 * unit(rng);
  for (double &w : c.params.hidden_weights) w *= 3.0;
  c.params.output_bias = unit(rng);
  return c;
}

// Loss as a function of the parameters, for finite differences.
inline double LossAt(const GradientCase &c, const LocalModelParams &params,
                     double margin = kDefaultMargin) {
  return RankingLoss(ScoreCandidates(c.instance, c.space, params),
                     *c.instance.GoldIndex(), margin);
}

// Distance of the configuration to the nearest non-differentiable point of
// the pipeline: hinge corners, ReLU corners, entity-max ties and the top-R
// selection boundary. Recomputed here from first principles.
inline double KinkDistance(const GradientCase &c, double margin = kDefaultMargin) {
  const LocalModelParams &p = c.params;
  const int d = p.dim;
  double dist = std::numeric_limits<double>::infinity();
  const std::vector<std::string> ctx = ContextTokens(c.instance, p.window);

  std::vector<double> top;
  for (const std::string &tok : ctx) {
    std::span<const double> w = c.space.FindWord(tok);
    if (w.empty()) continue;
    std::vector<double> per_entity;
    for (const Candidate &cand : c.instance.candidates) {
      std::span<const double> e = c.space.FindEntity(cand.entity_id);
      double u = 0.0;
      for (int k = 0; k < d; ++k) u += e[k] * p.attention[k] * w[k];
      per_entity.push_back(u);
    }
    std::sort(per_entity.rbegin(), per_entity.rend());
    if (per_entity.size() > 1) dist = std::min(dist, per_entity[0] - per_entity[1]);
    top.push_back(per_entity[0]);
  }
  std::sort(top.rbegin(), top.rend());
  if (top.size() > static_cast<size_t>(p.top_r)) {
    dist = std::min(dist, top[p.top_r - 1] - top[p.top_r]);
  }

  const std::vector<double> scores =
      AttentionScores(ctx, c.instance.candidates, c.space, p);
  const std::vector<double> beta = PruneTopR(scores, p.top_r);
  const Vector context = ContextVector(ctx, beta, c.space);
  std::vector<double> psi;
  for (const Candidate &cand : c.instance.candidates) {
    std::span<const double> e = c.space.FindEntity(cand.entity_id);
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += e[k] * p.combination[k] * context[k];
    const double lp = std::log(cand.prior + kPriorEpsilon);
    for (int j = 0; j < p.hidden; ++j) {
      const double z = p.hidden_weights[2 * j] * s +
                       p.hidden_weights[2 * j + 1] * lp + p.hidden_bias[j];
      dist = std::min(dist, std::abs(z));
    }
  }
  psi = ScoreCandidates(c.instance, c.space, p);
  const size_t g = *c.instance.GoldIndex();
  for (size_t e = 0; e < psi.size(); ++e) {
    if (e != g) dist = std::min(dist, std::abs(margin - psi[g] + psi[e]));
  }
  return dist;
}

struct GradientCheck {
  double max_rel_error = 0.0;
  size_t coordinates = 0;
};

// Central differences over every parameter coordinate. The relative error
// uses max(|analytic|, |numeric|, floor) as denominator.
inline GradientCheck CheckGradient(const GradientCase &c, double h = 1e-5,
                                   double floor = 1e-3) {
  const LocalGradient analytic = GradLocal(c.instance, c.space, c.params);
  GradientCheck check;
  LocalModelParams probe = c.params;
  for (ParamGroup group : kAllParamGroups) {
    std::span<double> values = probe.Group(group);
    std::span<const double> grads = analytic.grad.Group(group);
    for (size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = LossAt(c, probe);
      values[i] = saved - h;
      const double down = LossAt(c, probe);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double denom =
          std::max({std::abs(grads[i]), std::abs(numeric), floor});
      check.max_rel_error =
          std::max(check.max_rel_error, std::abs(grads[i] - numeric) / denom);
      ++check.coordinates;
    }
  }
  return check;
}


// Embedding space plus a document whose mentions draw candidates from it.
// Entity vectors of mention i are supported on `supports[i]` dimensions when
// given (empty = all dimensions), which lets tests zero out chosen edges.
struct DocumentCase {
  EmbeddingSpace space{1};
  std::vector<MentionInstance> mentions;
  LocalModelParams params;
};

inline DocumentCase MakeDocumentCase(
    uint64_t seed, int num_mentions, int min_candidates, int max_candidates,
    int dim = 8, const std::vector<std::vector<int>> &supports = {}) {
  std::mt19937_64 rng(seed);
  auto pick = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  DocumentCase c;
  c.space = EmbeddingSpace(dim);
  for (int w = 0; w < 20; ++w) {
    c.space.AddWord("w" + std::to_string(w), RandomVector(dim, rng));
  }
  for (int m = 0; m < num_mentions; ++m) {
    MentionInstance inst;
    inst.doc_id = "doc";
    inst.mention = "m" + std::to_string(m);
    const int k = pick(min_candidates, max_candidates);
    for (int e = 0; e < k; ++e) {
      const std::string id = "m" + std::to_string(m) + "e" + std::to_string(e);
      Vector v = RandomVector(dim, rng);
      if (static_cast<size_t>(m) < supports.size() && !supports[m].empty()) {
        Vector masked(dim, 0.0);
        for (int dim_index : supports[m]) masked[dim_index] = v[dim_index];
        v = masked;
      }
      c.space.AddEntity(id, v);
      inst.candidates.push_back(
          Candidate{id, std::uniform_real_distribution<double>(0.05, 1.0)(rng),
                    std::nullopt});
    }
    inst.gold = inst.candidates[0].entity_id;
    for (int t = 0; t < pick(2, 8); ++t) {
      inst.left_context.push_back("w" + std::to_string(pick(0, 19)));
    }
    c.mentions.push_back(std::move(inst));
  }
  c.params = LocalModelParams::Initialize(dim, seed + 17, 16);
  return c;
}

// Train/valid/test draws from one synthetic world, with entity embeddings
// built for every candidate.
struct SyntheticSplits {
  SyntheticWorld world;
  Dataset train, valid, test;
};

inline SyntheticSplits MakeSyntheticSplits(uint64_t seed, size_t n_train,
                                           size_t n_valid, size_t n_test,
                                           int num_entities = 40, int dim = 16) {
  SyntheticConfig config;
  config.num_entities = num_entities;
  config.dim = dim;
  config.seed = seed;
  SyntheticSplits s{MakeSyntheticWorld(config), {}, {}, {}};
  const std::vector<size_t> all = EntityRange(0, num_entities);
  s.train = SampleSyntheticDataset(s.world, all, n_train, "syn-train", seed + 1);
  s.valid = SampleSyntheticDataset(s.world, all, n_valid, "syn-valid", seed + 2);
  s.test = SampleSyntheticDataset(s.world, all, n_test, "syn-test", seed + 3);
  for (const Dataset *ds : {&s.train, &s.valid, &s.test}) {
    s.world.space.ExtendForDataset(*ds);
  }
  return s;
}

// Source corpus over entities [0, 40) and target corpus over [12, 52), so
// 70% of the target's entities also appear in the source. Returns target
// test F1 of {from-scratch, fine-tuned} models trained for `epochs` epochs.
struct TransferOutcome {
  double scratch_f1 = 0.0;
  double transfer_f1 = 0.0;
  double overlap = 0.0;  // entity_overlap(target test, source train)
};

inline TransferOutcome RunTransferExperiment(uint64_t seed, int epochs) {
  SyntheticConfig config;
  config.num_entities = 52;
  config.dim = 16;
  config.seed = seed;
  SyntheticWorld world = MakeSyntheticWorld(config);
  const std::vector<size_t> source = EntityRange(0, 40);
  const std::vector<size_t> target = EntityRange(12, 52);
  const Dataset source_train =
      SampleSyntheticDataset(world, source, 500, "source-train", seed + 1);
  const Dataset source_valid =
      SampleSyntheticDataset(world, source, 100, "source-valid", seed + 2);
  const Dataset target_train =
      SampleSyntheticDataset(world, target, 100, "target-train", seed + 3);
  const Dataset target_valid =
      SampleSyntheticDataset(world, target, 50, "target-valid", seed + 4);
  const Dataset target_test =
      SampleSyntheticDataset(world, target, 200, "target-test", seed + 5);
  world.space.ExtendForDataset(source_train);
  world.space.ExtendForDataset(source_valid);

  TrainConfig train_config;
  train_config.seed = seed;
  const LocalModelParams init = LocalModelParams::Initialize(16, seed);
  const LocalModelParams pretrained =
      Train(init, source_train, source_valid, world.space, train_config).params;

  for (const Dataset *ds : {&target_train, &target_valid, &target_test}) {
    PrepareTarget(world.space, *ds);
  }
  TrainConfig target_config = train_config;
  target_config.epochs_max = epochs;
  TransferOutcome out;
  out.overlap = EntityOverlap(target_test, source_train);
  const TrainResult scratch =
      Train(init, target_train, target_valid, world.space, target_config);
  const TrainResult tuned =
      FineTune(pretrained, target_train, target_valid, world.space,
               TransferMode::kFullFineTune, target_config);
  out.scratch_f1 = Evaluate(scratch.params, nullptr, target_test, world.space).f1;
  out.transfer_f1 = Evaluate(tuned.params, nullptr, target_test, world.space).f1;
  return out;
}

}  // namespace nel::testing

#endif  // NEL_TESTS_TEST_UTIL_H_
