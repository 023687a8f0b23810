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

#include "nel/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "nel/errors.h"

namespace nel {

namespace {

Vector RandomUnit(int dim, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  double norm = 0.0;
  do {
    for (double &x : v) x = normal(rng);
    norm = Norm(v);
  } while (norm < 1e-6);
  for (double &x : v) x /= norm;
  return v;
}

std::string Numbered(const char *prefix, size_t n) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%s%03zu", prefix, n);
  return buffer;
}

}  // namespace

std::vector<size_t> EntityRange(size_t begin, size_t end) {
  std::vector<size_t> out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

SyntheticWorld MakeSyntheticWorld(const SyntheticConfig &config) {
  if (config.num_entities < 1 || config.dim < 1 ||
      config.words_per_entity < 1 || config.noise_words < 1 ||
      config.min_candidates < 1 ||
      config.max_candidates < config.min_candidates ||
      config.min_context < 1 || config.max_context < config.min_context ||
      config.max_context > static_cast<int>(kContextWindow) ||
      config.mentions_per_doc < 1) {
    throw InputError("invalid synthetic corpus configuration");
  }
  SyntheticWorld world;
  world.config = config;
  world.space = EmbeddingSpace(config.dim);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double spread = config.cluster_noise / std::sqrt(config.dim);

  for (int e = 0; e < config.num_entities; ++e) {
    const std::string id = Numbered("ent", e);
    const Vector center = RandomUnit(config.dim, rng);
    world.space.AddWord(id, center);
    world.entity_ids.push_back(id);
    std::vector<std::string> cluster;
    for (int k = 0; k < config.words_per_entity; ++k) {
      Vector v = center;
      for (double &x : v) x += spread * normal(rng);
      const std::string word = id + "_w" + std::to_string(k);
      world.space.AddWord(word, v);
      cluster.push_back(word);
    }
    world.cluster_words.push_back(std::move(cluster));
  }
  for (int k = 0; k < config.noise_words; ++k) {
    const std::string word = Numbered("noise", k);
    world.space.AddWord(word, RandomUnit(config.dim, rng));
    world.noise_words.push_back(word);
  }
  return world;
}

Dataset SampleSyntheticDataset(const SyntheticWorld &world,
                               std::span<const size_t> entities,
                               size_t num_instances, const std::string &name,
                               uint64_t seed) {
  const SyntheticConfig &config = world.config;
  if (entities.empty()) throw InputError("empty entity pool");
  for (size_t e : entities) {
    if (e >= world.entity_ids.size()) throw InputError("entity index out of range");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_int = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  std::vector<size_t> golds;
  std::vector<size_t> cycle(entities.begin(), entities.end());
  while (golds.size() < num_instances) {
    std::shuffle(cycle.begin(), cycle.end(), rng);
    for (size_t e : cycle) {
      if (golds.size() == num_instances) break;
      golds.push_back(e);
    }
  }

  Dataset ds;
  ds.name = name;
  const int max_candidates =
      std::min<int>(config.max_candidates, static_cast<int>(entities.size()));
  const int min_candidates = std::min(config.min_candidates, max_candidates);
  for (size_t i = 0; i < num_instances; ++i) {
    const size_t gold = golds[i];
    MentionInstance instance;
    instance.doc_id =
        name + "-doc" + std::to_string(i / static_cast<size_t>(config.mentions_per_doc));
    instance.mention = "mention" + std::to_string(gold % 7);

    std::vector<size_t> chosen = {gold};
    const int count = uniform_int(min_candidates, max_candidates);
    std::vector<size_t> pool;
    for (size_t e : entities) {
      if (e != gold) pool.push_back(e);
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + (count - 1));
    std::shuffle(chosen.begin(), chosen.end(), rng);

    std::vector<double> weights;
    for (size_t k = 0; k < chosen.size(); ++k) weights.push_back(0.05 + unit(rng));
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (size_t k = 0; k < chosen.size(); ++k) {
      instance.candidates.push_back(
          Candidate{world.entity_ids[chosen[k]], weights[k] / total, std::nullopt});
    }

    auto draw_context = [&]() {
      std::vector<std::string> tokens;
      const int length = uniform_int(config.min_context, config.max_context);
      const auto &cluster = world.cluster_words[gold];
      for (int t = 0; t < length; ++t) {
        if (unit(rng) < config.signal_fraction) {
          tokens.push_back(cluster[uniform_int(0, static_cast<int>(cluster.size()) - 1)]);
        } else {
          tokens.push_back(world.noise_words[uniform_int(
              0, static_cast<int>(world.noise_words.size()) - 1)]);
        }
      }
      return tokens;
    };
    instance.left_context = draw_context();
    instance.right_context = draw_context();
    // At least one signal word per mention keeps the corpus separable.
    const std::string prefix = world.entity_ids[gold] + "_w";
    auto is_signal = [&](const std::string &w) { return w.rfind(prefix, 0) == 0; };
    if (std::none_of(instance.left_context.begin(), instance.left_context.end(),
                     is_signal) &&
        std::none_of(instance.right_context.begin(),
                     instance.right_context.end(), is_signal)) {
      instance.left_context.back() = world.cluster_words[gold].front();
    }
    instance.gold = world.entity_ids[gold];
    ds.instances.push_back(std::move(instance));
  }
  return ds;
}

}  // namespace nel
