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

#include "nel/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "nel/errors.h"

namespace nel {

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InputError("learning rate must be positive");
  }
  if (epochs_max < 0) throw InputError("epochs must be non-negative");
  if (patience < 0) throw InputError("patience must be non-negative");
  if (batch_size < 1) throw InputError("batch size must be at least 1");
  if (!(margin >= 0.0)) throw InputError("margin must be non-negative");
}

double F1Score(double precision, double recall) {
  const double denominator = precision + recall;
  if (denominator == 0.0) return 0.0;
  return 2.0 * precision * recall / denominator;
}

void RequireEmbedded(const Dataset &ds, const EmbeddingSpace &space) {
  for (const MentionInstance &instance : ds.instances) {
    for (const Candidate &candidate : instance.candidates) {
      if (!space.HasEntity(candidate.entity_id)) {
        throw Error("dataset '" + ds.name + "': candidate entity '" +
                    candidate.entity_id + "' has no embedding");
      }
    }
  }
}

double SgdStep(LocalModelParams &params,
               const std::vector<const MentionInstance *> &batch,
               const EmbeddingSpace &space, const TrainConfig &config,
               double learning_rate) {
  if (batch.empty()) return 0.0;
  double loss = 0.0;
  std::optional<LocalModelParams> total;
  for (const MentionInstance *instance : batch) {
    LocalGradient g = GradLocal(*instance, space, params, config.margin);
    loss += g.loss;
    if (!total) {
      total = std::move(g.grad);
      continue;
    }
    for (ParamGroup group : kAllParamGroups) {
      std::span<double> acc = total->Group(group);
      std::span<const double> add = g.grad.Group(group);
      for (size_t i = 0; i < acc.size(); ++i) acc[i] += add[i];
    }
  }
  const double scale = learning_rate / static_cast<double>(batch.size());
  for (ParamGroup group : kAllParamGroups) {
    if (config.freeze_mask.count(group)) continue;
    std::span<double> values = params.Group(group);
    std::span<const double> grad = total->Group(group);
    for (size_t i = 0; i < values.size(); ++i) values[i] -= scale * grad[i];
  }
  return loss;
}

TrainResult Train(const LocalModelParams &init, const Dataset &train,
                  const Dataset &valid, const EmbeddingSpace &space,
                  const TrainConfig &config) {
  config.Validate();
  init.Validate();
  TrainResult result{init, {}};
  if (config.epochs_max == 0) return result;

  RequireEmbedded(train, space);
  RequireEmbedded(valid, space);
  if (valid.instances.empty()) throw InputError("validation set is empty");
  std::vector<const MentionInstance *> usable;
  for (const MentionInstance &instance : train.instances) {
    if (!instance.gold) {
      throw InputError("training mention '" + instance.mention + "' in doc '" +
                       instance.doc_id + "' has no gold entity");
    }
    // Without the gold entity among the candidates there is no margin to
    // enforce.
    if (instance.GoldIndex()) usable.push_back(&instance);
  }

  LocalModelParams params = init;
  double learning_rate = config.learning_rate;
  double best_f1 = -1.0;
  int stalled = 0;
  std::vector<size_t> order(usable.size());
  for (int epoch = 1; epoch <= config.epochs_max; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    std::seed_seq seq{static_cast<uint32_t>(config.seed),
                      static_cast<uint32_t>(config.seed >> 32),
                      static_cast<uint32_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    double loss = 0.0;
    std::vector<const MentionInstance *> batch;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size)) {
      const size_t end =
          std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      batch.clear();
      for (size_t i = start; i < end; ++i) batch.push_back(usable[order[i]]);
      loss += SgdStep(params, batch, space, config, learning_rate);
    }

    EpochRecord record;
    record.train_loss =
        usable.empty() ? 0.0 : loss / static_cast<double>(usable.size());
    record.validation_f1 = Evaluate(params, nullptr, valid, space).f1;
    record.learning_rate = learning_rate;
    result.history.epochs.push_back(record);
    result.history.stopped_epoch = epoch;

    if (record.validation_f1 > best_f1) {
      best_f1 = record.validation_f1;
      result.params = params;
      result.history.best_epoch = epoch;
      stalled = 0;
    } else {
      ++stalled;
      if (stalled >= std::max(config.patience, 1)) break;
      if (config.decay_on_plateau && stalled % 2 == 0) learning_rate *= 0.5;
    }
  }
  return result;
}

std::vector<std::string> Predict(const LocalModelParams &params,
                                 const GlobalModelParams *global,
                                 const Dataset &ds,
                                 const EmbeddingSpace &space) {
  std::vector<std::string> predictions(ds.instances.size());
  if (global == nullptr) {
    for (size_t i = 0; i < ds.instances.size(); ++i) {
      predictions[i] = PredictLocal(ds.instances[i], space, params);
    }
    return predictions;
  }
  std::unordered_map<std::string, std::vector<size_t>> by_doc;
  for (size_t i = 0; i < ds.instances.size(); ++i) {
    by_doc[ds.instances[i].doc_id].push_back(i);
  }
  for (const std::string &doc : ds.DocumentIds()) {
    const std::vector<size_t> &members = by_doc[doc];
    std::vector<MentionInstance> mentions;
    mentions.reserve(members.size());
    for (size_t i : members) mentions.push_back(ds.instances[i]);
    std::vector<std::string> decoded =
        PredictDocument(mentions, space, params, *global);
    for (size_t k = 0; k < members.size(); ++k) {
      predictions[members[k]] = std::move(decoded[k]);
    }
  }
  return predictions;
}

EvalReport Evaluate(const LocalModelParams &params,
                    const GlobalModelParams *global, const Dataset &ds,
                    const EmbeddingSpace &space) {
  if (ds.instances.empty()) {
    throw InputError("cannot evaluate on empty dataset '" + ds.name + "'");
  }
  for (const MentionInstance &instance : ds.instances) {
    if (!instance.gold) {
      throw InputError("evaluation mention '" + instance.mention +
                       "' in doc '" + instance.doc_id + "' has no gold entity");
    }
  }
  const std::vector<std::string> predictions =
      Predict(params, global, ds, space);

  EvalReport report;
  report.total = ds.instances.size();
  for (size_t i = 0; i < ds.instances.size(); ++i) {
    const MentionInstance &instance = ds.instances[i];
    DocumentScore &doc = report.per_document[instance.doc_id];
    ++doc.total;
    if (predictions[i] == *instance.gold) {
      ++doc.correct;
      ++report.correct;
    }
  }
  // Every mention receives exactly one prediction, so the number of
  // predictions equals the number of gold annotations.
  const double fraction =
      static_cast<double>(report.correct) / static_cast<double>(report.total);
  report.precision = fraction;
  report.recall = fraction;
  report.accuracy = fraction;
  report.f1 = F1Score(report.precision, report.recall);
  return report;
}

}  // namespace nel
