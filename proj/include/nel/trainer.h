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

#ifndef NEL_TRAINER_H_
#define NEL_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nel/corpus.h"
#include "nel/embeddings.h"
#include "nel/global_model.h"
#include "nel/local_model.h"

namespace nel {

struct TrainConfig {
  double learning_rate = 1e-2;
  int epochs_max = 30;
  double margin = kDefaultMargin;
  // Consecutive non-improving epochs tolerated before stopping; 0 behaves
  // like 1.
  int patience = 5;
  uint64_t seed = 0;
  int batch_size = 1;
  // Groups left untouched by the optimizer.
  std::set<ParamGroup> freeze_mask;
  // Halve the learning rate whenever validation F1 has stalled for two
  // consecutive epochs.
  bool decay_on_plateau = false;

  void Validate() const;
};

struct EpochRecord {
  double train_loss = 0.0;  // mean hinge loss over the epoch's updates
  double validation_f1 = 0.0;
  double learning_rate = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  // 1-based; 0 if no epoch ran.
  int stopped_epoch = 0;
  int best_epoch = 0;
};

struct TrainResult {
  LocalModelParams params;  // best-validation parameters
  TrainHistory history;
};

struct DocumentScore {
  size_t correct = 0;
  size_t total = 0;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  size_t correct = 0;
  size_t total = 0;
  std::map<std::string, DocumentScore> per_document;
};

// Harmonic mean of precision and recall, 0 when both are 0.
double F1Score(double precision, double recall);

// Checks that every candidate entity of `ds` is embedded; throws Error
// naming the first one that is not.
void RequireEmbedded(const Dataset &ds, const EmbeddingSpace &space);

// Plain SGD on the summed-hinge ranking loss with early stopping on
// validation F1 of local predictions.
TrainResult Train(const LocalModelParams &init, const Dataset &train,
                  const Dataset &valid, const EmbeddingSpace &space,
                  const TrainConfig &config);

// Applies one SGD step from the mean gradient of `batch`. Frozen groups are
// left bit-identical. Returns the summed loss of the batch before the step.
double SgdStep(LocalModelParams &params,
               const std::vector<const MentionInstance *> &batch,
               const EmbeddingSpace &space, const TrainConfig &config,
               double learning_rate);

// One prediction per mention: local argmax, or collective decoding per
// document when `global` is given. Mentions whose candidate set lacks the
// gold entity count as errors.
std::vector<std::string> Predict(const LocalModelParams &params,
                                 const GlobalModelParams *global,
                                 const Dataset &ds,
                                 const EmbeddingSpace &space);

EvalReport Evaluate(const LocalModelParams &params,
                    const GlobalModelParams *global, const Dataset &ds,
                    const EmbeddingSpace &space);

}  // namespace nel

#endif  // NEL_TRAINER_H_
