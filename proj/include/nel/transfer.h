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

#ifndef NEL_TRANSFER_H_
#define NEL_TRANSFER_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nel/corpus.h"
#include "nel/embeddings.h"
#include "nel/local_model.h"
#include "nel/trainer.h"

namespace nel {

enum class TransferMode {
  kFullFineTune,     // every parameter group keeps training
  kOutputLayerOnly,  // only f_W2 and f_b2 are updated
};

std::string_view TransferModeName(TransferMode mode);  // "full", "output-layer"
std::optional<TransferMode> ParseTransferMode(std::string_view name);

std::set<ParamGroup> FreezeMaskFor(TransferMode mode);

// Embeds the target dataset's new candidate entities. Must run before
// FineTune so that the pretrained model can score (and link) them.
ExtensionReport PrepareTarget(EmbeddingSpace &space, const Dataset &target,
                              const EvidenceSource &evidence = DefaultEvidence);

// Continues training from the pretrained weights on the target data. Any
// freeze mask in `config` is replaced by the mode's mask.
TrainResult FineTune(const LocalModelParams &pretrained,
                     const Dataset &target_train, const Dataset &target_valid,
                     const EmbeddingSpace &space, TransferMode mode,
                     TrainConfig config);

enum class Winner { kSingle, kTransfer, kBoth };

struct ComparisonRow {
  std::string dataset;
  double single_f1 = 0.0;
  double transfer_f1 = 0.0;
  Winner winner = Winner::kBoth;
};

// Rows in dataset-name order, the larger F1 flagged; ties flag both.
// Throws InputError listing datasets present in only one of the maps.
std::vector<ComparisonRow> CompareTransfer(
    const std::map<std::string, double> &single,
    const std::map<std::string, double> &transfer);

// Aligned plain-text table; winning values carry a trailing '*'.
std::string FormatComparisonText(const std::vector<ComparisonRow> &rows);
// dataset,single_f1,transfer_f1,winner
std::string FormatComparisonCsv(const std::vector<ComparisonRow> &rows);

}  // namespace nel

#endif  // NEL_TRANSFER_H_
