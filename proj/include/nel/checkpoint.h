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

#ifndef NEL_CHECKPOINT_H_
#define NEL_CHECKPOINT_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "nel/embeddings.h"
#include "nel/global_model.h"
#include "nel/local_model.h"

namespace nel {

inline constexpr std::string_view kCheckpointMagic = "NELTL1";
inline constexpr uint32_t kCheckpointVersion = 1;

// Trained model state. The binary layout is described in
// docs/checkpoint_format.md.
struct Checkpoint {
  LocalModelParams local;
  std::optional<GlobalModelParams> global;
  // Free-form reference to the embedding space the model was trained with.
  std::string space_ref;
  // Freeze mask of the training run that last updated the parameters.
  std::set<ParamGroup> frozen;
  // Short description of that run, e.g. "train" or "finetune:output-layer".
  std::string provenance;
};

std::string SerializeCheckpoint(const Checkpoint &checkpoint);

// Throws InputError on bad magic, unsupported version, truncation, checksum
// mismatch, or when `space` is given and its dimension differs from the
// model's. Nothing is returned unless the whole file is valid.
Checkpoint DeserializeCheckpoint(std::string_view bytes,
                                 const EmbeddingSpace *space = nullptr);

void SaveCheckpoint(const Checkpoint &checkpoint, const std::string &path);
Checkpoint LoadCheckpoint(const std::string &path,
                          const EmbeddingSpace *space = nullptr);

// Human-readable JSON rendering for diffing; not read back.
std::string ExportCheckpointJson(const Checkpoint &checkpoint);

}  // namespace nel

#endif  // NEL_CHECKPOINT_H_
