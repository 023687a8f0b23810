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

#ifndef NEL_CORPUS_H_
#define NEL_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nel {

// Maximum number of context tokens kept on each side of a mention.
inline constexpr size_t kContextWindow = 100;

// Marker used in the gold column for unannotated instances.
inline constexpr std::string_view kNoGold = "-";

struct Candidate {
  std::string entity_id;
  double prior = 0.0;
  // Not serialized in the v1 TSV format.
  std::optional<std::string> display_name;

  bool operator==(const Candidate &other) const = default;
};

// One linking example: a mention, its context windows and candidate set.
struct MentionInstance {
  std::string doc_id;
  std::string mention;
  std::vector<std::string> left_context;
  std::vector<std::string> right_context;
  std::vector<Candidate> candidates;
  std::optional<std::string> gold;

  // Index of the gold entity in the candidate list, if it is there.
  std::optional<size_t> GoldIndex() const;

  bool operator==(const MentionInstance &other) const = default;
};

struct Dataset {
  std::string name;
  std::vector<MentionInstance> instances;

  // Distinct doc ids in order of first appearance.
  std::vector<std::string> DocumentIds() const;
  size_t NumDocuments() const { return DocumentIds().size(); }
};

struct DatasetStats {
  size_t mentions = 0;
  size_t documents = 0;
  double gold_recall = 0.0;
};

// Pairwise entity overlap percentages. Absent cells could not be computed
// (e.g. the row dataset has no gold entities).
struct OverlapMatrix {
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;
  std::vector<std::vector<std::optional<double>>> cells;
};

// True if `id` is usable as an entity identifier in the TSV format.
bool IsValidEntityId(std::string_view id);

// Checks the MentionInstance invariants. Throws InputError on violation.
void ValidateInstance(const MentionInstance &instance);

// Splits on ASCII whitespace, dropping empty tokens.
std::vector<std::string> Tokenize(std::string_view text);

// Reads a dataset in the TSV format. Throws ParseError with the offending
// line number for malformed input and InputError if the file is unreadable.
Dataset ParseDataset(const std::string &path, const std::string &name);
Dataset ParseDatasetText(std::string_view text, const std::string &name,
                         const std::string &source = "<memory>");

// Serializes in canonical form. Throws InputError for instances that cannot
// be represented.
std::string FormatDataset(const Dataset &ds);
void WriteDataset(const Dataset &ds, const std::string &path);

// Fraction of instances whose candidate set contains the gold entity.
double GoldRecall(const Dataset &ds);

// Percentage of the distinct gold entities of `a` that also occur as gold
// entities in `b`.
double EntityOverlap(const Dataset &a, const Dataset &b);

OverlapMatrix ComputeOverlapMatrix(std::span<const Dataset> datasets);

DatasetStats ComputeStats(const Dataset &ds);

// Splits by document. The test half receives the number of documents closest
// to `test_fraction` of the total, clamped so that neither half is empty.
std::pair<Dataset, Dataset> SplitTrainTest(const Dataset &ds,
                                           double test_fraction,
                                           uint64_t seed);

// Canonical textual form of a prior: the shortest representation that
// parses back to the same double.
std::string FormatDouble(double value);

}  // namespace nel

#endif  // NEL_CORPUS_H_
