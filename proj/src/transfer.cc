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

#include "nel/transfer.h"

#include <algorithm>
#include <cstdio>

#include "nel/errors.h"

namespace nel {

namespace {

std::string Fixed4(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

std::string_view WinnerName(Winner winner) {
  switch (winner) {
    case Winner::kSingle: return "single";
    case Winner::kTransfer: return "transfer";
    case Winner::kBoth: return "both";
  }
  return "?";
}

}  // namespace

std::string_view TransferModeName(TransferMode mode) {
  return mode == TransferMode::kFullFineTune ? "full" : "output-layer";
}

std::optional<TransferMode> ParseTransferMode(std::string_view name) {
  if (name == "full") return TransferMode::kFullFineTune;
  if (name == "output-layer") return TransferMode::kOutputLayerOnly;
  return std::nullopt;
}

std::set<ParamGroup> FreezeMaskFor(TransferMode mode) {
  if (mode == TransferMode::kFullFineTune) return {};
  return {ParamGroup::kAttention, ParamGroup::kCombination,
          ParamGroup::kHiddenWeights, ParamGroup::kHiddenBias};
}

ExtensionReport PrepareTarget(EmbeddingSpace &space, const Dataset &target,
                              const EvidenceSource &evidence) {
  return space.ExtendForDataset(target, evidence);
}

TrainResult FineTune(const LocalModelParams &pretrained,
                     const Dataset &target_train, const Dataset &target_valid,
                     const EmbeddingSpace &space, TransferMode mode,
                     TrainConfig config) {
  config.freeze_mask = FreezeMaskFor(mode);
  return Train(pretrained, target_train, target_valid, space, config);
}

std::vector<ComparisonRow> CompareTransfer(
    const std::map<std::string, double> &single,
    const std::map<std::string, double> &transfer) {
  std::vector<std::string> missing;
  for (const auto &[name, f1] : single) {
    if (!transfer.count(name)) missing.push_back(name + " (no transfer result)");
  }
  for (const auto &[name, f1] : transfer) {
    if (!single.count(name)) missing.push_back(name + " (no single result)");
  }
  if (!missing.empty()) {
    std::string message = "mismatched comparison datasets:";
    for (const std::string &m : missing) message += " " + m;
    throw InputError(message);
  }
  std::vector<ComparisonRow> rows;
  for (const auto &[name, single_f1] : single) {
    ComparisonRow row{name, single_f1, transfer.at(name), Winner::kBoth};
    if (row.single_f1 > row.transfer_f1) row.winner = Winner::kSingle;
    if (row.transfer_f1 > row.single_f1) row.winner = Winner::kTransfer;
    rows.push_back(row);
  }
  return rows;
}

std::string FormatComparisonText(const std::vector<ComparisonRow> &rows) {
  const std::string kDataset = "Dataset";
  const std::string kSingle = "Single Training";
  const std::string kTransfer = "Transfer Learning";
  size_t name_width = kDataset.size();
  for (const ComparisonRow &row : rows) {
    name_width = std::max(name_width, row.dataset.size());
  }
  auto pad = [](std::string text, size_t width, bool right) {
    if (text.size() >= width) return text;
    const std::string fill(width - text.size(), ' ');
    return right ? fill + text : text + fill;
  };
  auto cell = [](double value, bool flagged) {
    return Fixed4(value) + (flagged ? "*" : " ");
  };
  std::string out = pad(kDataset, name_width, false) + "  " +
                    pad(kSingle, kSingle.size(), true) + "  " +
                    pad(kTransfer, kTransfer.size(), true) + "\n";
  for (const ComparisonRow &row : rows) {
    const bool single = row.winner != Winner::kTransfer;
    const bool transfer = row.winner != Winner::kSingle;
    out += pad(row.dataset, name_width, false) + "  " +
           pad(cell(row.single_f1, single), kSingle.size(), true) + "  " +
           pad(cell(row.transfer_f1, transfer), kTransfer.size(), true) + "\n";
  }
  return out;
}

std::string FormatComparisonCsv(const std::vector<ComparisonRow> &rows) {
  std::string out = "dataset,single_f1,transfer_f1,winner\n";
  for (const ComparisonRow &row : rows) {
    out += row.dataset + "," + Fixed4(row.single_f1) + "," +
           Fixed4(row.transfer_f1) + "," + std::string(WinnerName(row.winner)) +
           "\n";
  }
  return out;
}

}  // namespace nel
