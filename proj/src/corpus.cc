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

#include "nel/corpus.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "nel/errors.h"

namespace nel {

namespace {

constexpr std::string_view kHeader =
    "# doc_id\tmention\tleft_context\tright_context\tcandidates\tgold\n";

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::vector<std::string_view> SplitOn(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

// TAB and line breaks inside free-text fields become single spaces.
std::string SanitizeField(std::string_view text) {
  std::string out(text);
  for (char &c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::string JoinTokens(const std::vector<std::string> &tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string &token = tokens[i];
    if (token.empty() ||
        std::any_of(token.begin(), token.end(), IsSpace)) {
      throw InputError("context token '" + token +
                       "' is empty or contains whitespace");
    }
    if (i > 0) out += ' ';
    out += token;
  }
  return out;
}

std::optional<double> ParseDouble(std::string_view text) {
  double value = 0.0;
  const char *end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
  return value;
}

std::string Describe(const MentionInstance &instance) {
  return "instance (doc '" + instance.doc_id + "', mention '" +
         instance.mention + "')";
}

std::unordered_set<std::string> GoldEntities(const Dataset &ds) {
  std::unordered_set<std::string> entities;
  for (const MentionInstance &instance : ds.instances) {
    if (instance.gold) entities.insert(*instance.gold);
  }
  return entities;
}

}  // namespace

std::optional<size_t> MentionInstance::GoldIndex() const {
  if (!gold) return std::nullopt;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].entity_id == *gold) return i;
  }
  return std::nullopt;
}

std::vector<std::string> Dataset::DocumentIds() const {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const MentionInstance &instance : instances) {
    if (seen.insert(instance.doc_id).second) ids.push_back(instance.doc_id);
  }
  return ids;
}

bool IsValidEntityId(std::string_view id) {
  if (id.empty() || id == kNoGold) return false;
  for (char c : id) {
    if (c == '\t' || c == ',' || c == '|' || c == '\n' || c == '\r') {
      return false;
    }
  }
  return true;
}

void ValidateInstance(const MentionInstance &instance) {
  if (instance.doc_id.empty() || instance.doc_id.front() == '#') {
    throw InputError("doc_id must be non-empty and not start with '#'");
  }
  if (instance.left_context.size() > kContextWindow ||
      instance.right_context.size() > kContextWindow) {
    throw InputError(Describe(instance) + ": context window exceeds " +
                     std::to_string(kContextWindow) + " tokens");
  }
  if (instance.candidates.empty()) {
    throw InputError(Describe(instance) + ": empty candidate set");
  }
  std::unordered_set<std::string_view> ids;
  for (const Candidate &candidate : instance.candidates) {
    if (!IsValidEntityId(candidate.entity_id)) {
      throw InputError(Describe(instance) + ": invalid entity id '" +
                       candidate.entity_id + "'");
    }
    if (!std::isfinite(candidate.prior) || candidate.prior < 0.0 ||
        candidate.prior > 1.0) {
      throw InputError(Describe(instance) + ": prior of '" +
                       candidate.entity_id + "' outside [0,1]");
    }
    if (!ids.insert(candidate.entity_id).second) {
      throw InputError(Describe(instance) + ": duplicate candidate '" +
                       candidate.entity_id + "'");
    }
  }
  if (instance.gold && !IsValidEntityId(*instance.gold)) {
    throw InputError(Describe(instance) + ": invalid gold entity id '" +
                     *instance.gold + "'");
  }
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    size_t start = i;
    while (i < text.size() && !IsSpace(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string FormatDouble(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

Dataset ParseDatasetText(std::string_view text, const std::string &name,
                         const std::string &source) {
  Dataset ds;
  ds.name = name;
  std::vector<std::string_view> lines = SplitOn(text, '\n');
  // A terminating newline does not start another record.
  if (!lines.empty() && lines.back().empty()) lines.pop_back();

  bool in_header = true;
  for (size_t i = 0; i < lines.size(); ++i) {
    const size_t lineno = i + 1;
    std::string_view line = lines[i];
    if (in_header && !line.empty() && line.front() == '#') continue;
    in_header = false;

    std::vector<std::string_view> fields = SplitOn(line, '\t');
    if (fields.size() != 6) {
      throw ParseError(source, lineno,
                       "expected 6 tab-separated fields, found " +
                           std::to_string(fields.size()));
    }
    MentionInstance instance;
    instance.doc_id = std::string(fields[0]);
    instance.mention = std::string(fields[1]);
    instance.left_context = Tokenize(fields[2]);
    instance.right_context = Tokenize(fields[3]);
    if (fields[4].empty()) {
      throw ParseError(source, lineno, "empty candidate set");
    }
    for (std::string_view entry : SplitOn(fields[4], '|')) {
      size_t comma = entry.rfind(',');
      if (comma == std::string_view::npos) {
        throw ParseError(source, lineno,
                         "candidate '" + std::string(entry) +
                             "' is not of the form entity_id,prior");
      }
      std::optional<double> prior = ParseDouble(entry.substr(comma + 1));
      if (!prior) {
        throw ParseError(source, lineno,
                         "bad prior in candidate '" + std::string(entry) + "'");
      }
      instance.candidates.push_back(
          Candidate{std::string(entry.substr(0, comma)), *prior, std::nullopt});
    }
    if (fields[5] != kNoGold) instance.gold = std::string(fields[5]);
    try {
      ValidateInstance(instance);
    } catch (const InputError &e) {
      throw ParseError(source, lineno, e.what());
    }
    ds.instances.push_back(std::move(instance));
  }
  return ds;
}

Dataset ParseDataset(const std::string &path, const std::string &name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseDatasetText(buffer.str(), name, path);
}

std::string FormatDataset(const Dataset &ds) {
  std::string out(kHeader);
  for (const MentionInstance &original : ds.instances) {
    MentionInstance instance = original;
    instance.doc_id = SanitizeField(instance.doc_id);
    instance.mention = SanitizeField(instance.mention);
    ValidateInstance(instance);

    out += instance.doc_id;
    out += '\t';
    out += instance.mention;
    out += '\t';
    out += JoinTokens(instance.left_context);
    out += '\t';
    out += JoinTokens(instance.right_context);
    out += '\t';
    for (size_t i = 0; i < instance.candidates.size(); ++i) {
      if (i > 0) out += '|';
      out += instance.candidates[i].entity_id;
      out += ',';
      out += FormatDouble(instance.candidates[i].prior);
    }
    out += '\t';
    out += instance.gold ? *instance.gold : std::string(kNoGold);
    out += '\n';
  }
  return out;
}

void WriteDataset(const Dataset &ds, const std::string &path) {
  const std::string text = FormatDataset(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write dataset file " + path);
  out << text;
  if (!out.flush()) throw InputError("failed writing " + path);
}

double GoldRecall(const Dataset &ds) {
  if (ds.instances.empty()) {
    throw InputError("gold recall of empty dataset '" + ds.name + "'");
  }
  size_t hits = 0;
  for (const MentionInstance &instance : ds.instances) {
    if (!instance.gold) {
      throw InputError("dataset '" + ds.name + "': " + Describe(instance) +
                       " has no gold entity");
    }
    if (instance.GoldIndex()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.instances.size());
}

double EntityOverlap(const Dataset &a, const Dataset &b) {
  const std::unordered_set<std::string> row = GoldEntities(a);
  if (row.empty()) {
    throw InputError("dataset '" + a.name + "' has no gold entities");
  }
  const std::unordered_set<std::string> col = GoldEntities(b);
  size_t shared = 0;
  for (const std::string &entity : row) shared += col.count(entity);
  return 100.0 * static_cast<double>(shared) / static_cast<double>(row.size());
}

OverlapMatrix ComputeOverlapMatrix(std::span<const Dataset> datasets) {
  OverlapMatrix matrix;
  for (const Dataset &ds : datasets) {
    matrix.row_names.push_back(ds.name);
    matrix.col_names.push_back(ds.name);
  }
  for (const Dataset &row : datasets) {
    std::vector<std::optional<double>> cells;
    for (const Dataset &col : datasets) {
      try {
        cells.push_back(EntityOverlap(row, col));
      } catch (const InputError &) {
        cells.push_back(std::nullopt);
      }
    }
    matrix.cells.push_back(std::move(cells));
  }
  return matrix;
}

DatasetStats ComputeStats(const Dataset &ds) {
  DatasetStats stats;
  stats.gold_recall = GoldRecall(ds);
  stats.mentions = ds.instances.size();
  stats.documents = ds.NumDocuments();
  return stats;
}

std::pair<Dataset, Dataset> SplitTrainTest(const Dataset &ds,
                                           double test_fraction,
                                           uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InputError("test fraction must lie strictly between 0 and 1");
  }
  std::vector<std::string> docs = ds.DocumentIds();
  if (docs.size() < 2) {
    throw InputError("dataset '" + ds.name +
                     "' needs at least 2 documents to split");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(docs.begin(), docs.end(), rng);

  const auto total = static_cast<long long>(docs.size());
  long long num_test = std::llround(test_fraction * static_cast<double>(total));
  num_test = std::clamp(num_test, 1LL, total - 1);
  std::unordered_set<std::string> test_docs(docs.begin(),
                                            docs.begin() + num_test);

  std::pair<Dataset, Dataset> halves;
  halves.first.name = ds.name + "-train";
  halves.second.name = ds.name + "-test";
  for (const MentionInstance &instance : ds.instances) {
    Dataset &half = test_docs.count(instance.doc_id) ? halves.second
                                                      : halves.first;
    half.instances.push_back(instance);
  }
  return halves;
}

}  // namespace nel
