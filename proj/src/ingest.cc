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

#include "nel/ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "httplib.h"
#include "nel/html_text.h"

namespace nel {

namespace {

struct Token {
  size_t start;
  size_t end;
  std::string text;
};

std::vector<Token> TokenizeWithOffsets(std::string_view text) {
  std::vector<Token> tokens;
  size_t i = 0;
  auto space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && space(text[i])) ++i;
    const size_t start = i;
    while (i < text.size() && !space(text[i])) ++i;
    if (i > start) {
      tokens.push_back({start, i, std::string(text.substr(start, i - start))});
    }
  }
  return tokens;
}

std::vector<std::string_view> Split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  for (size_t pos = text.find(sep); pos != std::string_view::npos;
       pos = text.find(sep, start)) {
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  parts.push_back(text.substr(start));
  return parts;
}

template <typename T>
bool ParseNumber(std::string_view field, T &value) {
  const char *end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  return ec == std::errc() && ptr == end && !field.empty();
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::vector<Annotation> ParseAnnotations(std::string_view lines,
                                         std::string_view text,
                                         const std::string &source) {
  std::vector<Annotation> annotations;
  std::vector<std::string_view> rows = Split(lines, '\n');
  if (!rows.empty() && rows.back().empty()) rows.pop_back();
  for (size_t i = 0; i < rows.size(); ++i) {
    std::string_view row = rows[i];
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.empty() || row.front() == '#') continue;
    std::vector<std::string_view> fields = Split(row, '\t');
    if (fields.size() != 4 && fields.size() != 5) {
      throw ParseError(source, i + 1, "expected 4 or 5 tab-separated fields");
    }
    Annotation a;
    if (!ParseNumber(fields[0], a.char_start) ||
        !ParseNumber(fields[1], a.char_end)) {
      throw ParseError(source, i + 1, "bad character offsets");
    }
    a.entity_id = std::string(fields[2]);
    if (!ParseNumber(fields[3], a.confidence)) {
      throw ParseError(source, i + 1, "bad confidence");
    }
    if (fields.size() == 5 && !fields[4].empty()) {
      for (std::string_view entry : Split(fields[4], '|')) {
        const size_t comma = entry.rfind(',');
        double prior = 0.0;
        if (comma == std::string_view::npos ||
            !ParseNumber(entry.substr(comma + 1), prior)) {
          throw ParseError(source, i + 1,
                           "bad alternative '" + std::string(entry) + "'");
        }
        a.candidates.push_back(
            Candidate{std::string(entry.substr(0, comma)), prior, std::nullopt});
      }
    }
    if (a.char_start < a.char_end && a.char_end <= text.size()) {
      a.mention = std::string(
          text.substr(a.char_start, a.char_end - a.char_start));
    }
    annotations.push_back(std::move(a));
  }
  return annotations;
}

std::vector<Annotation> MockAnnotatorClient::Annotate(const std::string &doc_id,
                                                      const std::string &text) {
  const std::string path =
      (std::filesystem::path(directory_) / (doc_id + ".tsv")).string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AnnotatorError("no recorded response at " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseAnnotations(buffer.str(), text, path);
  } catch (const InputError &e) {
    throw AnnotatorError(e.what());
  }
}

std::vector<Annotation> HttpAnnotatorClient::Annotate(const std::string &doc_id,
                                                      const std::string &text) {
  httplib::Client client(config_.host, config_.port);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers = {{"X-Doc-Id", doc_id}};
  if (!config_.token_env.empty()) {
    const char *token = std::getenv(config_.token_env.c_str());
    if (token == nullptr) {
      throw AnnotatorError("environment variable " + config_.token_env +
                           " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  httplib::Result result =
      client.Post(config_.path, headers, text, "text/plain; charset=utf-8");
  if (!result) {
    throw AnnotatorError("request for '" + doc_id +
                         "' failed: " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw AnnotatorError("annotator answered HTTP " +
                         std::to_string(result->status) + " for '" + doc_id +
                         "'");
  }
  try {
    return ParseAnnotations(result->body, text, "http:" + doc_id);
  } catch (const InputError &e) {
    throw AnnotatorError(e.what());
  }
}

std::string CheckAnnotation(const Annotation &annotation,
                            std::string_view text) {
  if (!(annotation.char_start < annotation.char_end &&
        annotation.char_end <= text.size())) {
    return "offsets [" + std::to_string(annotation.char_start) + ", " +
           std::to_string(annotation.char_end) + ") out of range";
  }
  if (text.substr(annotation.char_start,
                  annotation.char_end - annotation.char_start) !=
      annotation.mention) {
    return "text slice does not match mention '" + annotation.mention + "'";
  }
  if (!IsValidEntityId(annotation.entity_id)) {
    return "invalid entity id '" + annotation.entity_id + "'";
  }
  if (!(annotation.confidence >= 0.0 && annotation.confidence <= 1.0)) {
    return "confidence outside [0,1]";
  }
  std::unordered_set<std::string> seen;
  for (const Candidate &candidate : annotation.candidates) {
    if (!IsValidEntityId(candidate.entity_id) ||
        !(candidate.prior >= 0.0 && candidate.prior <= 1.0) ||
        !seen.insert(candidate.entity_id).second) {
      return "invalid alternative '" + candidate.entity_id + "'";
    }
  }
  return "";
}

BuildReport BuildDataset(const std::vector<RawDocument> &docs,
                         AnnotatorClient &client, const std::string &name) {
  std::unordered_set<std::string> ids;
  for (const RawDocument &doc : docs) {
    if (!ids.insert(doc.doc_id).second) {
      throw InputError("duplicate document id '" + doc.doc_id + "'");
    }
  }

  BuildReport report;
  report.dataset.name = name;
  for (const RawDocument &doc : docs) {
    std::string text;
    std::vector<Annotation> annotations;
    try {
      text = ExtractText(doc.html);
      annotations = client.Annotate(doc.doc_id, text);
    } catch (const Error &e) {
      report.skipped_documents.push_back(doc.doc_id + ": " + e.what());
      continue;
    }

    std::vector<const Annotation *> usable;
    for (const Annotation &annotation : annotations) {
      const std::string problem = CheckAnnotation(annotation, text);
      if (problem.empty()) {
        usable.push_back(&annotation);
      } else {
        report.dropped_annotations.push_back(doc.doc_id + ": " + problem);
      }
    }
    std::stable_sort(usable.begin(), usable.end(),
                     [](const Annotation *a, const Annotation *b) {
                       return a->char_start < b->char_start;
                     });

    const std::vector<Token> tokens = TokenizeWithOffsets(text);
    for (const Annotation *annotation : usable) {
      MentionInstance instance;
      instance.doc_id = doc.doc_id;
      instance.mention = annotation->mention;
      std::vector<std::string> left;
      for (const Token &token : tokens) {
        if (token.end <= annotation->char_start) {
          left.push_back(token.text);
        } else if (token.start >= annotation->char_end &&
                   instance.right_context.size() < kContextWindow) {
          instance.right_context.push_back(token.text);
        }
      }
      const size_t keep = std::min(left.size(), kContextWindow);
      instance.left_context.assign(left.end() - static_cast<long>(keep),
                                   left.end());
      if (annotation->candidates.empty()) {
        instance.candidates.push_back(Candidate{
            annotation->entity_id, annotation->confidence, std::nullopt});
      } else {
        instance.candidates = annotation->candidates;
      }
      instance.gold = annotation->entity_id;
      for (char &c : instance.mention) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
      }
      ValidateInstance(instance);
      report.dataset.instances.push_back(std::move(instance));
    }
  }
  if (2 * report.skipped_documents.size() > docs.size()) {
    throw Error("annotation failed for " +
                std::to_string(report.skipped_documents.size()) + " of " +
                std::to_string(docs.size()) + " documents");
  }
  return report;
}

Dataset SubsetDocuments(const Dataset &ds, size_t doc_limit) {
  if (doc_limit < 1) throw InputError("document limit must be at least 1");
  Dataset subset;
  subset.name = ds.name;
  std::unordered_set<std::string> kept;
  for (const MentionInstance &instance : ds.instances) {
    if (!kept.count(instance.doc_id)) {
      if (kept.size() >= doc_limit) continue;
      kept.insert(instance.doc_id);
    }
    subset.instances.push_back(instance);
  }
  return subset;
}

std::vector<RawDocument> LoadRawDocuments(const std::string &directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) {
    throw InputError("not a directory: " + directory);
  }
  std::vector<fs::path> paths;
  for (const fs::directory_entry &entry : fs::directory_iterator(directory)) {
    const std::string ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".html" || ext == ".htm")) {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RawDocument> docs;
  for (const fs::path &path : paths) {
    docs.push_back({path.stem().string(), ReadFile(path.string())});
  }
  return docs;
}

}  // namespace nel
