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

#ifndef NEL_INGEST_H_
#define NEL_INGEST_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "nel/corpus.h"
#include "nel/errors.h"

namespace nel {

struct RawDocument {
  std::string doc_id;
  std::string html;
};

// One entity annotation over a document's extracted text. Offsets are byte
// offsets into the UTF-8 text; `mention` is the text between them.
struct Annotation {
  std::string mention;
  size_t char_start = 0;
  size_t char_end = 0;
  std::string entity_id;
  // Alternatives returned by the annotator; may be empty.
  std::vector<Candidate> candidates;
  double confidence = 0.0;
};

// Raised by annotator clients when a document cannot be annotated.
class AnnotatorError : public Error {
 public:
  explicit AnnotatorError(const std::string &what) : Error(what) {}
};

class AnnotatorClient {
 public:
  virtual ~AnnotatorClient() = default;

  // Annotates the extracted text of one document. Throws AnnotatorError on
  // failure.
  virtual std::vector<Annotation> Annotate(const std::string &doc_id,
                                           const std::string &text) = 0;
};

// Parses annotation lines of the form
//   char_start TAB char_end TAB entity_id TAB confidence [TAB alt,p|alt,p...]
// Mentions are sliced from `text` when the offsets are in range; range checks
// beyond that are left to BuildDataset.
std::vector<Annotation> ParseAnnotations(std::string_view lines,
                                         std::string_view text,
                                         const std::string &source);

// Serves pre-recorded responses from `<directory>/<doc_id>.tsv`. A missing
// response file is an annotation failure. Reads only; safe to share between
// threads.
class MockAnnotatorClient : public AnnotatorClient {
 public:
  explicit MockAnnotatorClient(std::string directory)
      : directory_(std::move(directory)) {}

  std::vector<Annotation> Annotate(const std::string &doc_id,
                                   const std::string &text) override;

 private:
  std::string directory_;
};

struct HttpAnnotatorConfig {
  std::string host = "localhost";
  int port = 80;
  std::string path = "/annotate";
  // Name of an environment variable holding a bearer token; empty for none.
  std::string token_env;
  int timeout_seconds = 30;
};

// Generic HTTP annotator: POSTs the text (Content-Type text/plain, header
// X-Doc-Id) and expects a body in the ParseAnnotations line format.
class HttpAnnotatorClient : public AnnotatorClient {
 public:
  explicit HttpAnnotatorClient(HttpAnnotatorConfig config)
      : config_(std::move(config)) {}

  std::vector<Annotation> Annotate(const std::string &doc_id,
                                   const std::string &text) override;

 private:
  HttpAnnotatorConfig config_;
};

struct BuildReport {
  Dataset dataset;
  // "doc_id: reason" for every document that produced no instances because
  // of a failure.
  std::vector<std::string> skipped_documents;
  // "doc_id: reason" for annotations that violated the invariants.
  std::vector<std::string> dropped_annotations;
};

// Empty string if the annotation is usable on `text`, else the reason.
std::string CheckAnnotation(const Annotation &annotation,
                            std::string_view text);

// Extracts, annotates and windows every document. Instances are ordered by
// document, then by char_start. Throws Error when more than half of the
// documents had to be skipped, InputError on duplicate doc ids.
BuildReport BuildDataset(const std::vector<RawDocument> &docs,
                         AnnotatorClient &client, const std::string &name);

// Instances of the first `doc_limit` distinct documents, in dataset order.
Dataset SubsetDocuments(const Dataset &ds, size_t doc_limit);

// Reads every *.html / *.htm file of `directory`, sorted by file name; the
// doc id is the file stem.
std::vector<RawDocument> LoadRawDocuments(const std::string &directory);

}  // namespace nel

#endif  // NEL_INGEST_H_
