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

// nel: command-line front end for dataset statistics, training, transfer,
// evaluation and corpus ingestion.
//
// Exit status: 0 on success, 1 on runtime failure, 2 on usage or input
// errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_config.h"
#include "nel/checkpoint.h"
#include "nel/corpus.h"
#include "nel/embeddings.h"
#include "nel/errors.h"
#include "nel/global_model.h"
#include "nel/ingest.h"
#include "nel/local_model.h"
#include "nel/synthetic.h"
#include "nel/trainer.h"
#include "nel/transfer.h"

namespace nel {
namespace {

struct Flags {
  std::vector<std::string> data;
  std::string train, valid, test, embeddings, checkpoint, out, out_dir;
  std::string mode = "full";
  std::string single, transfer;
  std::string html_dir, annotations, name;
  std::string annotator = "mock";
  std::string http_host = "localhost", http_path = "/annotate", http_token_env;
  int http_port = 80;
  int http_timeout = 30;
  std::string report;
  std::string config;
  int epochs = 30;
  double lr = 1e-2;
  double margin = kDefaultMargin;
  int patience = 5;
  uint64_t seed = 0;
  int hidden = kDefaultHidden;
  int top_r = kDefaultTopR;
  int batch_size = 1;
  bool decay = false;
  bool global = false;
  bool csv = false;
  bool per_doc = false;
  std::optional<double> pairwise_weight, damping;
  std::optional<int> lbp_iterations;
  size_t doc_limit = 0;
  double test_fraction = 0.5;
  int entities = 40;
  int dim = 16;
  size_t train_size = 500, valid_size = 100, test_size = 100;
};

std::string Fixed(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

std::string Stem(const std::string &path) {
  return std::filesystem::path(path).stem().string();
}

void Require(const CLI::App &command, std::initializer_list<const char *> names) {
  for (const char *name : names) {
    if (command.get_option(name)->count() == 0) {
      throw InputError(std::string(name) + " is required");
    }
  }
}

Dataset LoadDataset(const std::string &path) {
  return ParseDataset(path, Stem(path));
}

void PrintEpochs(const TrainHistory &history) {
  for (size_t i = 0; i < history.epochs.size(); ++i) {
    const EpochRecord &e = history.epochs[i];
    std::cerr << "epoch " << i + 1 << " loss " << Fixed(e.train_loss)
              << " valid_f1 " << Fixed(e.validation_f1) << " lr "
              << Fixed(e.learning_rate) << "\n";
  }
}

void PrintHistory(const TrainHistory &history) {
  const double best =
      history.best_epoch > 0
          ? history.epochs[history.best_epoch - 1].validation_f1
          : 0.0;
  std::cout << "epochs_run " << history.epochs.size() << "\n"
            << "best_epoch " << history.best_epoch << "\n"
            << "validation_f1 " << Fixed(best) << "\n";
}

TrainConfig MakeTrainConfig(const Flags &f) {
  TrainConfig config;
  config.learning_rate = f.lr;
  config.epochs_max = f.epochs;
  config.margin = f.margin;
  config.patience = f.patience;
  config.seed = f.seed;
  config.batch_size = f.batch_size;
  config.decay_on_plateau = f.decay;
  return config;
}

int CmdStats(const Flags &f) {
  if (f.data.empty()) throw InputError("--data is required");
  std::vector<std::vector<std::string>> rows = {
      {"Dataset", "Mentions", "Documents", "Gold Recall"}};
  for (const std::string &path : f.data) {
    const Dataset ds = LoadDataset(path);
    const DatasetStats stats = ComputeStats(ds);
    rows.push_back({ds.name, std::to_string(stats.mentions),
                    std::to_string(stats.documents), Fixed(stats.gold_recall)});
  }
  std::vector<size_t> width(4, 0);
  for (const auto &row : rows) {
    for (size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto &row : rows) {
    std::string line;
    for (size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      line += c == 0 ? row[c] + pad : "  " + pad + row[c];
    }
    std::cout << line << "\n";
  }
  return 0;
}

int CmdOverlap(const Flags &f) {
  if (f.data.empty()) throw InputError("--data is required");
  std::vector<Dataset> datasets;
  for (const std::string &path : f.data) datasets.push_back(LoadDataset(path));
  const OverlapMatrix m = ComputeOverlapMatrix(datasets);
  size_t width = 8;
  for (const std::string &n : m.row_names) width = std::max(width, n.size());
  auto cell = [width](const std::string &s) {
    return std::string(width > s.size() ? width - s.size() : 0, ' ') + s;
  };
  std::string header(width, ' ');
  for (const std::string &n : m.col_names) header += "  " + cell(n);
  std::cout << header << "\n";
  for (size_t r = 0; r < m.row_names.size(); ++r) {
    std::string line = m.row_names[r] + std::string(width - m.row_names[r].size(), ' ');
    for (const auto &value : m.cells[r]) {
      line += "  " + cell(value ? Fixed(*value) : "n/a");
    }
    std::cout << line << "\n";
  }
  return 0;
}

int CmdTrain(const Flags &f) {
  EmbeddingSpace space = LoadWordVectors(f.embeddings);
  const Dataset train = LoadDataset(f.train);
  const Dataset valid = LoadDataset(f.valid);
  for (const Dataset *ds : {&train, &valid}) {
    for (const std::string &id : space.ExtendForDataset(*ds).skipped) {
      std::cerr << "warning: no embedding evidence for entity " << id << "\n";
    }
  }
  const LocalModelParams init =
      LocalModelParams::Initialize(space.dim(), f.seed, f.hidden, f.top_r);
  const TrainResult result = Train(init, train, valid, space, MakeTrainConfig(f));
  PrintEpochs(result.history);
  Checkpoint checkpoint;
  checkpoint.local = result.params;
  if (f.global) checkpoint.global = GlobalModelParams::Identity(space.dim());
  checkpoint.space_ref = f.embeddings;
  checkpoint.provenance = "train";
  SaveCheckpoint(checkpoint, f.out);
  PrintHistory(result.history);
  return 0;
}

int CmdFinetune(const Flags &f) {
  const std::optional<TransferMode> mode = ParseTransferMode(f.mode);
  if (!mode) throw InputError("--mode must be 'full' or 'output-layer'");
  EmbeddingSpace space = LoadWordVectors(f.embeddings);
  const Checkpoint input = LoadCheckpoint(f.checkpoint, &space);
  const Dataset train = LoadDataset(f.train);
  const Dataset valid = LoadDataset(f.valid);
  for (const Dataset *ds : {&train, &valid}) {
    for (const std::string &id : PrepareTarget(space, *ds).skipped) {
      std::cerr << "warning: no embedding evidence for entity " << id << "\n";
    }
  }
  const TrainResult result =
      FineTune(input.local, train, valid, space, *mode, MakeTrainConfig(f));
  PrintEpochs(result.history);
  Checkpoint output = input;
  // A run without epochs leaves the checkpoint as it was.
  if (!result.history.epochs.empty()) {
    output.local = result.params;
    output.frozen = FreezeMaskFor(*mode);
    output.provenance = "finetune:" + std::string(TransferModeName(*mode));
  }
  SaveCheckpoint(output, f.out);
  PrintHistory(result.history);
  return 0;
}

int CmdEval(const Flags &f) {
  EmbeddingSpace space = LoadWordVectors(f.embeddings);
  const Checkpoint checkpoint = LoadCheckpoint(f.checkpoint, &space);
  const Dataset test = LoadDataset(f.test);
  for (const std::string &id : space.ExtendForDataset(test).skipped) {
    std::cerr << "warning: no embedding evidence for entity " << id << "\n";
  }
  std::optional<GlobalModelParams> global;
  if (f.global) {
    global = checkpoint.global ? *checkpoint.global
                               : GlobalModelParams::Identity(space.dim());
    if (f.pairwise_weight) global->pairwise_weight = *f.pairwise_weight;
    if (f.damping) global->damping = *f.damping;
    if (f.lbp_iterations) global->lbp_iterations = *f.lbp_iterations;
    global->Validate();
  }
  const EvalReport report =
      Evaluate(checkpoint.local, global ? &*global : nullptr, test, space);
  const std::string name = f.name.empty() ? test.name : f.name;
  std::cout << "dataset " << name << "\n"
            << "precision " << Fixed(report.precision) << "\n"
            << "recall " << Fixed(report.recall) << "\n"
            << "f1 " << Fixed(report.f1) << "\n"
            << "accuracy " << Fixed(report.accuracy) << "\n"
            << "correct " << report.correct << "\n"
            << "total " << report.total << "\n";
  if (f.per_doc) {
    for (const auto &[doc, score] : report.per_document) {
      std::cout << "doc " << doc << " " << score.correct << "/" << score.total
                << "\n";
    }
  }
  if (!f.report.empty()) {
    std::ofstream out(f.report, std::ios::app);
    out << name << "\t" << FormatDouble(report.f1) << "\n";
    if (!out.flush()) throw InputError("cannot write report " + f.report);
  }
  return 0;
}

int CmdIngest(const Flags &f) {
  std::unique_ptr<AnnotatorClient> client;
  if (f.annotator == "mock") {
    if (f.annotations.empty()) throw InputError("--annotations is required");
    client = std::make_unique<MockAnnotatorClient>(f.annotations);
  } else if (f.annotator == "http") {
    HttpAnnotatorConfig config;
    config.host = f.http_host;
    config.port = f.http_port;
    config.path = f.http_path;
    config.token_env = f.http_token_env;
    config.timeout_seconds = f.http_timeout;
    client = std::make_unique<HttpAnnotatorClient>(config);
  } else {
    throw InputError("--annotator must be 'mock' or 'http'");
  }
  const std::vector<RawDocument> docs = LoadRawDocuments(f.html_dir);
  const std::string name = f.name.empty() ? Stem(f.out) : f.name;
  BuildReport report = BuildDataset(docs, *client, name);
  for (const std::string &s : report.skipped_documents) {
    std::cerr << "skipped document " << s << "\n";
  }
  for (const std::string &s : report.dropped_annotations) {
    std::cerr << "dropped annotation " << s << "\n";
  }
  Dataset ds = f.doc_limit > 0 ? SubsetDocuments(report.dataset, f.doc_limit)
                               : std::move(report.dataset);
  WriteDataset(ds, f.out);
  std::cout << "mentions " << ds.instances.size() << "\n"
            << "documents " << ds.NumDocuments() << "\n"
            << "skipped_documents " << report.skipped_documents.size() << "\n"
            << "dropped_annotations " << report.dropped_annotations.size()
            << "\n";
  return 0;
}

// Lines of `dataset <whitespace> f1`; '#' starts a comment line.
std::map<std::string, double> ReadReport(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open report " + path);
  std::map<std::string, double> values;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    std::istringstream fields(line);
    std::string name, value, extra;
    if (!(fields >> name) || name[0] == '#') continue;
    if (!(fields >> value) || (fields >> extra)) {
      throw ParseError(path, number, "expected 'dataset f1'");
    }
    size_t used = 0;
    double f1;
    try {
      f1 = std::stod(value, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != value.size()) throw ParseError(path, number, "bad F1 value");
    if (!values.emplace(name, f1).second) {
      throw ParseError(path, number, "duplicate dataset " + name);
    }
  }
  return values;
}

int CmdCompare(const Flags &f) {
  const auto rows = CompareTransfer(ReadReport(f.single), ReadReport(f.transfer));
  std::cout << (f.csv ? FormatComparisonCsv(rows) : FormatComparisonText(rows));
  return 0;
}

int CmdSplit(const Flags &f) {
  if (f.data.size() != 1) throw InputError("split takes exactly one --data");
  const Dataset ds = LoadDataset(f.data[0]);
  const auto [train, test] = SplitTrainTest(ds, f.test_fraction, f.seed);
  std::filesystem::create_directories(f.out_dir);
  for (const Dataset *half : {&train, &test}) {
    const std::string path = (std::filesystem::path(f.out_dir) / (half->name + ".tsv")).string();
    WriteDataset(*half, path);
    std::cout << path << " " << half->instances.size() << " mentions "
              << half->NumDocuments() << " documents\n";
  }
  return 0;
}

int CmdSynth(const Flags &f) {
  SyntheticConfig config;
  config.num_entities = f.entities;
  config.dim = f.dim;
  config.seed = f.seed;
  const SyntheticWorld world = MakeSyntheticWorld(config);
  const std::vector<size_t> all = EntityRange(0, world.entity_ids.size());
  const std::filesystem::path dir(f.out_dir);
  std::filesystem::create_directories(dir);
  world.space.Save((dir / "embeddings.vec").string());
  const std::pair<const char *, size_t> splits[] = {
      {"train", f.train_size}, {"valid", f.valid_size}, {"test", f.test_size}};
  uint64_t offset = 1;
  for (const auto &[name, size] : splits) {
    const Dataset ds =
        SampleSyntheticDataset(world, all, size, name, f.seed + offset++);
    WriteDataset(ds, (dir / (std::string(name) + ".tsv")).string());
  }
  std::cout << "wrote embeddings.vec, train.tsv, valid.tsv, test.tsv to "
            << dir.string() << "\n";
  return 0;
}

int CmdDump(const Flags &f) {
  std::cout << ExportCheckpointJson(LoadCheckpoint(f.checkpoint)) << "\n";
  return 0;
}

int Run(int argc, char **argv) {
  Flags f;
  CLI::App app{"Entity linking with transfer learning"};
  app.name("nel");
  app.require_subcommand(1);

  auto add_config = [&f](CLI::App *c) {
    c->add_option("--config", f.config, "key=value file supplying defaults");
  };
  auto add_training = [&f](CLI::App *c) {
    c->add_option("--train", f.train, "training dataset (TSV)");
    c->add_option("--valid", f.valid, "validation dataset (TSV)");
    c->add_option("--embeddings", f.embeddings, "word vectors file");
    c->add_option("--out", f.out, "output checkpoint");
    c->add_option("--epochs", f.epochs, "maximum epochs")->check(CLI::NonNegativeNumber);
    c->add_option("--lr", f.lr, "learning rate");
    c->add_option("--margin", f.margin, "ranking margin");
    c->add_option("--patience", f.patience, "early-stopping patience");
    c->add_option("--seed", f.seed, "random seed (default: NEL_SEED or 0)");
    c->add_option("--batch-size", f.batch_size, "mentions per SGD step");
    c->add_flag("--decay", f.decay, "halve the rate after two stalled epochs");
  };

  CLI::App *stats = app.add_subcommand("stats", "mentions, documents and gold recall");
  stats->add_option("--data", f.data, "dataset (repeatable)");
  add_config(stats);

  CLI::App *overlap = app.add_subcommand("overlap", "pairwise entity overlap matrix");
  overlap->add_option("--data", f.data, "dataset (repeatable)");
  add_config(overlap);

  CLI::App *train = app.add_subcommand("train", "train a local model");
  add_training(train);
  train->add_option("--hidden", f.hidden, "hidden units");
  train->add_option("--top-r", f.top_r, "context words kept by attention");
  train->add_flag("--global", f.global, "store CRF parameters for collective decoding");
  add_config(train);

  CLI::App *finetune = app.add_subcommand("finetune", "continue training on a target dataset");
  add_training(finetune);
  finetune->add_option("--checkpoint", f.checkpoint, "pretrained checkpoint");
  finetune->add_option("--mode", f.mode, "full | output-layer");
  add_config(finetune);

  CLI::App *eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", f.checkpoint, "checkpoint");
  eval->add_option("--test", f.test, "test dataset (TSV)");
  eval->add_option("--embeddings", f.embeddings, "word vectors file");
  eval->add_flag("--global", f.global, "decode documents collectively");
  eval->add_option("--pairwise-weight", f.pairwise_weight, "CRF pairwise weight");
  eval->add_option("--damping", f.damping, "LBP message damping");
  eval->add_option("--lbp-iterations", f.lbp_iterations, "LBP sweeps");
  eval->add_flag("--per-doc", f.per_doc, "print per-document counts");
  eval->add_option("--name", f.name, "dataset name in the output");
  eval->add_option("--report", f.report, "append 'dataset f1' to this file");
  add_config(eval);

  CLI::App *ingest = app.add_subcommand("ingest", "build a dataset from HTML documents");
  ingest->add_option("--html-dir", f.html_dir, "directory of .html files");
  ingest->add_option("--annotator", f.annotator, "mock | http");
  ingest->add_option("--annotations", f.annotations, "recorded responses (mock)");
  ingest->add_option("--http-host", f.http_host, "annotator host");
  ingest->add_option("--http-port", f.http_port, "annotator port");
  ingest->add_option("--http-path", f.http_path, "annotator path");
  ingest->add_option("--http-token-env", f.http_token_env,
                     "environment variable holding a bearer token");
  ingest->add_option("--http-timeout", f.http_timeout, "seconds");
  ingest->add_option("--out", f.out, "output dataset (TSV)");
  ingest->add_option("--name", f.name, "dataset name");
  ingest->add_option("--doc-limit", f.doc_limit, "keep only the first N documents")
      ->check(CLI::PositiveNumber);
  add_config(ingest);

  CLI::App *compare = app.add_subcommand("compare", "single vs transfer F1 table");
  compare->add_option("--single", f.single, "report of single training");
  compare->add_option("--transfer", f.transfer, "report of transfer learning");
  compare->add_flag("--csv", f.csv, "CSV output");
  add_config(compare);

  CLI::App *split = app.add_subcommand("split", "split a dataset by document");
  split->add_option("--data", f.data, "dataset");
  split->add_option("--test-fraction", f.test_fraction, "share of documents for test");
  split->add_option("--seed", f.seed, "random seed");
  split->add_option("--out-dir", f.out_dir, "output directory");
  add_config(split);

  CLI::App *synth = app.add_subcommand("synth", "generate a synthetic separable corpus");
  synth->add_option("--out-dir", f.out_dir, "output directory");
  synth->add_option("--seed", f.seed, "random seed");
  synth->add_option("--entities", f.entities, "number of entities");
  synth->add_option("--dim", f.dim, "embedding dimension");
  synth->add_option("--train-size", f.train_size, "training mentions");
  synth->add_option("--valid-size", f.valid_size, "validation mentions");
  synth->add_option("--test-size", f.test_size, "test mentions");
  add_config(synth);

  CLI::App *dump = app.add_subcommand("dump", "print a checkpoint as JSON");
  dump->add_option("--checkpoint", f.checkpoint, "checkpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e, std::cerr, std::cerr);
    std::cerr << app.help();
    return 2;
  }

  CLI::App *command = app.get_subcommands().front();
  if (!f.config.empty()) {
    cli::ApplyConfig(app, *command, cli::ReadConfigFile(f.config));
  } else {
    cli::ApplyConfig(app, *command, {});
  }

  if (command == stats) return CmdStats(f);
  if (command == overlap) return CmdOverlap(f);
  if (command == train) {
    Require(*train, {"--train", "--valid", "--embeddings", "--out"});
    return CmdTrain(f);
  }
  if (command == finetune) {
    Require(*finetune, {"--checkpoint", "--train", "--valid", "--embeddings", "--out"});
    return CmdFinetune(f);
  }
  if (command == eval) {
    Require(*eval, {"--checkpoint", "--test", "--embeddings"});
    return CmdEval(f);
  }
  if (command == ingest) {
    Require(*ingest, {"--html-dir", "--out"});
    return CmdIngest(f);
  }
  if (command == compare) {
    Require(*compare, {"--single", "--transfer"});
    return CmdCompare(f);
  }
  if (command == split) {
    Require(*split, {"--out-dir"});
    return CmdSplit(f);
  }
  if (command == synth) {
    Require(*synth, {"--out-dir"});
    return CmdSynth(f);
  }
  Require(*dump, {"--checkpoint"});
  return CmdDump(f);
}

}  // namespace
}  // namespace nel

int main(int argc, char **argv) {
  try {
    return nel::Run(argc, argv);
  } catch (const nel::InputError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
