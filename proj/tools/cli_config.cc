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

#include "cli_config.h"

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include "nel/errors.h"

namespace nel::cli {
namespace {

std::string Trim(const std::string &s) {
  const size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

void Assign(CLI::Option *option, const std::vector<std::string> &values,
            const std::string &origin) {
  try {
    for (const std::string &v : values) option->add_result(v);
    option->run_callback();
  } catch (const CLI::Error &e) {
    throw InputError(origin + ": bad value for " + option->get_name() + ": " +
                     e.what());
  }
}

}  // namespace

ConfigEntries ReadConfigFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  ConfigEntries entries;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path, number, "expected key=value");
    }
    std::string key = Trim(trimmed.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty()) throw ParseError(path, number, "empty key");
    entries.emplace_back(key, Trim(trimmed.substr(eq + 1)));
  }
  return entries;
}

void ApplyConfig(CLI::App &root, CLI::App &command, const ConfigEntries &entries) {
  std::set<std::string> known;
  for (const CLI::App *sub : root.get_subcommands({})) {
    for (const CLI::Option *option : sub->get_options()) {
      for (const std::string &name : option->get_lnames()) known.insert(name);
    }
  }
  std::map<std::string, std::vector<std::string>> grouped;
  std::vector<std::string> order;
  for (const auto &[key, value] : entries) {
    if (!known.count(key) || key == "config") {
      throw InputError("unknown config key '" + key + "'");
    }
    if (!grouped.count(key)) order.push_back(key);
    grouped[key].push_back(value);
  }
  for (const std::string &key : order) {
    CLI::Option *option = command.get_option_no_throw("--" + key);
    if (option == nullptr || option->count() > 0) continue;
    if (grouped[key].size() > 1 && option->get_expected_max() <= 1) {
      throw InputError("config key '" + key + "' given more than once");
    }
    Assign(option, grouped[key], "config");
  }
  CLI::Option *seed = command.get_option_no_throw("--seed");
  const char *env = std::getenv("NEL_SEED");
  if (seed != nullptr && seed->count() == 0 && env != nullptr && *env) {
    Assign(seed, {env}, "NEL_SEED");
  }
}

}  // namespace nel::cli
