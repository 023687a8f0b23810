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

// Option overlay for the command-line tool: values given on the command line
// win over a key=value config file, which wins over the NEL_SEED environment
// variable, which wins over built-in defaults.

#ifndef NEL_TOOLS_CLI_CONFIG_H_
#define NEL_TOOLS_CLI_CONFIG_H_

#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

namespace nel::cli {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// Reads `key = value` lines. Blank lines and lines starting with '#' are
// ignored; keys are long option names without the leading dashes. Repeated
// keys are kept in order (for repeatable options such as `data`).
ConfigEntries ReadConfigFile(const std::string &path);

// Fills every option of `command` that was not given on the command line
// from `entries`, then `seed` from NEL_SEED. Keys that name no option of any
// command in `root` are an InputError; keys of other commands are ignored.
void ApplyConfig(CLI::App &root, CLI::App &command, const ConfigEntries &entries);

}  // namespace nel::cli

#endif  // NEL_TOOLS_CLI_CONFIG_H_
