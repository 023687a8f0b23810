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

#ifndef NEL_ERRORS_H_
#define NEL_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nel {

// Base class for all toolkit failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

// Bad or unreadable input: missing files, malformed records, wrong formats.
// The command-line front end maps these to exit code 2.
class InputError : public Error {
 public:
  explicit InputError(const std::string &what) : Error(what) {}
};

// Malformed line in a line-oriented file. Line numbers are 1-based.
class ParseError : public InputError {
 public:
  ParseError(const std::string &source, size_t line, const std::string &what)
      : InputError(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  size_t line() const { return line_; }

 private:
  size_t line_;
};

}  // namespace nel

#endif  // NEL_ERRORS_H_
