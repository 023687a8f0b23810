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

#ifndef NEL_HTML_TEXT_H_
#define NEL_HTML_TEXT_H_

#include <string>
#include <string_view>

namespace nel {

// Tolerant HTML to plain text conversion. Tags are stripped, script and style
// contents dropped, block-level tag boundaries become spaces, character
// references are decoded, whitespace runs collapse to a single space and the
// result is trimmed. Throws InputError if `html` is not valid UTF-8.
std::string ExtractText(std::string_view html);

bool IsValidUtf8(std::string_view text);

}  // namespace nel

#endif  // NEL_HTML_TEXT_H_
