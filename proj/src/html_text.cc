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

#include "nel/html_text.h"

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>

#include "nel/errors.h"

namespace nel {

namespace {

// Tags that do not break the flow of text.
const std::unordered_set<std::string> &InlineTags() {
  static const auto *tags = new std::unordered_set<std::string>{
      "a",   "abbr", "acronym", "b",    "bdi",  "bdo",  "big",   "cite",
      "code", "data", "dfn",    "em",   "font", "i",    "kbd",   "mark",
      "q",   "s",    "samp",    "small", "span", "strike", "strong", "sub",
      "sup", "time", "tt",      "u",    "var",  "wbr"};
  return *tags;
}

const std::unordered_map<std::string, std::string> &NamedEntities() {
  static const auto *entities = new std::unordered_map<std::string, std::string>{
      {"amp", "&"},        {"lt", "<"},          {"gt", ">"},
      {"quot", "\""},      {"apos", "'"},        {"nbsp", " "},
      {"shy", ""},         {"copy", "©"},   {"reg", "®"},
      {"trade", "™"}, {"ndash", "–"},  {"mdash", "—"},
      {"lsquo", "‘"}, {"rsquo", "’"},  {"ldquo", "“"},
      {"rdquo", "”"}, {"hellip", "…"}, {"laquo", "«"},
      {"raquo", "»"}, {"euro", "€"},   {"sect", "§"},
      {"para", "¶"},  {"deg", "°"},    {"middot", "·"},
      {"bull", "•"},  {"times", "×"}};
  return *entities;
}

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsAlpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool IsAlnum(char c) { return IsAlpha(c) || (c >= '0' && c <= '9'); }

char Lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

void AppendUtf8(std::string &out, uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Decodes the reference starting at html[pos] == '&'. On success appends the
// text and returns the position after the ';'.
size_t DecodeReference(std::string_view html, size_t pos, std::string &out) {
  const size_t semi = html.find(';', pos + 1);
  if (semi == std::string_view::npos || semi - pos > 12) {
    out += '&';
    return pos + 1;
  }
  std::string_view body = html.substr(pos + 1, semi - pos - 1);
  if (!body.empty() && body[0] == '#') {
    const bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
    std::string_view digits = body.substr(hex ? 2 : 1);
    uint32_t cp = 0;
    bool ok = !digits.empty();
    for (char c : digits) {
      uint32_t v;
      if (c >= '0' && c <= '9') {
        v = c - '0';
      } else if (hex && Lower(c) >= 'a' && Lower(c) <= 'f') {
        v = Lower(c) - 'a' + 10;
      } else {
        ok = false;
        break;
      }
      cp = cp * (hex ? 16 : 10) + v;
      if (cp > 0x10FFFF) cp = 0x110000;
    }
    if (ok) {
      // Same as &nbsp;: tokens on either side stay separate.
      if (cp == 0xA0) cp = ' ';
      AppendUtf8(out, cp);
      return semi + 1;
    }
  } else {
    auto it = NamedEntities().find(std::string(body));
    if (it != NamedEntities().end()) {
      out += it->second;
      return semi + 1;
    }
  }
  out += '&';
  return pos + 1;
}

// Position just past the '>' closing the tag opened at `pos`, honoring quoted
// attribute values. Returns html.size() for an unterminated tag.
size_t SkipTag(std::string_view html, size_t pos) {
  char quote = 0;
  for (size_t i = pos + 1; i < html.size(); ++i) {
    const char c = html[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      return i + 1;
    }
  }
  return html.size();
}

// Finds "</name" case-insensitively at or after `pos`.
size_t FindClosingTag(std::string_view html, size_t pos,
                      const std::string &name) {
  for (size_t i = html.find("</", pos); i != std::string_view::npos;
       i = html.find("</", i + 1)) {
    if (i + 2 + name.size() > html.size()) break;
    bool match = true;
    for (size_t k = 0; k < name.size(); ++k) {
      if (Lower(html[i + 2 + k]) != name[k]) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

}  // namespace

bool IsValidUtf8(std::string_view text) {
  size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    size_t len;
    uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > text.size()) return false;
    for (size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Reject overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

std::string ExtractText(std::string_view html) {
  if (!IsValidUtf8(html)) throw InputError("input is not valid UTF-8");

  std::string raw;
  raw.reserve(html.size());
  size_t i = 0;
  while (i < html.size()) {
    const char c = html[i];
    if (c == '&') {
      i = DecodeReference(html, i, raw);
      continue;
    }
    if (c != '<') {
      raw += c;
      ++i;
      continue;
    }
    if (html.substr(i, 4) == "<!--") {
      const size_t end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
      i = SkipTag(html, i);
      raw += ' ';
      continue;
    }
    const bool closing = i + 1 < html.size() && html[i + 1] == '/';
    size_t name_start = i + (closing ? 2 : 1);
    size_t name_end = name_start;
    while (name_end < html.size() && IsAlnum(html[name_end])) ++name_end;
    if (name_end == name_start || !IsAlpha(html[name_start])) {
      // Not a tag, e.g. "a < b".
      raw += c;
      ++i;
      continue;
    }
    std::string name;
    for (size_t k = name_start; k < name_end; ++k) name += Lower(html[k]);
    const size_t after = SkipTag(html, i);
    const bool self_closing = after >= 2 && html[after - 2] == '/';
    if (!closing && !self_closing && (name == "script" || name == "style")) {
      const size_t end = FindClosingTag(html, after, name);
      i = end == std::string_view::npos ? html.size() : SkipTag(html, end);
      raw += ' ';
      continue;
    }
    if (!InlineTags().count(name)) raw += ' ';
    i = after;
  }

  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char ch : raw) {
    if (IsAsciiSpace(ch)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += ch;
  }
  return out;
}

}  // namespace nel
