// Copyright 2026 The AOTK Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aotk/text.h"

namespace aotk {
namespace {

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

bool IsWordByte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

bool IsLetterByte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool IsContinuationByte(unsigned char c) { return (c & 0xC0) == 0x80; }

bool IsTerminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool IsCloser(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}';
}

void AppendTrimmed(std::string_view piece, std::vector<std::string>& out) {
  std::string_view t = Trim(piece);
  if (!t.empty()) out.emplace_back(t);
}

// Splits `text` into pieces of at most `max_cp` code points, never inside a
// multi-byte sequence.
void HardSplit(std::string_view text, size_t max_cp,
               std::vector<std::string>& out) {
  size_t start = 0;
  size_t count = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    if (IsContinuationByte(static_cast<unsigned char>(text[i]))) continue;
    if (count == max_cp) {
      out.emplace_back(text.substr(start, i - start));
      start = i;
      count = 0;
    }
    ++count;
  }
  if (start < text.size()) out.emplace_back(text.substr(start));
}

// Greedy packing of pieces joined by single spaces.
void Pack(const std::vector<std::string>& pieces, size_t max_cp,
          std::vector<std::string>& out) {
  std::string current;
  size_t current_cp = 0;
  for (const std::string& piece : pieces) {
    const size_t cp = CountCodePoints(piece);
    if (current.empty()) {
      current = piece;
      current_cp = cp;
    } else if (current_cp + 1 + cp <= max_cp) {
      current += ' ';
      current += piece;
      current_cp += 1 + cp;
    } else {
      out.push_back(std::move(current));
      current = piece;
      current_cp = cp;
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
}

}  // namespace

std::string_view Trim(std::string_view text) {
  size_t b = 0;
  size_t e = text.size();
  while (b < e && IsSpace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && IsSpace(static_cast<unsigned char>(text[e - 1]))) --e;
  return text.substr(b, e - b);
}

std::vector<std::string_view> SplitWhitespace(std::string_view text) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    size_t start = i;
    while (i < text.size() && !IsSpace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

size_t CountCodePoints(std::string_view text) {
  size_t n = 0;
  for (char c : text) {
    if (!IsContinuationByte(static_cast<unsigned char>(c))) ++n;
  }
  return n;
}

std::string AsciiLower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> NormalizedTokens(std::string_view text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !IsWordByte(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    size_t start = i;
    while (i < text.size() && IsWordByte(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    if (i > start) out.push_back(AsciiLower(text.substr(start, i - start)));
  }
  return out;
}

std::vector<std::string> SplitSentences(std::string_view text) {
  std::vector<std::string> out;
  size_t start = 0;
  size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (IsTerminal(c)) {
      size_t j = i + 1;
      while (j < text.size() && (IsTerminal(text[j]) || IsCloser(text[j]))) {
        ++j;
      }
      if (j == text.size() || IsSpace(static_cast<unsigned char>(text[j]))) {
        AppendTrimmed(text.substr(start, j - start), out);
        start = j;
      }
      i = j;
      continue;
    }
    if (c == '\n') {
      // A blank line closes the current sentence.
      size_t j = i + 1;
      while (j < text.size() && text[j] != '\n' &&
             IsSpace(static_cast<unsigned char>(text[j]))) {
        ++j;
      }
      if (j < text.size() && text[j] == '\n') {
        AppendTrimmed(text.substr(start, i - start), out);
        start = j + 1;
        i = j + 1;
        continue;
      }
    }
    ++i;
  }
  if (start < text.size()) AppendTrimmed(text.substr(start), out);
  return out;
}

std::vector<std::string> ChunkBySentences(std::string_view text,
                                          size_t max_code_points) {
  std::vector<std::string> pieces;
  for (const std::string& sentence : SplitSentences(text)) {
    if (CountCodePoints(sentence) <= max_code_points) {
      pieces.push_back(sentence);
      continue;
    }
    std::vector<std::string> words;
    for (std::string_view word : SplitWhitespace(sentence)) {
      if (CountCodePoints(word) <= max_code_points) {
        words.emplace_back(word);
      } else {
        HardSplit(word, max_code_points, words);
      }
    }
    Pack(words, max_code_points, pieces);
  }
  std::vector<std::string> chunks;
  Pack(pieces, max_code_points, chunks);
  return chunks;
}

std::vector<WordSpan> FindWords(std::string_view text) {
  std::vector<WordSpan> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           !IsLetterByte(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    size_t start = i;
    while (i < text.size()) {
      const auto c = static_cast<unsigned char>(text[i]);
      if (IsLetterByte(c)) {
        ++i;
      } else if ((c == '\'' || c == '-') && i + 1 < text.size() &&
                 IsLetterByte(static_cast<unsigned char>(text[i + 1]))) {
        i += 2;
      } else {
        break;
      }
    }
    if (i > start) out.push_back({start, i - start});
  }
  return out;
}

}  // namespace aotk
