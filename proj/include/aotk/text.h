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

// Byte-level text helpers. Input is assumed to be UTF-8; only ASCII is case
// folded or classified as whitespace/punctuation, all other code points are
// treated as word characters.

#ifndef AOTK_TEXT_H_
#define AOTK_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace aotk {

std::string_view Trim(std::string_view text);
inline bool IsBlank(std::string_view text) { return Trim(text).empty(); }

// Whitespace-separated units.
std::vector<std::string_view> SplitWhitespace(std::string_view text);

// Unicode code points in well-formed UTF-8.
size_t CountCodePoints(std::string_view text);

std::string AsciiLower(std::string_view text);

// Lowercased maximal runs of word characters (ASCII alphanumerics, '_' and
// any non-ASCII byte). Punctuation and whitespace separate tokens.
std::vector<std::string> NormalizedTokens(std::string_view text);

// Sentences end at '.', '!' or '?' (plus trailing quotes/brackets) followed by
// whitespace, or at a blank line. Returned sentences are trimmed and non-empty.
std::vector<std::string> SplitSentences(std::string_view text);

// Greedily packs whole sentences into chunks of at most `max_code_points`.
// A sentence that alone exceeds the limit is broken at whitespace, and a single
// overlong word at code point boundaries. Concatenating the chunks with single
// spaces preserves sentence order.
std::vector<std::string> ChunkBySentences(std::string_view text,
                                          size_t max_code_points);

// Byte span of one word inside a text, for in-place rewriting.
struct WordSpan {
  size_t begin = 0;
  size_t length = 0;
};

// Spans of alphabetic words (letters, with internal apostrophes or hyphens).
std::vector<WordSpan> FindWords(std::string_view text);

}  // namespace aotk

#endif  // AOTK_TEXT_H_
