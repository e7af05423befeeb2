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

#include "aotk/synthetic.h"

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "aotk/random.h"
#include "aotk/status.h"
#include "aotk/text.h"

namespace aotk {
namespace {

constexpr const char* kFiller[] = {"the",   "movie", "film",   "story",
                                   "plot",  "was",   "and",    "really",
                                   "quite", "scene", "acting", "overall"};
constexpr const char* kPositive[] = {"great",   "superb",  "lovely",
                                     "charming", "brilliant", "moving"};
constexpr const char* kNegative[] = {"awful", "dull",    "boring",
                                     "clumsy", "tedious", "bland"};

std::string Letters(size_t n) {
  std::string s = "aa";
  s[1] = static_cast<char>('a' + n % 26);
  s[0] = static_cast<char>('a' + (n / 26) % 26);
  return s;
}

}  // namespace

absl::Status ValidateSyntheticCorpusOptions(const SyntheticCorpusOptions& o) {
  std::vector<std::string> bad;
  if (o.authors < 2 || o.authors > 676) {
    bad.push_back(absl::StrCat("authors must be in [2, 676], got ", o.authors));
  }
  if (o.docs_per_author < 1) bad.push_back("docs_per_author must be >= 1");
  if (o.content_words < 1) bad.push_back("content_words must be >= 1");
  if (!(o.style_strength >= 0.0 && o.style_strength <= 1.0)) {
    bad.push_back(
        absl::StrCat("style_strength must be in [0, 1], got ", o.style_strength));
  }
  if (bad.empty()) return absl::OkStatus();
  return ConfigError(absl::StrJoin(bad, "; "));
}

std::string SyntheticMarker(size_t author) {
  return absl::StrCat("zqmark", Letters(author));
}

std::string SyntheticStyleWord(size_t author) {
  return absl::StrCat("zqstyle", Letters(author));
}

std::string SyntheticAuthorId(size_t author) {
  return absl::StrFormat("author_%03d", author);
}

std::vector<std::string> SyntheticMarkers(size_t authors) {
  std::vector<std::string> m;
  for (size_t a = 0; a < authors; ++a) m.push_back(SyntheticMarker(a));
  return m;
}

absl::StatusOr<Corpus> GenerateSyntheticCorpus(
    const SyntheticCorpusOptions& options) {
  AOTK_RETURN_IF_ERROR(ValidateSyntheticCorpusOptions(options));
  std::vector<Document> docs;
  docs.reserve(options.authors * options.docs_per_author);
  for (size_t a = 0; a < options.authors; ++a) {
    Rng style_rng(DeriveSeed(options.seed, absl::StrCat("synthetic/style/", a)));
    for (size_t i = 0; i < options.docs_per_author; ++i) {
      Rng rng(DeriveSeed(options.seed, absl::StrCat("synthetic/doc/", i)));
      const bool positive = i % 2 == 0;
      std::vector<std::string> words;
      for (size_t k = 0; k < options.filler_words; ++k) {
        words.push_back(kFiller[rng.UniformIndex(std::size(kFiller))]);
      }
      for (size_t k = 0; k < options.content_words; ++k) {
        words.push_back(positive ? kPositive[rng.UniformIndex(std::size(kPositive))]
                                 : kNegative[rng.UniformIndex(std::size(kNegative))]);
      }
      // The marker sits at a document-dependent position, shared by authors.
      const size_t pos = rng.UniformIndex(words.size() + 1);
      words.insert(words.begin() + pos, SyntheticMarker(a));
      if (style_rng.UniformDouble() < options.style_strength) {
        words.push_back(SyntheticStyleWord(a));
      }
      Document d;
      d.author_id = SyntheticAuthorId(a);
      d.id = absl::StrFormat("%s-%04d", d.author_id, i);
      d.text = absl::StrCat(absl::StrJoin(words, " "), ".");
      d.task_label = positive ? "positive" : "negative";
      d.source = "synthetic";
      docs.push_back(std::move(d));
    }
  }
  return Corpus::Create(std::move(docs));
}

TokenDeletingObfuscator::TokenDeletingObfuscator(std::string method_id,
                                                 std::vector<std::string> tokens)
    : method_id_(std::move(method_id)) {
  for (const std::string& t : tokens) tokens_.insert(AsciiLower(t));
}

absl::StatusOr<std::string> TokenDeletingObfuscator::Rewrite(
    const Document& doc, Json& metadata) const {
  std::vector<std::string_view> kept;
  size_t deleted = 0;
  for (std::string_view w : SplitWhitespace(doc.text)) {
    const std::vector<std::string> toks = NormalizedTokens(w);
    if (toks.size() == 1 && tokens_.count(toks[0])) {
      ++deleted;
      // Keep sentence-final punctuation attached to a deleted word.
      if (w.back() == '.' && !kept.empty()) {
        kept.push_back(".");
      }
      continue;
    }
    kept.push_back(w);
  }
  metadata["deleted_tokens"] = deleted;
  std::string out;
  for (std::string_view w : kept) {
    if (w == ".") {
      out += '.';
    } else {
      if (!out.empty()) out += ' ';
      out += w;
    }
  }
  return out;
}

}  // namespace aotk
