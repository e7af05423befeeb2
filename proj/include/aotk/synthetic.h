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

// Generated corpora with known structure: author identity lives in marker
// tokens (plus an optional weaker style signal), the task label in content
// words. Used by tests, the acceptance binary and `aotk synth`.

#ifndef AOTK_SYNTHETIC_H_
#define AOTK_SYNTHETIC_H_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "aotk/corpus.h"
#include "aotk/obfuscate.h"

namespace aotk {

struct SyntheticCorpusOptions {
  size_t authors = 10;
  size_t docs_per_author = 100;
  // Content words per document, drawn from the label's lexicon.
  size_t content_words = 3;
  size_t filler_words = 6;
  // Probability that a document also carries its author's style word.
  double style_strength = 0.0;
  uint64_t seed = 0;
};

absl::Status ValidateSyntheticCorpusOptions(const SyntheticCorpusOptions& o);

// Letter-only tokens, so every tokenizer in the library sees them whole.
std::string SyntheticMarker(size_t author);
std::string SyntheticStyleWord(size_t author);
std::string SyntheticAuthorId(size_t author);
std::vector<std::string> SyntheticMarkers(size_t authors);

// Document i of every author shares the same filler and content draw, so
// authors differ only by marker (and style) tokens. Labels alternate
// positive/negative within each author.
absl::StatusOr<Corpus> GenerateSyntheticCorpus(
    const SyntheticCorpusOptions& options);

// Drops whitespace-separated words whose normalized form is one of `tokens`.
class TokenDeletingObfuscator : public Obfuscator {
 public:
  TokenDeletingObfuscator(std::string method_id, std::vector<std::string> tokens);

  std::string method_id() const override { return method_id_; }

 protected:
  absl::StatusOr<std::string> Rewrite(const Document& doc,
                                      Json& metadata) const override;

 private:
  std::string method_id_;
  std::set<std::string> tokens_;
};

}  // namespace aotk

#endif  // AOTK_SYNTHETIC_H_
