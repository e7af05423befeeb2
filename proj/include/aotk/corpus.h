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

// Authorship corpora: ingestion, author selection, stratified splitting and
// descriptive statistics.

#ifndef AOTK_CORPUS_H_
#define AOTK_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "aotk/io.h"

namespace aotk {

struct Document {
  std::string id;
  std::string author_id;
  std::string text;
  std::optional<std::string> task_label;
  std::string source;

  bool operator==(const Document&) const = default;
};

// Immutable, validated collection of documents. Ids are unique, texts are
// non-blank and every author/label is a member of the corresponding space.
class Corpus {
 public:
  // Spaces are derived from the documents.
  static absl::StatusOr<Corpus> Create(std::vector<Document> documents);
  // Explicit spaces; they may be supersets of what the documents use, which
  // lets splits keep the label space of their parent.
  static absl::StatusOr<Corpus> Create(std::vector<Document> documents,
                                       std::set<std::string> author_space,
                                       std::set<std::string> label_space);

  const std::vector<Document>& documents() const { return documents_; }
  const std::set<std::string>& author_space() const { return author_space_; }
  const std::set<std::string>& label_space() const { return label_space_; }
  size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  // nullptr when absent.
  const Document* Find(std::string_view id) const;

 private:
  Corpus() = default;

  std::vector<Document> documents_;
  std::set<std::string> author_space_;
  std::set<std::string> label_space_;
};

enum class CorpusFormat { kJsonl, kCsv };

// Column names used when reading records. Defaults follow the canonical
// interchange format {id, author_id, text, label}.
struct FieldMapping {
  std::string id = "id";
  std::string author_id = "author_id";
  std::string text = "text";
  std::string label = "label";
  // When set, the label column holds a numeric rating that is mapped to
  // "positive" (rating > 5) or "negative".
  bool rating_to_sentiment = false;
};

struct LoadOptions {
  FieldMapping fields;
  // Recorded in Document::source; defaults to the file stem.
  std::string source;
};

struct LoadedCorpus {
  Corpus corpus;
  size_t dropped_empty = 0;
  size_t dropped_duplicate_ids = 0;
};

absl::StatusOr<CorpusFormat> ParseCorpusFormat(std::string_view name);

absl::StatusOr<LoadedCorpus> LoadCorpus(const std::filesystem::path& path,
                                        CorpusFormat format,
                                        const LoadOptions& options = {});

// Label for a 0-10 review rating: strictly above 5 is positive.
std::string SentimentFromRating(double rating);

Json DocumentToJson(const Document& doc);
absl::Status WriteCorpusJsonl(const std::filesystem::path& path,
                              const Corpus& corpus);

enum class AuthorSelection { kTopByCount, kFirstListed };

absl::StatusOr<AuthorSelection> ParseAuthorSelection(std::string_view name);

// Keeps the documents of `k` authors. kTopByCount ranks by document count with
// ties broken by lexicographic author id; kFirstListed takes authors in order
// of first appearance.
absl::StatusOr<Corpus> SubsetAuthors(const Corpus& corpus, size_t k,
                                     AuthorSelection strategy);

enum class Stratify { kNone, kAuthor, kLabel };

absl::StatusOr<Stratify> ParseStratify(std::string_view name);

struct SplitSpec {
  double train_frac = 0.8;
  double val_frac = 0.1;
  double test_frac = 0.1;
  uint64_t seed = 0;
  Stratify stratify_by = Stratify::kAuthor;
};

absl::Status ValidateSplitSpec(const SplitSpec& spec);

struct CorpusSplit {
  Corpus train;
  Corpus val;
  Corpus test;
};

// Within each stratum of n documents: val = round(n * val_frac),
// test = round(n * test_frac), train gets the rest. Membership is drawn by a
// seeded shuffle; each output keeps corpus order and the parent's spaces.
absl::StatusOr<CorpusSplit> Split(const Corpus& corpus, const SplitSpec& spec);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct CorpusStats {
  size_t n_authors = 0;
  size_t n_texts = 0;
  MeanStd texts_per_author;
  MeanStd words_per_text;
  MeanStd tokens_per_text;
  MeanStd chars_per_text;
};

using TokenCounter = std::function<size_t(std::string_view)>;

// Whitespace units; used when no tokenizer is supplied.
size_t CountWhitespaceWords(std::string_view text);

absl::StatusOr<CorpusStats> ComputeStats(const Corpus& corpus,
                                         const TokenCounter& tokenizer =
                                             CountWhitespaceWords);

struct NamedStats {
  std::string dataset;
  CorpusStats stats;
};

std::string StatsToTsv(const std::vector<NamedStats>& rows);
std::string StatsToMarkdown(const std::vector<NamedStats>& rows);

}  // namespace aotk

#endif  // AOTK_CORPUS_H_
