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

#include "aotk/corpus.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "aotk/random.h"
#include "aotk/status.h"
#include "aotk/text.h"

namespace aotk {
namespace {

namespace fs = std::filesystem;

// Field value as a string; numbers are rendered without a trailing ".0" so
// integer ids survive a JSON round trip unchanged.
std::optional<std::string> FieldAsString(const Json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<int64_t>());
  if (value.is_number_unsigned()) return std::to_string(value.get<uint64_t>());
  if (value.is_number_float()) {
    const double d = value.get<double>();
    if (std::floor(d) == d && std::abs(d) < 1e15) {
      return std::to_string(static_cast<int64_t>(d));
    }
    return absl::StrFormat("%g", d);
  }
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  return std::nullopt;
}

// A raw record keyed by column name, plus where it started in the file.
struct RawRecord {
  size_t line = 0;
  std::map<std::string, std::optional<std::string>> fields;
};

absl::StatusOr<std::vector<std::vector<std::string>>> ParseCsvRows(
    std::string_view data, std::vector<size_t>& row_lines) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  size_t line = 1;
  size_t row_line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && IsBlank(row[0]))) {
      rows.push_back(std::move(row));
      row_lines.push_back(row_line);
    }
    row.clear();
  };
  for (size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          return DataError(
              absl::StrCat("line ", line, ": stray quote inside CSV field"));
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        row_line = line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) {
    return DataError(
        absl::StrCat("line ", row_line, ": unterminated quoted CSV field"));
  }
  if (field_started || !row.empty()) end_row();
  return rows;
}

absl::StatusOr<std::vector<RawRecord>> ReadCsvRecords(const fs::path& path) {
  AOTK_ASSIGN_OR_RETURN(std::string data, ReadFile(path));
  std::vector<size_t> row_lines;
  auto rows_or = ParseCsvRows(data, row_lines);
  if (!rows_or.ok()) return Annotate(rows_or.status(), path.string());
  std::vector<std::vector<std::string>>& rows = *rows_or;
  if (rows.empty()) {
    return DataError(absl::StrCat(path.string(), ": missing CSV header row"));
  }
  const std::vector<std::string>& header = rows[0];
  std::vector<RawRecord> records;
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      return DataError(absl::StrCat(path.string(), ":", row_lines[r],
                                    ": expected ", header.size(),
                                    " CSV fields, found ", rows[r].size()));
    }
    RawRecord rec;
    rec.line = row_lines[r];
    for (size_t c = 0; c < header.size(); ++c) {
      rec.fields[std::string(Trim(header[c]))] = rows[r][c];
    }
    records.push_back(std::move(rec));
  }
  return records;
}

absl::StatusOr<std::vector<RawRecord>> ReadJsonlRecords(const fs::path& path) {
  std::vector<RawRecord> records;
  AOTK_RETURN_IF_ERROR(
      ForEachJsonLine(path, [&](size_t line, const Json& json) {
        if (!json.is_object()) {
          return DataError(absl::StrCat(path.string(), ":", line,
                                        ": record is not a JSON object"));
        }
        RawRecord rec;
        rec.line = line;
        for (const auto& [key, value] : json.items()) {
          rec.fields[key] = FieldAsString(value);
        }
        records.push_back(std::move(rec));
        return absl::OkStatus();
      }));
  return records;
}

absl::StatusOr<std::string> RequiredField(const RawRecord& rec,
                                          const std::string& name,
                                          const fs::path& path) {
  auto it = rec.fields.find(name);
  if (it == rec.fields.end() || !it->second.has_value()) {
    return DataError(absl::StrCat(path.string(), ":", rec.line,
                                  ": missing field '", name, "'"));
  }
  return *it->second;
}

MeanStd ComputeMeanStd(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

std::string FormatMeanStd(const MeanStd& m, int decimals) {
  return absl::StrFormat("%.*f (±%.*f)", decimals, m.mean, decimals, m.std);
}

}  // namespace

absl::StatusOr<Corpus> Corpus::Create(std::vector<Document> documents) {
  std::set<std::string> authors;
  std::set<std::string> labels;
  for (const Document& d : documents) {
    authors.insert(d.author_id);
    if (d.task_label) labels.insert(*d.task_label);
  }
  return Create(std::move(documents), std::move(authors), std::move(labels));
}

absl::StatusOr<Corpus> Corpus::Create(std::vector<Document> documents,
                                      std::set<std::string> author_space,
                                      std::set<std::string> label_space) {
  std::unordered_set<std::string> ids;
  for (const Document& d : documents) {
    if (d.id.empty()) return DataError("document with empty id");
    if (!ids.insert(d.id).second) {
      return DataError(absl::StrCat("duplicate document id '", d.id, "'"));
    }
    if (d.author_id.empty()) {
      return DataError(absl::StrCat("document '", d.id, "' has no author_id"));
    }
    if (IsBlank(d.text)) {
      return DataError(absl::StrCat("document '", d.id, "' has empty text"));
    }
    if (!author_space.count(d.author_id)) {
      return DataError(absl::StrCat("document '", d.id, "': author '",
                                    d.author_id, "' not in author space"));
    }
    if (d.task_label && !label_space.count(*d.task_label)) {
      return DataError(absl::StrCat("document '", d.id, "': label '",
                                    *d.task_label, "' not in label space"));
    }
  }
  Corpus corpus;
  corpus.documents_ = std::move(documents);
  corpus.author_space_ = std::move(author_space);
  corpus.label_space_ = std::move(label_space);
  return corpus;
}

const Document* Corpus::Find(std::string_view id) const {
  for (const Document& d : documents_) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

absl::StatusOr<CorpusFormat> ParseCorpusFormat(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::kJsonl;
  if (name == "csv") return CorpusFormat::kCsv;
  return ArgumentError(absl::StrCat("unknown corpus format '",
                                    std::string(name), "' (jsonl|csv)"));
}

std::string SentimentFromRating(double rating) {
  return rating > 5.0 ? "positive" : "negative";
}

absl::StatusOr<LoadedCorpus> LoadCorpus(const fs::path& path,
                                        CorpusFormat format,
                                        const LoadOptions& options) {
  std::vector<RawRecord> raw;
  if (format == CorpusFormat::kJsonl) {
    AOTK_ASSIGN_OR_RETURN(raw, ReadJsonlRecords(path));
  } else {
    AOTK_ASSIGN_OR_RETURN(raw, ReadCsvRecords(path));
  }
  const FieldMapping& f = options.fields;
  const std::string source =
      options.source.empty() ? path.stem().string() : options.source;

  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  size_t dropped_empty = 0;
  size_t dropped_duplicate = 0;
  for (const RawRecord& rec : raw) {
    Document d;
    AOTK_ASSIGN_OR_RETURN(d.id, RequiredField(rec, f.id, path));
    AOTK_ASSIGN_OR_RETURN(d.author_id, RequiredField(rec, f.author_id, path));
    AOTK_ASSIGN_OR_RETURN(d.text, RequiredField(rec, f.text, path));
    if (d.id.empty() || d.author_id.empty()) {
      return DataError(absl::StrCat(path.string(), ":", rec.line,
                                    ": id and author_id must be non-empty"));
    }
    auto label_it = rec.fields.find(f.label);
    if (label_it != rec.fields.end() && label_it->second &&
        !label_it->second->empty()) {
      if (f.rating_to_sentiment) {
        double rating = 0.0;
        if (!absl::SimpleAtod(*label_it->second, &rating)) {
          return DataError(absl::StrCat(path.string(), ":", rec.line,
                                        ": rating '", *label_it->second,
                                        "' is not numeric"));
        }
        d.task_label = SentimentFromRating(rating);
      } else {
        d.task_label = *label_it->second;
      }
    }
    d.source = source;
    if (IsBlank(d.text)) {
      ++dropped_empty;
      continue;
    }
    if (!seen.insert(d.id).second) {
      ++dropped_duplicate;
      continue;
    }
    docs.push_back(std::move(d));
  }
  if (docs.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat(path.string(), ": corpus has no valid documents"));
  }
  AOTK_ASSIGN_OR_RETURN(Corpus corpus, Corpus::Create(std::move(docs)));
  return LoadedCorpus{std::move(corpus), dropped_empty, dropped_duplicate};
}

Json DocumentToJson(const Document& doc) {
  Json j = {{"id", doc.id}, {"author_id", doc.author_id}, {"text", doc.text}};
  j["label"] = doc.task_label ? Json(*doc.task_label) : Json(nullptr);
  j["source"] = doc.source;
  return j;
}

absl::Status WriteCorpusJsonl(const fs::path& path, const Corpus& corpus) {
  std::vector<Json> records;
  records.reserve(corpus.size());
  for (const Document& d : corpus.documents()) {
    records.push_back(DocumentToJson(d));
  }
  return WriteJsonLines(path, records);
}

absl::StatusOr<AuthorSelection> ParseAuthorSelection(std::string_view name) {
  if (name == "top_by_count") return AuthorSelection::kTopByCount;
  if (name == "first_listed") return AuthorSelection::kFirstListed;
  return ArgumentError(absl::StrCat("unknown author selection '",
                                    std::string(name), "'"));
}

absl::StatusOr<Corpus> SubsetAuthors(const Corpus& corpus, size_t k,
                                     AuthorSelection strategy) {
  // Authors in order of first appearance, with their counts.
  std::vector<std::string> order;
  std::unordered_map<std::string, size_t> counts;
  for (const Document& d : corpus.documents()) {
    if (counts[d.author_id]++ == 0) order.push_back(d.author_id);
  }
  if (k > corpus.author_space().size() || k > order.size()) {
    return ArgumentError(absl::StrCat("cannot select ", k, " authors from ",
                                      order.size()));
  }
  if (strategy == AuthorSelection::kTopByCount) {
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) {
                       if (counts[a] != counts[b]) return counts[a] > counts[b];
                       return a < b;
                     });
  }
  std::set<std::string> selected(order.begin(),
                                 order.begin() + static_cast<ptrdiff_t>(k));
  std::vector<Document> docs;
  for (const Document& d : corpus.documents()) {
    if (selected.count(d.author_id)) docs.push_back(d);
  }
  return Corpus::Create(std::move(docs));
}

absl::StatusOr<Stratify> ParseStratify(std::string_view name) {
  if (name == "none") return Stratify::kNone;
  if (name == "author") return Stratify::kAuthor;
  if (name == "label") return Stratify::kLabel;
  return ArgumentError(
      absl::StrCat("unknown stratification '", std::string(name), "'"));
}

absl::Status ValidateSplitSpec(const SplitSpec& spec) {
  for (double f : {spec.train_frac, spec.val_frac, spec.test_frac}) {
    if (!(f > 0.0 && f < 1.0)) {
      return ArgumentError(
          absl::StrFormat("split fraction %g outside (0, 1)", f));
    }
  }
  const double sum = spec.train_frac + spec.val_frac + spec.test_frac;
  if (std::abs(sum - 1.0) > 1e-9) {
    return ArgumentError(
        absl::StrFormat("split fractions sum to %.12g, expected 1", sum));
  }
  return absl::OkStatus();
}

absl::StatusOr<CorpusSplit> Split(const Corpus& corpus, const SplitSpec& spec) {
  AOTK_RETURN_IF_ERROR(ValidateSplitSpec(spec));
  // Strata keyed in sorted order so the shuffle streams do not depend on
  // document order beyond membership.
  std::map<std::string, std::vector<size_t>> strata;
  const auto& docs = corpus.documents();
  for (size_t i = 0; i < docs.size(); ++i) {
    switch (spec.stratify_by) {
      case Stratify::kNone:
        strata[""].push_back(i);
        break;
      case Stratify::kAuthor:
        strata[docs[i].author_id].push_back(i);
        break;
      case Stratify::kLabel:
        if (!docs[i].task_label) {
          return DataError(absl::StrCat("split: document '", docs[i].id,
                                        "' has no label to stratify by"));
        }
        strata[*docs[i].task_label].push_back(i);
        break;
    }
  }
  enum Part : uint8_t { kTrain, kVal, kTest };
  std::vector<Part> assignment(docs.size(), kTrain);
  for (auto& [key, members] : strata) {
    const size_t n = members.size();
    if (spec.stratify_by != Stratify::kNone && n < 3) {
      return DataError(absl::StrCat("split: stratum '", key, "' has ", n,
                                    " documents, need at least 3"));
    }
    const auto n_val = static_cast<size_t>(
        std::llround(static_cast<double>(n) * spec.val_frac));
    const auto n_test = static_cast<size_t>(
        std::llround(static_cast<double>(n) * spec.test_frac));
    if (n_val + n_test > n) {
      return DataError(absl::StrCat("split: stratum '", key,
                                    "' too small for the requested fractions"));
    }
    Rng rng(DeriveSeed(spec.seed, "split/" + key));
    rng.Shuffle(members);
    for (size_t j = 0; j < n; ++j) {
      assignment[members[j]] = j < n_val ? kVal : (j < n_val + n_test ? kTest
                                                                      : kTrain);
    }
  }
  std::vector<Document> parts[3];
  for (size_t i = 0; i < docs.size(); ++i) {
    parts[assignment[i]].push_back(docs[i]);
  }
  AOTK_ASSIGN_OR_RETURN(Corpus train,
                        Corpus::Create(std::move(parts[kTrain]),
                                       corpus.author_space(),
                                       corpus.label_space()));
  AOTK_ASSIGN_OR_RETURN(Corpus val,
                        Corpus::Create(std::move(parts[kVal]),
                                       corpus.author_space(),
                                       corpus.label_space()));
  AOTK_ASSIGN_OR_RETURN(Corpus test,
                        Corpus::Create(std::move(parts[kTest]),
                                       corpus.author_space(),
                                       corpus.label_space()));
  return CorpusSplit{std::move(train), std::move(val), std::move(test)};
}

size_t CountWhitespaceWords(std::string_view text) {
  return SplitWhitespace(text).size();
}

absl::StatusOr<CorpusStats> ComputeStats(const Corpus& corpus,
                                         const TokenCounter& tokenizer) {
  if (corpus.empty()) {
    return absl::FailedPreconditionError("stats: corpus is empty");
  }
  std::map<std::string, size_t> per_author;
  std::vector<double> words, tokens, chars;
  for (const Document& d : corpus.documents()) {
    ++per_author[d.author_id];
    words.push_back(static_cast<double>(CountWhitespaceWords(d.text)));
    tokens.push_back(static_cast<double>(tokenizer(d.text)));
    chars.push_back(static_cast<double>(CountCodePoints(d.text)));
  }
  std::vector<double> texts_per_author;
  for (const auto& [author, n] : per_author) {
    texts_per_author.push_back(static_cast<double>(n));
  }
  CorpusStats stats;
  stats.n_authors = per_author.size();
  stats.n_texts = corpus.size();
  stats.texts_per_author = ComputeMeanStd(texts_per_author);
  stats.words_per_text = ComputeMeanStd(words);
  stats.tokens_per_text = ComputeMeanStd(tokens);
  stats.chars_per_text = ComputeMeanStd(chars);
  return stats;
}

std::string StatsToTsv(const std::vector<NamedStats>& rows) {
  std::string out =
      "Dataset\tAuthors\tTexts\tAvg. Texts / Author (std)\t"
      "Avg. Words / Text (std)\tAvg. Tokens / Text (std)\t"
      "Avg. Chars / Text (std)\n";
  for (const NamedStats& r : rows) {
    const CorpusStats& s = r.stats;
    absl::StrAppend(&out, r.dataset, "\t", s.n_authors, "\t", s.n_texts, "\t",
                    FormatMeanStd(s.texts_per_author, 2), "\t",
                    FormatMeanStd(s.words_per_text, 2), "\t",
                    FormatMeanStd(s.tokens_per_text, 2), "\t",
                    FormatMeanStd(s.chars_per_text, 2), "\n");
  }
  return out;
}

std::string StatsToMarkdown(const std::vector<NamedStats>& rows) {
  std::string out =
      "| Dataset | Authors | Texts | Avg. Texts / Author (std) | "
      "Avg. Words / Text (std) | Avg. Tokens / Text (std) | "
      "Avg. Chars / Text (std) |\n"
      "|---|---:|---:|---:|---:|---:|---:|\n";
  for (const NamedStats& r : rows) {
    const CorpusStats& s = r.stats;
    absl::StrAppend(&out, "| ", r.dataset, " | ", s.n_authors, " | ",
                    s.n_texts, " | ", FormatMeanStd(s.texts_per_author, 0),
                    " | ", FormatMeanStd(s.words_per_text, 0), " | ",
                    FormatMeanStd(s.tokens_per_text, 0), " | ",
                    FormatMeanStd(s.chars_per_text, 0), " |\n");
  }
  return out;
}

}  // namespace aotk
