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

#include "aotk/obfuscate.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <unordered_map>

#include "absl/strings/str_cat.h"
#include "aotk/parallel.h"
#include "aotk/random.h"
#include "aotk/status.h"
#include "aotk/text.h"

namespace aotk {
namespace {

bool IsSingleWord(std::string_view s) {
  return !s.empty() && SplitWhitespace(s).size() == 1 && Trim(s) == s;
}

// Gives `replacement` the case pattern of `source`.
std::string MatchCase(std::string_view source, std::string replacement) {
  bool has_alpha = false;
  bool all_upper = true;
  for (unsigned char c : source) {
    if (std::isalpha(c)) {
      has_alpha = true;
      if (!std::isupper(c)) all_upper = false;
    }
  }
  if (has_alpha && all_upper && source.size() > 1) {
    for (char& c : replacement) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  } else if (!source.empty() &&
             std::isupper(static_cast<unsigned char>(source[0])) &&
             !replacement.empty()) {
    replacement[0] = static_cast<char>(
        std::toupper(static_cast<unsigned char>(replacement[0])));
  }
  return replacement;
}

absl::StatusOr<std::string> StringField(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    return DataError(
        absl::StrCat("obfuscation record lacks string '", key, "'"));
  }
  return it->get<std::string>();
}

}  // namespace

Json ObfuscationResultToJson(const ObfuscationResult& r) {
  return Json{{"document_id", r.document_id},
              {"author_id", r.author_id},
              {"method_id", r.method_id},
              {"original_text", r.original_text},
              {"obfuscated_text", r.obfuscated_text},
              {"metadata", r.metadata}};
}

absl::StatusOr<ObfuscationResult> ObfuscationResultFromJson(const Json& j) {
  if (!j.is_object()) return DataError("obfuscation record is not an object");
  ObfuscationResult r;
  AOTK_ASSIGN_OR_RETURN(r.document_id, StringField(j, "document_id"));
  AOTK_ASSIGN_OR_RETURN(r.author_id, StringField(j, "author_id"));
  AOTK_ASSIGN_OR_RETURN(r.method_id, StringField(j, "method_id"));
  AOTK_ASSIGN_OR_RETURN(r.original_text, StringField(j, "original_text"));
  AOTK_ASSIGN_OR_RETURN(r.obfuscated_text, StringField(j, "obfuscated_text"));
  if (IsBlank(r.obfuscated_text)) {
    return DataError(absl::StrCat("document ", r.document_id,
                                  ": empty obfuscated text"));
  }
  r.metadata = j.value("metadata", Json::object());
  return r;
}

absl::StatusOr<std::vector<ObfuscationResult>> ReadObfuscations(
    const std::filesystem::path& path) {
  std::vector<ObfuscationResult> out;
  AOTK_RETURN_IF_ERROR(
      ForEachJsonLine(path, [&](size_t line, const Json& j) -> absl::Status {
        auto r = ObfuscationResultFromJson(j);
        if (!r.ok()) {
          return Annotate(r.status(), absl::StrCat(path.string(), ":", line));
        }
        out.push_back(*std::move(r));
        return absl::OkStatus();
      }));
  return out;
}

absl::StatusOr<ObfuscationResult> Obfuscator::Obfuscate(
    const Document& doc) const {
  if (IsBlank(doc.text)) {
    return ArgumentError(absl::StrCat("document ", doc.id, " has empty text"));
  }
  Json metadata = Json::object();
  auto text = Rewrite(doc, metadata);
  if (!text.ok()) {
    return Annotate(text.status(), absl::StrCat("document ", doc.id));
  }
  if (IsBlank(*text)) {
    return BackendError(absl::StrCat("document ", doc.id, ": method ",
                                     method_id(), " produced empty text"));
  }
  return ObfuscationResult{doc.id,        doc.author_id, doc.text,
                           *std::move(text), method_id(), std::move(metadata)};
}

absl::StatusOr<std::string> IdentityObfuscator::Rewrite(const Document& doc,
                                                        Json&) const {
  return doc.text;
}

// --- synonyms ---

LexiconTagger::LexiconTagger(std::set<std::string> adjectives) {
  for (const std::string& a : adjectives) adjectives_.insert(AsciiLower(a));
}

std::vector<bool> LexiconTagger::AdjectiveMask(
    const std::vector<std::string>& words) const {
  std::vector<bool> mask(words.size());
  for (size_t i = 0; i < words.size(); ++i) {
    mask[i] = adjectives_.count(AsciiLower(words[i])) > 0;
  }
  return mask;
}

absl::Status ValidateSynonymConfig(const SynonymConfig& cfg) {
  std::vector<std::string> bad;
  if (!(cfg.word_fraction >= 0.0 && cfg.word_fraction <= 1.0)) {
    bad.push_back(
        absl::StrCat("word_fraction must be in [0, 1], got ", cfg.word_fraction));
  }
  if (!(cfg.adjective_fraction >= 0.0 && cfg.adjective_fraction <= 1.0)) {
    bad.push_back(absl::StrCat("adjective_fraction must be in [0, 1], got ",
                               cfg.adjective_fraction));
  }
  if (bad.empty()) return absl::OkStatus();
  std::string msg = bad[0];
  for (size_t i = 1; i < bad.size(); ++i) absl::StrAppend(&msg, "; ", bad[i]);
  return ConfigError(msg);
}

absl::StatusOr<std::map<std::string, std::vector<std::string>>>
LoadSynonymDictionary(const std::filesystem::path& path) {
  AOTK_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  const Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (!j.is_object()) {
    return DataError(absl::StrCat(path.string(),
                                  ": synonym dictionary must be a JSON object"));
  }
  std::map<std::string, std::vector<std::string>> dict;
  for (const auto& [word, syns] : j.items()) {
    if (!syns.is_array()) {
      return DataError(absl::StrCat(path.string(), ": entry '", word,
                                    "' is not a list"));
    }
    std::vector<std::string>& out = dict[AsciiLower(word)];
    for (const Json& s : syns) {
      if (!s.is_string()) {
        return DataError(absl::StrCat(path.string(), ": entry '", word,
                                      "' has a non-string synonym"));
      }
      out.push_back(s.get<std::string>());
    }
  }
  return dict;
}

SynonymObfuscator::SynonymObfuscator(SynonymConfig cfg,
                                     std::shared_ptr<const PosTagger> tagger)
    : cfg_(std::move(cfg)), tagger_(std::move(tagger)) {}

absl::StatusOr<std::unique_ptr<SynonymObfuscator>> SynonymObfuscator::Create(
    SynonymConfig cfg, std::shared_ptr<const PosTagger> tagger) {
  AOTK_RETURN_IF_ERROR(ValidateSynonymConfig(cfg));
  // Normalize keys and keep usable one-word synonyms only.
  std::map<std::string, std::vector<std::string>> dict;
  for (auto& [word, syns] : cfg.dictionary) {
    const std::string key = AsciiLower(word);
    for (std::string& s : syns) {
      if (IsSingleWord(s) && AsciiLower(s) != key) dict[key].push_back(s);
    }
  }
  cfg.dictionary = std::move(dict);
  return std::unique_ptr<SynonymObfuscator>(
      new SynonymObfuscator(std::move(cfg), std::move(tagger)));
}

absl::StatusOr<std::string> SynonymObfuscator::Rewrite(const Document& doc,
                                                       Json& metadata) const {
  const std::string& text = doc.text;
  const std::vector<WordSpan> spans = FindWords(text);
  std::vector<std::string> words;
  words.reserve(spans.size());
  for (const WordSpan& s : spans) words.push_back(text.substr(s.begin, s.length));

  std::vector<size_t> eligible;
  for (size_t i = 0; i < words.size(); ++i) {
    if (cfg_.dictionary.count(AsciiLower(words[i]))) eligible.push_back(i);
  }
  std::vector<bool> adjective(words.size(), false);
  if (tagger_ != nullptr) adjective = tagger_->AdjectiveMask(words);
  size_t eligible_adjectives = 0;
  for (size_t i : eligible) eligible_adjectives += adjective[i] ? 1 : 0;

  const auto budget = static_cast<size_t>(
      std::floor(cfg_.word_fraction * static_cast<double>(eligible.size()) +
                 1e-9));
  const auto adjective_budget =
      tagger_ == nullptr
          ? eligible_adjectives
          : static_cast<size_t>(std::floor(
                cfg_.adjective_fraction *
                    static_cast<double>(eligible_adjectives) +
                1e-9));

  Rng rng(DeriveSeed(cfg_.seed, "synonyms/" + doc.id));
  std::vector<size_t> order = eligible;
  rng.Shuffle(order);
  std::unordered_map<size_t, std::string> replacement;
  size_t adjectives_used = 0;
  for (size_t i : order) {
    if (replacement.size() == budget) break;
    if (adjective[i]) {
      if (adjectives_used == adjective_budget) continue;
      ++adjectives_used;
    }
    const std::vector<std::string>& syns =
        cfg_.dictionary.at(AsciiLower(words[i]));
    replacement[i] = MatchCase(words[i], syns[rng.UniformIndex(syns.size())]);
  }

  std::string out;
  size_t pos = 0;
  for (size_t i = 0; i < spans.size(); ++i) {
    auto it = replacement.find(i);
    if (it == replacement.end()) continue;
    out.append(text, pos, spans[i].begin - pos);
    out += it->second;
    pos = spans[i].begin + spans[i].length;
  }
  out.append(text, pos, std::string::npos);

  metadata["replacement_count"] = replacement.size();
  metadata["eligible_count"] = eligible.size();
  metadata["adjective_replacements"] = adjectives_used;
  metadata["seed"] = cfg_.seed;
  return out;
}

// --- chat ---

absl::StatusOr<std::unique_ptr<HttpChatClient>> HttpChatClient::Create(
    Options opts) {
  if (opts.endpoint.empty()) return ConfigError("chat endpoint is not set");
  if (opts.model.empty()) return ConfigError("chat model is not set");
  return std::unique_ptr<HttpChatClient>(new HttpChatClient(std::move(opts)));
}

absl::StatusOr<std::unique_ptr<HttpChatClient>> HttpChatClient::FromEnvironment(
    Options defaults) {
  const char* endpoint = std::getenv("AOTK_CHAT_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0') {
    return ConfigError("AOTK_CHAT_ENDPOINT is not set");
  }
  defaults.endpoint = endpoint;
  if (const char* key = std::getenv("AOTK_CHAT_API_KEY"); key != nullptr) {
    defaults.api_key = key;
  }
  return Create(std::move(defaults));
}

absl::StatusOr<std::string> HttpChatClient::Complete(
    const std::vector<ChatMessage>& messages) const {
  Json msgs = Json::array();
  for (const ChatMessage& m : messages) {
    msgs.push_back({{"role", m.role}, {"content", m.content}});
  }
  const Json body = {{"model", opts_.model}, {"messages", msgs}};
  std::vector<std::pair<std::string, std::string>> headers;
  if (!opts_.api_key.empty()) {
    headers.emplace_back("Authorization", "Bearer " + opts_.api_key);
  }
  AOTK_ASSIGN_OR_RETURN(
      Json reply, WithRetries<Json>(opts_.retry, [&]() {
        return PostJson(opts_.endpoint, "/v1/chat/completions", body, headers,
                        opts_.timeout);
      }));
  const Json* content = nullptr;
  if (reply.contains("choices") && reply["choices"].is_array() &&
      !reply["choices"].empty()) {
    const Json& choice = reply["choices"][0];
    if (choice.contains("message") && choice["message"].is_object() &&
        choice["message"].contains("content")) {
      content = &choice["message"]["content"];
    }
  }
  if (content == nullptr || !content->is_string()) {
    return RemoteError("chat reply has no choices[0].message.content");
  }
  std::string text = content->get<std::string>();
  if (IsBlank(text)) return RemoteError("chat reply is empty");
  return text;
}

std::string LlmPromptObfuscator::UserMessage(std::string_view text) {
  return absl::StrCat(kObfuscationPrompt, "\n\n", std::string(text));
}

absl::StatusOr<std::string> LlmPromptObfuscator::Rewrite(const Document& doc,
                                                         Json& metadata) const {
  AOTK_ASSIGN_OR_RETURN(std::string out,
                        client_->Complete({{"user", UserMessage(doc.text)}}));
  metadata["model"] = client_->model();
  return std::string(Trim(out));
}

// --- policy ---

absl::StatusOr<std::string> PolicyObfuscator::Rewrite(const Document& doc,
                                                      Json& metadata) const {
  if (max_chunk_chars_ == 0) return ConfigError("max_chunk_chars must be > 0");
  const std::vector<std::string> chunks =
      ChunkBySentences(doc.text, max_chunk_chars_);
  const uint64_t base = DeriveSeed(seed_, method_id_ + "/" + doc.id);
  std::string out;
  for (size_t i = 0; i < chunks.size(); ++i) {
    auto gen = policy_->Generate(chunks[i], DeriveSeed(base, i));
    if (!gen.ok()) {
      return Annotate(gen.status(), absl::StrCat("chunk ", i));
    }
    if (IsBlank(*gen)) {
      return BackendError(absl::StrCat("empty generation for chunk ", i));
    }
    if (!out.empty()) out += ' ';
    out += Trim(*gen);
  }
  metadata["chunk_count"] = chunks.size();
  metadata["seed"] = seed_;
  metadata["backend"] = policy_->backend_id();
  return out;
}

// --- batch ---

absl::StatusOr<BatchReport> BatchObfuscate(const Obfuscator& obfuscator,
                                           const Corpus& corpus,
                                           const BatchOptions& options) {
  if (corpus.empty()) return ArgumentError("batch obfuscation of empty corpus");
  const std::vector<Document>& docs = corpus.documents();

  std::unordered_map<std::string, ObfuscationResult> done;
  std::optional<JsonlAppender> sink;
  if (options.output) {
    if (std::filesystem::exists(*options.output)) {
      AOTK_ASSIGN_OR_RETURN(std::vector<Json> records,
                            RecoverJsonLines(*options.output));
      for (const Json& j : records) {
        AOTK_ASSIGN_OR_RETURN(ObfuscationResult r,
                              ObfuscationResultFromJson(j));
        if (r.method_id != obfuscator.method_id()) {
          return ConfigError(absl::StrCat(
              options.output->string(), " holds results of method ",
              r.method_id, ", not ", obfuscator.method_id()));
        }
        std::string id = r.document_id;
        done.emplace(std::move(id), std::move(r));
      }
    }
    AOTK_ASSIGN_OR_RETURN(JsonlAppender a, JsonlAppender::Open(*options.output));
    sink.emplace(std::move(a));
  }

  std::vector<size_t> todo;
  for (size_t i = 0; i < docs.size(); ++i) {
    if (!done.count(docs[i].id)) todo.push_back(i);
  }

  std::vector<std::optional<absl::StatusOr<ObfuscationResult>>> slots(
      docs.size());
  const size_t window =
      static_cast<size_t>(std::max(1, options.threads)) * 8;
  for (size_t begin = 0; begin < todo.size(); begin += window) {
    const size_t end = std::min(todo.size(), begin + window);
    AOTK_RETURN_IF_ERROR(
        ParallelFor(end - begin, options.threads, [&](size_t k) {
          const size_t i = todo[begin + k];
          slots[i] = obfuscator.Obfuscate(docs[i]);
          return absl::OkStatus();
        }));
    if (sink) {
      for (size_t k = begin; k < end; ++k) {
        const auto& r = *slots[todo[k]];
        if (r.ok()) AOTK_RETURN_IF_ERROR(sink->Append(ObfuscationResultToJson(*r)));
      }
    }
  }

  BatchReport report;
  absl::Status first_error;
  for (size_t i = 0; i < docs.size(); ++i) {
    if (auto it = done.find(docs[i].id); it != done.end()) {
      report.results.push_back(it->second);
      ++report.reused;
      continue;
    }
    const auto& r = *slots[i];
    if (r.ok()) {
      report.results.push_back(*r);
    } else {
      if (first_error.ok()) first_error = r.status();
      report.failures.push_back({docs[i].id, std::string(r.status().message()),
                                 CategoryOf(r.status())});
    }
  }
  if (report.results.empty()) {
    return Annotate(first_error,
                    absl::StrCat("all ", docs.size(), " documents failed"));
  }
  return report;
}

}  // namespace aotk
