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

// Obfuscators: functions from a document to a rewritten text, plus batch
// execution with incremental, resumable persistence.

#ifndef AOTK_OBFUSCATE_H_
#define AOTK_OBFUSCATE_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "aotk/corpus.h"
#include "aotk/http.h"
#include "aotk/io.h"
#include "aotk/policy.h"
#include "aotk/status.h"

namespace aotk {

struct ObfuscationResult {
  std::string document_id;
  std::string author_id;
  std::string original_text;
  std::string obfuscated_text;
  std::string method_id;
  Json metadata = Json::object();

  bool operator==(const ObfuscationResult&) const = default;
};

Json ObfuscationResultToJson(const ObfuscationResult& r);
absl::StatusOr<ObfuscationResult> ObfuscationResultFromJson(const Json& j);
absl::StatusOr<std::vector<ObfuscationResult>> ReadObfuscations(
    const std::filesystem::path& path);

class Obfuscator {
 public:
  virtual ~Obfuscator() = default;

  // "original", "synonyms", "llm_prompt", "sft", "policy", or a custom id.
  virtual std::string method_id() const = 0;

  // Rejects blank input; errors name the document. Non-identity methods never
  // fall back to the original text.
  absl::StatusOr<ObfuscationResult> Obfuscate(const Document& doc) const;

 protected:
  // Returns the rewritten text and fills method-specific metadata.
  virtual absl::StatusOr<std::string> Rewrite(const Document& doc,
                                              Json& metadata) const = 0;
};

class IdentityObfuscator : public Obfuscator {
 public:
  std::string method_id() const override { return "original"; }

 protected:
  absl::StatusOr<std::string> Rewrite(const Document& doc,
                                      Json& metadata) const override;
};

// Part-of-speech oracle for the adjective budget.
class PosTagger {
 public:
  virtual ~PosTagger() = default;
  // One flag per word.
  virtual std::vector<bool> AdjectiveMask(
      const std::vector<std::string>& words) const = 0;
};

// Tags a word as an adjective iff its lowercase form is in the lexicon.
class LexiconTagger : public PosTagger {
 public:
  explicit LexiconTagger(std::set<std::string> adjectives);
  std::vector<bool> AdjectiveMask(
      const std::vector<std::string>& words) const override;

 private:
  std::set<std::string> adjectives_;
};

struct SynonymConfig {
  std::map<std::string, std::vector<std::string>> dictionary;  // lowercase keys
  double word_fraction = 0.9;
  double adjective_fraction = 0.8;
  uint64_t seed = 0;
};

absl::Status ValidateSynonymConfig(const SynonymConfig& cfg);

// {"word": ["synonym", ...], ...}
absl::StatusOr<std::map<std::string, std::vector<std::string>>>
LoadSynonymDictionary(const std::filesystem::path& path);

// Dictionary substitution. A word is eligible when the dictionary has a
// single-word synonym for its lowercase form. floor(word_fraction * eligible)
// eligible words are replaced, chosen uniformly under the seed; with a tagger,
// at most floor(adjective_fraction * eligible adjectives) of them may be
// adjectives. Synonyms are drawn uniformly and take the source word's case.
class SynonymObfuscator : public Obfuscator {
 public:
  static absl::StatusOr<std::unique_ptr<SynonymObfuscator>> Create(
      SynonymConfig cfg, std::shared_ptr<const PosTagger> tagger = nullptr);

  std::string method_id() const override { return "synonyms"; }

 protected:
  absl::StatusOr<std::string> Rewrite(const Document& doc,
                                      Json& metadata) const override;

 private:
  SynonymObfuscator(SynonymConfig cfg, std::shared_ptr<const PosTagger> tagger);

  SynonymConfig cfg_;
  std::shared_ptr<const PosTagger> tagger_;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string model() const = 0;
  // Text of the first choice; an empty reply is a remote error.
  virtual absl::StatusOr<std::string> Complete(
      const std::vector<ChatMessage>& messages) const = 0;
};

// OpenAI-compatible POST {endpoint}/v1/chat/completions. Sampling parameters
// are left at the service defaults.
class HttpChatClient : public ChatClient {
 public:
  struct Options {
    std::string endpoint;
    std::string api_key;
    std::string model = "gpt-3.5-turbo";
    std::chrono::seconds timeout{120};
    RetryPolicy retry;
  };

  static absl::StatusOr<std::unique_ptr<HttpChatClient>> Create(Options opts);
  // Endpoint and key from AOTK_CHAT_ENDPOINT / AOTK_CHAT_API_KEY.
  static absl::StatusOr<std::unique_ptr<HttpChatClient>> FromEnvironment(
      Options defaults);

  std::string model() const override { return opts_.model; }
  absl::StatusOr<std::string> Complete(
      const std::vector<ChatMessage>& messages) const override;

 private:
  explicit HttpChatClient(Options opts) : opts_(std::move(opts)) {}
  Options opts_;
};

inline constexpr char kObfuscationPrompt[] =
    "Rewrite the following paragraph so that the author’s style is "
    "obfuscated.";

// The whole document goes out as one user message: the prompt, a blank line,
// then the text.
class LlmPromptObfuscator : public Obfuscator {
 public:
  explicit LlmPromptObfuscator(std::shared_ptr<const ChatClient> client)
      : client_(std::move(client)) {}

  std::string method_id() const override { return "llm_prompt"; }
  static std::string UserMessage(std::string_view text);

 protected:
  absl::StatusOr<std::string> Rewrite(const Document& doc,
                                      Json& metadata) const override;

 private:
  std::shared_ptr<const ChatClient> client_;
};

// Runs a policy over sentence-packed chunks of at most max_chunk_chars code
// points and joins the outputs with spaces in input order. Chunk seeds derive
// from `seed` and the document id.
class PolicyObfuscator : public Obfuscator {
 public:
  PolicyObfuscator(std::shared_ptr<const Policy> policy, std::string method_id,
                   size_t max_chunk_chars, uint64_t seed)
      : policy_(std::move(policy)),
        method_id_(std::move(method_id)),
        max_chunk_chars_(max_chunk_chars),
        seed_(seed) {}

  std::string method_id() const override { return method_id_; }

 protected:
  absl::StatusOr<std::string> Rewrite(const Document& doc,
                                      Json& metadata) const override;

 private:
  std::shared_ptr<const Policy> policy_;
  std::string method_id_;
  size_t max_chunk_chars_;
  uint64_t seed_;
};

struct BatchOptions {
  int threads = 1;
  // Append-only JSONL of results. Documents already present are not
  // recomputed.
  std::optional<std::filesystem::path> output;
};

struct BatchFailure {
  std::string document_id;
  std::string error;
  ErrorCategory category = ErrorCategory::kBackend;
};

struct BatchReport {
  std::vector<ObfuscationResult> results;  // corpus order
  std::vector<BatchFailure> failures;      // corpus order
  size_t reused = 0;                       // taken from an earlier run
};

// Per-document failures are collected; only a batch in which every document
// fails is an error. Results are persisted in corpus order as they complete.
absl::StatusOr<BatchReport> BatchObfuscate(const Obfuscator& obfuscator,
                                           const Corpus& corpus,
                                           const BatchOptions& options = {});

}  // namespace aotk

#endif  // AOTK_OBFUSCATE_H_
