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

// Text embedders behind one interface. Two roles are used by the rewards: a
// semantic (utility) embedder and an authorship embedder whose vectors place
// texts by the same author close together.

#ifndef AOTK_EMBEDDINGS_H_
#define AOTK_EMBEDDINGS_H_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"
#include "aotk/http.h"
#include "aotk/io.h"

namespace aotk {

enum class EmbeddingRole { kUtility, kAuthorship };

std::string_view EmbeddingRoleName(EmbeddingRole role);

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values)
      : values_(std::move(values)) {}

  std::span<const double> values() const { return values_; }
  size_t size() const { return values_.size(); }
  double operator[](size_t i) const { return values_[i]; }
  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

// a.b / (|a| |b|) clamped to [-1, 1]. Lengths must match; a zero-norm input is
// an error rather than a silent 0.
absl::StatusOr<double> CosineSimilarity(const EmbeddingVector& a,
                                        const EmbeddingVector& b);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  EmbeddingRole role() const { return role_; }
  const std::string& model_id() const { return model_id_; }
  size_t dim() const { return dim_; }
  size_t max_input_chars() const { return max_input_chars_; }

  // One vector per text, in input order. Texts longer than max_input_chars
  // are split on sentence boundaries, each chunk embedded, and the chunk
  // vectors mean-pooled and rescaled to unit norm.
  absl::StatusOr<std::vector<EmbeddingVector>> Embed(
      std::span<const std::string> texts) const;
  absl::StatusOr<EmbeddingVector> Embed(std::string_view text) const;

 protected:
  EmbeddingProvider(EmbeddingRole role, std::string model_id, size_t dim,
                    size_t max_input_chars);

  // Raw vectors for texts already within max_input_chars.
  virtual absl::StatusOr<std::vector<EmbeddingVector>> EmbedChunks(
      std::span<const std::string> chunks) const = 0;

 private:
  friend class CachingEmbeddingProvider;

  EmbeddingRole role_;
  std::string model_id_;
  size_t dim_;
  size_t max_input_chars_;
};

// Counts of a fixed vocabulary over normalized tokens; out-of-vocabulary
// tokens are ignored. "a b" over (a, b, c) embeds to (1, 1, 0).
class TermFrequencyProvider : public EmbeddingProvider {
 public:
  static constexpr char kModelId[] = "synthetic/term-frequency";

  static absl::StatusOr<std::unique_ptr<TermFrequencyProvider>> Create(
      std::vector<std::string> vocabulary, size_t max_input_chars = 1 << 20);

  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

 protected:
  absl::StatusOr<std::vector<EmbeddingVector>> EmbedChunks(
      std::span<const std::string> chunks) const override;

 private:
  TermFrequencyProvider(std::vector<std::string> vocabulary,
                        size_t max_input_chars);

  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, size_t> index_;
};

// Sorted distinct normalized tokens of `texts`; a vocabulary for
// TermFrequencyProvider.
std::vector<std::string> BuildVocabulary(std::span<const std::string> texts);

// Authorship-role provider that sees only a configured set of marker tokens.
// Dimension i is 1 when marker i occurs; the last dimension is 1 exactly when
// no marker occurs, so every text has a non-zero embedding.
class MarkerProvider : public EmbeddingProvider {
 public:
  static constexpr char kModelId[] = "synthetic/marker";

  static absl::StatusOr<std::unique_ptr<MarkerProvider>> Create(
      std::vector<std::string> markers, size_t max_input_chars = 1 << 20);

  const std::vector<std::string>& markers() const { return markers_; }

 protected:
  absl::StatusOr<std::vector<EmbeddingVector>> EmbedChunks(
      std::span<const std::string> chunks) const override;

 private:
  MarkerProvider(std::vector<std::string> markers, size_t max_input_chars);

  std::vector<std::string> markers_;
  std::unordered_map<std::string, size_t> index_;
};

// Bag of normalized tokens hashed into `dim` buckets; open vocabulary.
class HashedTermProvider : public EmbeddingProvider {
 public:
  static constexpr char kModelId[] = "synthetic/hashed-terms";

  static absl::StatusOr<std::unique_ptr<HashedTermProvider>> Create(
      EmbeddingRole role, size_t dim, size_t max_input_chars = 1 << 20);

 protected:
  absl::StatusOr<std::vector<EmbeddingVector>> EmbedChunks(
      std::span<const std::string> chunks) const override;

 private:
  HashedTermProvider(EmbeddingRole role, size_t dim, size_t max_input_chars);
};

// Output size and input budget of a known pretrained checkpoint.
struct ModelShape {
  size_t dim;
  size_t max_input_chars;
};

// Defaults for the semantic and authorship checkpoints this toolkit is set up
// for; nullopt for unknown ids.
std::optional<ModelShape> KnownModelShape(std::string_view model_id);

inline constexpr char kDefaultUtilityModel[] = "Alibaba-NLP/gte-large-en-v1.5";
inline constexpr char kDefaultAuthorshipModel[] = "rrivera1849/LUAR-MUD";

// Client of an OpenAI-compatible embeddings endpoint:
//   POST {endpoint}/v1/embeddings {"model": id, "input": [texts]}
//   -> {"data": [{"index": i, "embedding": [...]}, ...]}
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  struct Options {
    std::string endpoint;
    std::string api_key;  // sent as a bearer token when non-empty
    size_t batch_size = 32;
    std::chrono::seconds timeout{60};
    RetryPolicy retry;
  };

  // `shape` defaults to KnownModelShape(model_id); unknown ids without a
  // shape are a config error.
  static absl::StatusOr<std::unique_ptr<HttpEmbeddingProvider>> Create(
      EmbeddingRole role, std::string model_id, Options options,
      std::optional<ModelShape> shape = std::nullopt);

 protected:
  absl::StatusOr<std::vector<EmbeddingVector>> EmbedChunks(
      std::span<const std::string> chunks) const override;

 private:
  HttpEmbeddingProvider(EmbeddingRole role, std::string model_id,
                        ModelShape shape, Options options);

  Options options_;
};

// Memoizes chunk embeddings of another provider by (model_id, SHA-256 of the
// chunk), persisted as append-only JSONL so reruns skip the backend.
class CachingEmbeddingProvider : public EmbeddingProvider {
 public:
  static absl::StatusOr<std::unique_ptr<CachingEmbeddingProvider>> Create(
      std::shared_ptr<const EmbeddingProvider> inner,
      std::optional<std::filesystem::path> cache_file);

  size_t hits() const;
  size_t misses() const;

 protected:
  absl::StatusOr<std::vector<EmbeddingVector>> EmbedChunks(
      std::span<const std::string> chunks) const override;

 private:
  explicit CachingEmbeddingProvider(
      std::shared_ptr<const EmbeddingProvider> inner);

  std::shared_ptr<const EmbeddingProvider> inner_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, EmbeddingVector> cache_;
  mutable std::optional<JsonlAppender> appender_;
  mutable size_t hits_ = 0;
  mutable size_t misses_ = 0;
};

}  // namespace aotk

#endif  // AOTK_EMBEDDINGS_H_
