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

#include "aotk/embeddings.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "absl/strings/str_cat.h"
#include "aotk/random.h"
#include "aotk/status.h"
#include "aotk/text.h"

namespace aotk {
namespace {

absl::StatusOr<std::unordered_map<std::string, size_t>> IndexTerms(
    const std::vector<std::string>& terms, const std::string& what) {
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].empty()) {
      return ArgumentError(absl::StrCat(what, " contains an empty entry"));
    }
    if (!index.emplace(terms[i], i).second) {
      return ArgumentError(
          absl::StrCat(what, " contains duplicate '", terms[i], "'"));
    }
  }
  return index;
}

}  // namespace

std::string_view EmbeddingRoleName(EmbeddingRole role) {
  return role == EmbeddingRole::kUtility ? "utility" : "authorship";
}

absl::StatusOr<double> CosineSimilarity(const EmbeddingVector& a,
                                        const EmbeddingVector& b) {
  if (a.size() != b.size()) {
    return ArgumentError(absl::StrCat("cosine similarity of vectors of length ",
                                      a.size(), " and ", b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) {
    return ArgumentError("cosine similarity of a degenerate (zero-norm) vector");
  }
  const double cos = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(cos, -1.0, 1.0);
}

EmbeddingProvider::EmbeddingProvider(EmbeddingRole role, std::string model_id,
                                     size_t dim, size_t max_input_chars)
    : role_(role),
      model_id_(std::move(model_id)),
      dim_(dim),
      max_input_chars_(max_input_chars) {}

absl::StatusOr<std::vector<EmbeddingVector>> EmbeddingProvider::Embed(
    std::span<const std::string> texts) const {
  if (texts.empty()) return ArgumentError("embed: no texts given");
  std::vector<std::string> chunks;
  std::vector<size_t> chunk_count;
  chunk_count.reserve(texts.size());
  for (size_t i = 0; i < texts.size(); ++i) {
    const std::string_view text = Trim(texts[i]);
    if (text.empty()) {
      return ArgumentError(absl::StrCat("embed: text ", i, " is empty"));
    }
    if (CountCodePoints(text) <= max_input_chars_) {
      chunks.emplace_back(text);
      chunk_count.push_back(1);
    } else {
      std::vector<std::string> pieces = ChunkBySentences(text, max_input_chars_);
      chunk_count.push_back(pieces.size());
      for (std::string& p : pieces) chunks.push_back(std::move(p));
    }
  }
  auto raw = EmbedChunks(chunks);
  if (!raw.ok()) {
    return Annotate(raw.status(), absl::StrCat("embedding model ", model_id_));
  }
  if (raw->size() != chunks.size()) {
    return BackendError(absl::StrCat("embedding model ", model_id_, " returned ",
                                     raw->size(), " vectors for ",
                                     chunks.size(), " inputs"));
  }
  for (const EmbeddingVector& v : *raw) {
    if (v.size() != dim_) {
      return BackendError(absl::StrCat("embedding model ", model_id_,
                                       " returned a vector of length ",
                                       v.size(), ", expected ", dim_));
    }
    for (double x : v.values()) {
      if (!std::isfinite(x)) {
        return BackendError(absl::StrCat("embedding model ", model_id_,
                                         " returned a non-finite value"));
      }
    }
  }

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  size_t next = 0;
  for (size_t n : chunk_count) {
    if (n == 1) {
      out.push_back(std::move((*raw)[next++]));
      continue;
    }
    std::vector<double> pooled(dim_, 0.0);
    for (size_t c = 0; c < n; ++c) {
      const EmbeddingVector& v = (*raw)[next++];
      for (size_t d = 0; d < dim_; ++d) pooled[d] += v[d];
    }
    double norm = 0.0;
    for (double& x : pooled) {
      x /= static_cast<double>(n);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& x : pooled) x /= norm;
    }
    out.emplace_back(std::move(pooled));
  }
  return out;
}

absl::StatusOr<EmbeddingVector> EmbeddingProvider::Embed(
    std::string_view text) const {
  const std::string owned(text);
  AOTK_ASSIGN_OR_RETURN(std::vector<EmbeddingVector> v,
                        Embed(std::span<const std::string>(&owned, 1)));
  return std::move(v[0]);
}

// --- TermFrequencyProvider ---

TermFrequencyProvider::TermFrequencyProvider(std::vector<std::string> vocabulary,
                                             size_t max_input_chars)
    : EmbeddingProvider(EmbeddingRole::kUtility, kModelId, vocabulary.size(),
                        max_input_chars),
      vocabulary_(std::move(vocabulary)) {}

absl::StatusOr<std::unique_ptr<TermFrequencyProvider>>
TermFrequencyProvider::Create(std::vector<std::string> vocabulary,
                              size_t max_input_chars) {
  if (vocabulary.empty()) return ArgumentError("empty vocabulary");
  AOTK_ASSIGN_OR_RETURN(auto index, IndexTerms(vocabulary, "vocabulary"));
  std::unique_ptr<TermFrequencyProvider> p(
      new TermFrequencyProvider(std::move(vocabulary), max_input_chars));
  p->index_ = std::move(index);
  return p;
}

absl::StatusOr<std::vector<EmbeddingVector>> TermFrequencyProvider::EmbedChunks(
    std::span<const std::string> chunks) const {
  std::vector<EmbeddingVector> out;
  out.reserve(chunks.size());
  for (const std::string& chunk : chunks) {
    std::vector<double> v(dim(), 0.0);
    for (const std::string& tok : NormalizedTokens(chunk)) {
      auto it = index_.find(tok);
      if (it != index_.end()) v[it->second] += 1.0;
    }
    out.emplace_back(std::move(v));
  }
  return out;
}

std::vector<std::string> BuildVocabulary(std::span<const std::string> texts) {
  std::set<std::string> terms;
  for (const std::string& t : texts) {
    for (std::string& tok : NormalizedTokens(t)) terms.insert(std::move(tok));
  }
  return {terms.begin(), terms.end()};
}

// --- MarkerProvider ---

MarkerProvider::MarkerProvider(std::vector<std::string> markers,
                               size_t max_input_chars)
    : EmbeddingProvider(EmbeddingRole::kAuthorship, kModelId,
                        markers.size() + 1, max_input_chars),
      markers_(std::move(markers)) {}

absl::StatusOr<std::unique_ptr<MarkerProvider>> MarkerProvider::Create(
    std::vector<std::string> markers, size_t max_input_chars) {
  for (std::string& m : markers) m = AsciiLower(m);
  AOTK_ASSIGN_OR_RETURN(auto index, IndexTerms(markers, "marker set"));
  std::unique_ptr<MarkerProvider> p(
      new MarkerProvider(std::move(markers), max_input_chars));
  p->index_ = std::move(index);
  return p;
}

absl::StatusOr<std::vector<EmbeddingVector>> MarkerProvider::EmbedChunks(
    std::span<const std::string> chunks) const {
  std::vector<EmbeddingVector> out;
  out.reserve(chunks.size());
  for (const std::string& chunk : chunks) {
    std::vector<double> v(dim(), 0.0);
    bool any = false;
    for (const std::string& tok : NormalizedTokens(chunk)) {
      auto it = index_.find(tok);
      if (it != index_.end()) {
        v[it->second] = 1.0;
        any = true;
      }
    }
    if (!any) v.back() = 1.0;
    out.emplace_back(std::move(v));
  }
  return out;
}

// --- HashedTermProvider ---

HashedTermProvider::HashedTermProvider(EmbeddingRole role, size_t dim,
                                       size_t max_input_chars)
    : EmbeddingProvider(role, kModelId, dim, max_input_chars) {}

absl::StatusOr<std::unique_ptr<HashedTermProvider>> HashedTermProvider::Create(
    EmbeddingRole role, size_t dim, size_t max_input_chars) {
  if (dim == 0) return ArgumentError("hashed provider needs dim > 0");
  return std::unique_ptr<HashedTermProvider>(
      new HashedTermProvider(role, dim, max_input_chars));
}

absl::StatusOr<std::vector<EmbeddingVector>> HashedTermProvider::EmbedChunks(
    std::span<const std::string> chunks) const {
  std::vector<EmbeddingVector> out;
  out.reserve(chunks.size());
  for (const std::string& chunk : chunks) {
    std::vector<double> v(dim(), 0.0);
    for (const std::string& tok : NormalizedTokens(chunk)) {
      v[Fnv1a64(tok) % dim()] += 1.0;
    }
    out.emplace_back(std::move(v));
  }
  return out;
}

// --- Pretrained checkpoints over HTTP ---

std::optional<ModelShape> KnownModelShape(std::string_view model_id) {
  // gte-large-en-v1.5: 1024-d, 8192-token context (~4 chars per token).
  if (model_id == kDefaultUtilityModel) return ModelShape{1024, 32000};
  // LUAR-MUD: 512-d, 512-token episodes.
  if (model_id == kDefaultAuthorshipModel) return ModelShape{512, 2000};
  return std::nullopt;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(EmbeddingRole role,
                                             std::string model_id,
                                             ModelShape shape, Options options)
    : EmbeddingProvider(role, std::move(model_id), shape.dim,
                        shape.max_input_chars),
      options_(std::move(options)) {}

absl::StatusOr<std::unique_ptr<HttpEmbeddingProvider>>
HttpEmbeddingProvider::Create(EmbeddingRole role, std::string model_id,
                              Options options,
                              std::optional<ModelShape> shape) {
  if (!shape) shape = KnownModelShape(model_id);
  if (!shape) {
    return ConfigError(absl::StrCat("unknown embedding model '", model_id,
                                    "': its dimension must be configured"));
  }
  if (shape->dim == 0 || shape->max_input_chars == 0) {
    return ConfigError("embedding model shape must be positive");
  }
  if (options.endpoint.empty()) {
    return ConfigError(
        absl::StrCat("no endpoint configured for embedding model ", model_id));
  }
  if (options.batch_size == 0) options.batch_size = 1;
  return std::unique_ptr<HttpEmbeddingProvider>(new HttpEmbeddingProvider(
      role, std::move(model_id), *shape, std::move(options)));
}

absl::StatusOr<std::vector<EmbeddingVector>> HttpEmbeddingProvider::EmbedChunks(
    std::span<const std::string> chunks) const {
  std::vector<std::pair<std::string, std::string>> headers;
  if (!options_.api_key.empty()) {
    headers.emplace_back("Authorization", "Bearer " + options_.api_key);
  }
  std::vector<EmbeddingVector> out;
  out.reserve(chunks.size());
  for (size_t start = 0; start < chunks.size(); start += options_.batch_size) {
    const size_t n = std::min(options_.batch_size, chunks.size() - start);
    Json body = {{"model", model_id()},
                 {"input", std::vector<std::string>(
                               chunks.begin() + static_cast<ptrdiff_t>(start),
                               chunks.begin() +
                                   static_cast<ptrdiff_t>(start + n))}};
    AOTK_ASSIGN_OR_RETURN(
        Json reply, WithRetries<Json>(options_.retry, [&] {
          return PostJson(options_.endpoint, "/v1/embeddings", body, headers,
                          options_.timeout);
        }));
    if (!reply.contains("data") || !reply["data"].is_array() ||
        reply["data"].size() != n) {
      return RemoteError("embeddings reply lacks one 'data' entry per input");
    }
    std::vector<EmbeddingVector> batch(n);
    std::vector<bool> filled(n, false);
    for (size_t i = 0; i < n; ++i) {
      const Json& item = reply["data"][i];
      size_t index = i;
      if (item.contains("index") && item["index"].is_number_unsigned()) {
        index = item["index"].get<size_t>();
      }
      if (index >= n || filled[index] || !item.contains("embedding") ||
          !item["embedding"].is_array()) {
        return RemoteError("malformed entry in embeddings reply");
      }
      std::vector<double> values;
      values.reserve(item["embedding"].size());
      for (const Json& x : item["embedding"]) {
        if (!x.is_number()) return RemoteError("non-numeric embedding value");
        values.push_back(x.get<double>());
      }
      batch[index] = EmbeddingVector(std::move(values));
      filled[index] = true;
    }
    for (EmbeddingVector& v : batch) out.push_back(std::move(v));
  }
  return out;
}

// --- CachingEmbeddingProvider ---

CachingEmbeddingProvider::CachingEmbeddingProvider(
    std::shared_ptr<const EmbeddingProvider> inner)
    : EmbeddingProvider(inner->role(), inner->model_id(), inner->dim(),
                        inner->max_input_chars()),
      inner_(std::move(inner)) {}

absl::StatusOr<std::unique_ptr<CachingEmbeddingProvider>>
CachingEmbeddingProvider::Create(
    std::shared_ptr<const EmbeddingProvider> inner,
    std::optional<std::filesystem::path> cache_file) {
  if (inner == nullptr) return ArgumentError("caching provider needs a backend");
  std::unique_ptr<CachingEmbeddingProvider> p(
      new CachingEmbeddingProvider(std::move(inner)));
  if (cache_file) {
    AOTK_ASSIGN_OR_RETURN(std::vector<Json> records,
                          RecoverJsonLines(*cache_file));
    for (const Json& r : records) {
      if (!r.contains("model_id") || !r.contains("sha256") ||
          !r.contains("values") || !r["values"].is_array()) {
        return DataError(absl::StrCat("malformed embedding cache record in ",
                                      cache_file->string()));
      }
      if (r["model_id"] != p->model_id()) continue;
      std::vector<double> values = r["values"].get<std::vector<double>>();
      if (values.size() != p->dim()) continue;
      p->cache_[r["sha256"].get<std::string>()] =
          EmbeddingVector(std::move(values));
    }
    AOTK_ASSIGN_OR_RETURN(JsonlAppender appender,
                          JsonlAppender::Open(*cache_file));
    p->appender_.emplace(std::move(appender));
  }
  return p;
}

size_t CachingEmbeddingProvider::hits() const {
  std::lock_guard<std::mutex> lock(mu_);
  return hits_;
}

size_t CachingEmbeddingProvider::misses() const {
  std::lock_guard<std::mutex> lock(mu_);
  return misses_;
}

absl::StatusOr<std::vector<EmbeddingVector>>
CachingEmbeddingProvider::EmbedChunks(
    std::span<const std::string> chunks) const {
  std::vector<std::string> keys;
  keys.reserve(chunks.size());
  for (const std::string& c : chunks) keys.push_back(Sha256Hex(c));

  std::vector<EmbeddingVector> out(chunks.size());
  std::vector<std::string> missing;
  std::vector<size_t> missing_pos;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (size_t i = 0; i < chunks.size(); ++i) {
      auto it = cache_.find(keys[i]);
      if (it != cache_.end()) {
        out[i] = it->second;
        ++hits_;
      } else {
        missing.push_back(chunks[i]);
        missing_pos.push_back(i);
        ++misses_;
      }
    }
  }
  if (missing.empty()) return out;
  AOTK_ASSIGN_OR_RETURN(std::vector<EmbeddingVector> fresh,
                        inner_->EmbedChunks(missing));
  if (fresh.size() != missing.size()) {
    return BackendError("embedding backend returned the wrong number of vectors");
  }
  std::lock_guard<std::mutex> lock(mu_);
  for (size_t j = 0; j < fresh.size(); ++j) {
    const std::string& key = keys[missing_pos[j]];
    if (appender_ && !cache_.count(key)) {
      Json record = {{"model_id", model_id()},
                     {"sha256", key},
                     {"values", std::vector<double>(fresh[j].values().begin(),
                                                    fresh[j].values().end())}};
      AOTK_RETURN_IF_ERROR(appender_->Append(record));
    }
    cache_[key] = fresh[j];
    out[missing_pos[j]] = std::move(fresh[j]);
  }
  return out;
}

}  // namespace aotk
