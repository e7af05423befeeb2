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

#include "aotk/rewards.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "aotk/status.h"

namespace aotk {
namespace {

absl::StatusOr<double> PairSimilarity(std::string_view a, std::string_view b,
                                      const EmbeddingProvider& p) {
  const std::string texts[] = {std::string(a), std::string(b)};
  AOTK_ASSIGN_OR_RETURN(std::vector<EmbeddingVector> v, p.Embed(texts));
  return CosineSimilarity(v[0], v[1]);
}

absl::StatusOr<double> NumberField(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    return DataError(absl::StrCat("reward record lacks numeric '", key, "'"));
  }
  return it->get<double>();
}

}  // namespace

std::string_view AblationName(Ablation ablation) {
  switch (ablation) {
    case Ablation::kFull:
      return "full";
    case Ablation::kNoPrivacy:
      return "no_privacy";
    case Ablation::kNoUtility:
      return "no_utility";
  }
  return "full";
}

absl::StatusOr<Ablation> ParseAblation(std::string_view name) {
  for (Ablation a :
       {Ablation::kFull, Ablation::kNoPrivacy, Ablation::kNoUtility}) {
    if (name == AblationName(a)) return a;
  }
  return ConfigError(absl::StrCat("unknown ablation '", std::string(name),
                                  "' (expected full, no_privacy, no_utility)"));
}

absl::Status ValidateRewardConfig(const RewardConfig& cfg) {
  if (!(cfg.kl_coefficient >= 0.0) || !std::isfinite(cfg.kl_coefficient)) {
    return ConfigError(absl::StrCat("kl_coefficient must be >= 0, got ",
                                    cfg.kl_coefficient));
  }
  return absl::OkStatus();
}

Json RewardBreakdownToJson(const RewardBreakdown& r) {
  return Json{{"utility", r.utility},
              {"privacy", r.privacy},
              {"combined", r.combined},
              {"raw_authorship_similarity", r.raw_authorship_similarity},
              {"raw_semantic_similarity", r.raw_semantic_similarity}};
}

absl::StatusOr<RewardBreakdown> RewardBreakdownFromJson(const Json& j) {
  if (!j.is_object()) return DataError("reward record is not an object");
  RewardBreakdown r;
  AOTK_ASSIGN_OR_RETURN(r.utility, NumberField(j, "utility"));
  AOTK_ASSIGN_OR_RETURN(r.privacy, NumberField(j, "privacy"));
  AOTK_ASSIGN_OR_RETURN(r.combined, NumberField(j, "combined"));
  AOTK_ASSIGN_OR_RETURN(r.raw_authorship_similarity,
                        NumberField(j, "raw_authorship_similarity"));
  AOTK_ASSIGN_OR_RETURN(r.raw_semantic_similarity,
                        NumberField(j, "raw_semantic_similarity"));
  return r;
}

absl::StatusOr<double> UtilityReward(std::string_view original,
                                     std::string_view candidate,
                                     const EmbeddingProvider& utility) {
  return PairSimilarity(original, candidate, utility);
}

absl::StatusOr<double> PrivacyReward(std::string_view original,
                                     std::string_view candidate,
                                     const EmbeddingProvider& authorship) {
  AOTK_ASSIGN_OR_RETURN(double sim,
                        PairSimilarity(original, candidate, authorship));
  return 1.0 - sim;
}

RewardBreakdown MakeBreakdown(double semantic_similarity,
                              double authorship_similarity, Ablation ablation) {
  RewardBreakdown r;
  r.raw_semantic_similarity = semantic_similarity;
  r.raw_authorship_similarity = authorship_similarity;
  r.utility = semantic_similarity;
  r.privacy = 1.0 - authorship_similarity;
  switch (ablation) {
    case Ablation::kFull:
      r.combined = r.utility + r.privacy;
      break;
    case Ablation::kNoPrivacy:
      r.combined = r.utility;
      break;
    case Ablation::kNoUtility:
      r.combined = r.privacy;
      break;
  }
  return r;
}

absl::StatusOr<double> KlShapedReward(double reward, double kl_divergence,
                                      double beta) {
  if (!(kl_divergence >= 0.0)) {
    return ArgumentError(
        absl::StrCat("KL divergence must be >= 0, got ", kl_divergence));
  }
  if (!(beta >= 0.0)) {
    return ArgumentError(absl::StrCat("KL coefficient must be >= 0, got ", beta));
  }
  return reward - beta * kl_divergence;
}

absl::StatusOr<RewardScorer> RewardScorer::Create(
    const EmbeddingProvider* utility, const EmbeddingProvider* authorship,
    RewardConfig cfg) {
  if (utility == nullptr || authorship == nullptr) {
    return ConfigError("reward scorer needs both embedding providers");
  }
  if (utility->role() != EmbeddingRole::kUtility) {
    return ConfigError(absl::StrCat("provider ", utility->model_id(),
                                    " is not a utility embedder"));
  }
  if (authorship->role() != EmbeddingRole::kAuthorship) {
    return ConfigError(absl::StrCat("provider ", authorship->model_id(),
                                    " is not an authorship embedder"));
  }
  AOTK_RETURN_IF_ERROR(ValidateRewardConfig(cfg));
  return RewardScorer(utility, authorship, cfg);
}

absl::StatusOr<RewardBreakdown> RewardScorer::Score(
    std::string_view original, std::string_view candidate) const {
  AOTK_ASSIGN_OR_RETURN(double sem,
                        PairSimilarity(original, candidate, *utility_));
  AOTK_ASSIGN_OR_RETURN(double auth,
                        PairSimilarity(original, candidate, *authorship_));
  return MakeBreakdown(sem, auth, cfg_.ablation);
}

absl::StatusOr<std::vector<RewardBreakdown>> RewardScorer::ScoreBatch(
    std::span<const std::pair<std::string, std::string>> pairs) const {
  std::vector<RewardBreakdown> out;
  if (pairs.empty()) return out;
  std::vector<std::string> texts;
  texts.reserve(2 * pairs.size());
  for (const auto& [a, b] : pairs) {
    texts.push_back(a);
    texts.push_back(b);
  }
  AOTK_ASSIGN_OR_RETURN(std::vector<EmbeddingVector> u, utility_->Embed(texts));
  AOTK_ASSIGN_OR_RETURN(std::vector<EmbeddingVector> s,
                        authorship_->Embed(texts));
  out.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    auto sem = CosineSimilarity(u[2 * i], u[2 * i + 1]);
    if (!sem.ok()) return Annotate(sem.status(), absl::StrCat("pair ", i));
    auto auth = CosineSimilarity(s[2 * i], s[2 * i + 1]);
    if (!auth.ok()) return Annotate(auth.status(), absl::StrCat("pair ", i));
    out.push_back(MakeBreakdown(*sem, *auth, cfg_.ablation));
  }
  return out;
}

}  // namespace aotk
