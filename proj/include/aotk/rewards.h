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

// Embedding-similarity rewards for an (original, rewritten) pair.

#ifndef AOTK_REWARDS_H_
#define AOTK_REWARDS_H_

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "aotk/embeddings.h"
#include "aotk/io.h"

namespace aotk {

enum class Ablation { kFull, kNoPrivacy, kNoUtility };

std::string_view AblationName(Ablation ablation);
absl::StatusOr<Ablation> ParseAblation(std::string_view name);

struct RewardConfig {
  Ablation ablation = Ablation::kFull;
  double kl_coefficient = 0.2;
};

absl::Status ValidateRewardConfig(const RewardConfig& cfg);

struct RewardBreakdown {
  double utility = 0.0;
  double privacy = 0.0;
  double combined = 0.0;
  double raw_authorship_similarity = 0.0;
  double raw_semantic_similarity = 0.0;

  bool operator==(const RewardBreakdown&) const = default;
};

Json RewardBreakdownToJson(const RewardBreakdown& r);
absl::StatusOr<RewardBreakdown> RewardBreakdownFromJson(const Json& j);

// Cosine similarity of the utility embeddings.
absl::StatusOr<double> UtilityReward(std::string_view original,
                                     std::string_view candidate,
                                     const EmbeddingProvider& utility);

// 1 - cosine similarity of the authorship embeddings, in [0, 2].
absl::StatusOr<double> PrivacyReward(std::string_view original,
                                     std::string_view candidate,
                                     const EmbeddingProvider& authorship);

// Assembles a breakdown from the two raw similarities under `ablation`.
RewardBreakdown MakeBreakdown(double semantic_similarity,
                              double authorship_similarity, Ablation ablation);

// r - beta * kl. Negative kl or beta is an argument error.
absl::StatusOr<double> KlShapedReward(double reward, double kl_divergence,
                                      double beta);

// Both embedders plus the ablation. Stateless apart from the providers, so a
// scorer may be shared across threads when its providers are.
class RewardScorer {
 public:
  // Providers must outlive the scorer and have the matching roles.
  static absl::StatusOr<RewardScorer> Create(const EmbeddingProvider* utility,
                                             const EmbeddingProvider* authorship,
                                             RewardConfig cfg = {});

  const RewardConfig& config() const { return cfg_; }

  absl::StatusOr<RewardBreakdown> Score(std::string_view original,
                                        std::string_view candidate) const;

  // Scores many pairs with one embedding call per provider.
  absl::StatusOr<std::vector<RewardBreakdown>> ScoreBatch(
      std::span<const std::pair<std::string, std::string>> pairs) const;

 private:
  RewardScorer(const EmbeddingProvider* utility,
               const EmbeddingProvider* authorship, RewardConfig cfg)
      : utility_(utility), authorship_(authorship), cfg_(cfg) {}

  const EmbeddingProvider* utility_;
  const EmbeddingProvider* authorship_;
  RewardConfig cfg_;
};

}  // namespace aotk

#endif  // AOTK_REWARDS_H_
