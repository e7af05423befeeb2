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

// Policy optimization against a frozen reference policy: the DPO contrastive
// loss, KL-shaped PPO rewards, and resumable training loops for both.

#ifndef AOTK_PO_ALIGN_H_
#define AOTK_PO_ALIGN_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "aotk/io.h"
#include "aotk/policy.h"
#include "aotk/preference.h"
#include "aotk/rewards.h"

namespace aotk {

enum class Algorithm { kPpo, kDpo };

std::string_view AlgorithmName(Algorithm a);

struct TrainConfig {
  Algorithm algorithm = Algorithm::kDpo;
  double learning_rate = 2.96e-5;
  int batch_size = 32;
  int epochs = 3;
  double beta = 0.1;
  uint64_t seed = 0;
};

// Defaults per algorithm: PPO lr 1.47e-5, batch 16, beta (KL coefficient)
// 0.2; DPO lr 2.96e-5, batch 32, beta 0.1; three epochs each.
TrainConfig DefaultTrainConfig(Algorithm algorithm);

// Lists every violated field.
absl::Status ValidateTrainConfig(const TrainConfig& cfg);

Json TrainConfigToJson(const TrainConfig& cfg);
absl::StatusOr<TrainConfig> TrainConfigFromJson(const Json& j);

struct DpoLossValue {
  double loss = 0.0;
  double grad_wrt_margin = 0.0;  // d loss / d (logratio_c - logratio_r)
};

// -log sigmoid(beta * (logratio_chosen - logratio_rejected)), stable for
// large margins.
absl::StatusOr<DpoLossValue> DpoLoss(double logratio_chosen,
                                     double logratio_rejected, double beta);

struct PpoScored {
  std::string prompt;
  std::string completion;
  RewardBreakdown rewards;
  double kl = 0.0;  // max(0, log pi(y|x) - log pi_ref(y|x))
  double shaped_reward = 0.0;
};

// combined reward - beta * per-sequence KL estimate for each (prompt,
// completion) pair.
absl::StatusOr<std::vector<PpoScored>> PpoStepRewards(
    std::span<const std::pair<std::string, std::string>> batch,
    const RewardScorer& scorer, const Policy& reference, const Policy& policy,
    double beta);

struct TrainOptions {
  // Checkpoints go to <dir>/epoch-<n>/{weights.json,state.json}.
  std::filesystem::path checkpoint_dir;
  // Per-step JSONL log.
  std::filesystem::path log_path;
  // Continue from the newest complete checkpoint in checkpoint_dir.
  bool resume = true;
};

struct TrainResult {
  std::unique_ptr<TrainablePolicy> policy;
  int epochs_completed = 0;
  int steps = 0;
  int resumed_from_epoch = 0;  // 0 when starting fresh
};

// `initial` is copied; the reference is only read. Checkpoints every epoch; a
// non-finite loss aborts with a backend error, leaving the last good
// checkpoint in place.
absl::StatusOr<TrainResult> TrainDpo(std::span<const PreferenceTriple> triples,
                                     const Policy& reference,
                                     const TrainablePolicy& initial,
                                     const TrainConfig& cfg,
                                     const TrainOptions& options);

absl::StatusOr<TrainResult> TrainPpo(std::span<const Prompt> prompts,
                                     const RewardScorer& scorer,
                                     const Policy& reference,
                                     const TrainablePolicy& initial,
                                     const TrainConfig& cfg,
                                     const TrainOptions& options);

}  // namespace aotk

#endif  // AOTK_PO_ALIGN_H_
