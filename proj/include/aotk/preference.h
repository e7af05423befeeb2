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

// Preference pairs for DPO: completions sampled from a reference policy,
// scored, and kept only when they differ clearly in privacy but not in
// utility.

#ifndef AOTK_PREFERENCE_H_
#define AOTK_PREFERENCE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "aotk/io.h"
#include "aotk/policy.h"
#include "aotk/rewards.h"

namespace aotk {

struct PreferenceConfig {
  double eps_priv = 0.10;
  double eps_util = 0.05;
  int samples_per_prompt = 2;
  uint64_t seed = 0;
};

absl::Status ValidatePreferenceConfig(const PreferenceConfig& cfg);

struct PreferenceTriple {
  std::string prompt_id;
  std::string prompt;
  std::string chosen;
  std::string rejected;
  RewardBreakdown chosen_rewards;
  RewardBreakdown rejected_rewards;

  bool operator==(const PreferenceTriple&) const = default;
};

enum class PairDecision { kDrop, kChooseLeft, kChooseRight };

// Keep iff |priv_r - priv_l| > eps_priv and |util_r - util_l| < eps_util;
// the completion with the higher privacy reward is chosen.
PairDecision DecidePair(const RewardBreakdown& left,
                        const RewardBreakdown& right,
                        const PreferenceConfig& cfg);

// Checks the invariants every emitted triple must satisfy under `cfg`.
absl::Status CheckTriple(const PreferenceTriple& t, const PreferenceConfig& cfg);

struct Prompt {
  std::string id;
  std::string text;
};

struct PreferenceStats {
  size_t kept = 0;
  size_t dropped = 0;
  double mean_privacy_margin = 0.0;  // chosen - rejected
  double mean_utility_gap = 0.0;     // |chosen - rejected|
};

// Means over `triples`; `dropped` is carried through.
PreferenceStats ComputePreferenceStats(std::span<const PreferenceTriple> triples,
                                       size_t dropped = 0);

struct PreferenceRun {
  std::vector<PreferenceTriple> triples;  // in prompt order, then pair order
  PreferenceStats stats;                  // dropped counts candidate pairs
};

// Samples cfg.samples_per_prompt completions per prompt and filters every
// unordered pair (i < j, i as left). Sample seeds derive from cfg.seed and
// the prompt id, so the output is independent of `threads`.
absl::StatusOr<PreferenceRun> GeneratePreferencePairs(
    std::span<const Prompt> prompts, const Policy& policy,
    const RewardScorer& scorer, const PreferenceConfig& cfg, int threads = 1);

Json PreferenceTripleToJson(const PreferenceTriple& t);
absl::StatusOr<PreferenceTriple> PreferenceTripleFromJson(const Json& j);
absl::Status WritePreferences(const std::filesystem::path& path,
                              std::span<const PreferenceTriple> triples);
absl::StatusOr<std::vector<PreferenceTriple>> ReadPreferences(
    const std::filesystem::path& path);

}  // namespace aotk

#endif  // AOTK_PREFERENCE_H_
