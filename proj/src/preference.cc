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

#include "aotk/preference.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "aotk/parallel.h"
#include "aotk/random.h"
#include "aotk/status.h"

namespace aotk {
namespace {

absl::StatusOr<std::string> StringField(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    return DataError(absl::StrCat("preference record lacks string '", key, "'"));
  }
  return it->get<std::string>();
}

}  // namespace

absl::Status ValidatePreferenceConfig(const PreferenceConfig& cfg) {
  std::vector<std::string> bad;
  if (!(cfg.eps_priv > 0.0)) {
    bad.push_back(absl::StrCat("eps_priv must be > 0, got ", cfg.eps_priv));
  }
  if (!(cfg.eps_util > 0.0)) {
    bad.push_back(absl::StrCat("eps_util must be > 0, got ", cfg.eps_util));
  }
  if (cfg.samples_per_prompt < 2) {
    bad.push_back(absl::StrCat("samples_per_prompt must be >= 2, got ",
                               cfg.samples_per_prompt));
  }
  if (bad.empty()) return absl::OkStatus();
  std::string msg = bad[0];
  for (size_t i = 1; i < bad.size(); ++i) absl::StrAppend(&msg, "; ", bad[i]);
  return ConfigError(msg);
}

PairDecision DecidePair(const RewardBreakdown& left,
                        const RewardBreakdown& right,
                        const PreferenceConfig& cfg) {
  const double d_priv = std::abs(right.privacy - left.privacy);
  const double d_util = std::abs(right.utility - left.utility);
  if (!(d_priv > cfg.eps_priv && d_util < cfg.eps_util)) {
    return PairDecision::kDrop;
  }
  return right.privacy > left.privacy ? PairDecision::kChooseRight
                                      : PairDecision::kChooseLeft;
}

absl::Status CheckTriple(const PreferenceTriple& t,
                         const PreferenceConfig& cfg) {
  const double margin = t.chosen_rewards.privacy - t.rejected_rewards.privacy;
  const double gap =
      std::abs(t.chosen_rewards.utility - t.rejected_rewards.utility);
  if (!(margin > cfg.eps_priv)) {
    return DataError(absl::StrCat("triple ", t.prompt_id, ": privacy margin ",
                                  margin, " not above ", cfg.eps_priv));
  }
  if (!(gap < cfg.eps_util)) {
    return DataError(absl::StrCat("triple ", t.prompt_id, ": utility gap ", gap,
                                  " not below ", cfg.eps_util));
  }
  return absl::OkStatus();
}

PreferenceStats ComputePreferenceStats(std::span<const PreferenceTriple> triples,
                                       size_t dropped) {
  PreferenceStats s;
  s.kept = triples.size();
  s.dropped = dropped;
  if (triples.empty()) return s;
  for (const PreferenceTriple& t : triples) {
    s.mean_privacy_margin +=
        t.chosen_rewards.privacy - t.rejected_rewards.privacy;
    s.mean_utility_gap +=
        std::abs(t.chosen_rewards.utility - t.rejected_rewards.utility);
  }
  s.mean_privacy_margin /= static_cast<double>(triples.size());
  s.mean_utility_gap /= static_cast<double>(triples.size());
  return s;
}

absl::StatusOr<PreferenceRun> GeneratePreferencePairs(
    std::span<const Prompt> prompts, const Policy& policy,
    const RewardScorer& scorer, const PreferenceConfig& cfg, int threads) {
  AOTK_RETURN_IF_ERROR(ValidatePreferenceConfig(cfg));
  const size_t k = static_cast<size_t>(cfg.samples_per_prompt);

  struct PerPrompt {
    std::vector<PreferenceTriple> kept;
    size_t dropped = 0;
  };
  std::vector<PerPrompt> results(prompts.size());

  AOTK_RETURN_IF_ERROR(ParallelFor(
      prompts.size(), threads, [&](size_t p) -> absl::Status {
        const Prompt& prompt = prompts[p];
        const uint64_t base = DeriveSeed(cfg.seed, "preference/" + prompt.id);
        std::vector<std::string> samples(k);
        std::vector<RewardBreakdown> rewards(k);
        for (size_t s = 0; s < k; ++s) {
          auto gen = policy.Generate(prompt.text, DeriveSeed(base, s));
          if (!gen.ok()) {
            return Annotate(gen.status(),
                            absl::StrCat("sampling for prompt ", prompt.id));
          }
          samples[s] = *std::move(gen);
          auto r = scorer.Score(prompt.text, samples[s]);
          if (!r.ok()) {
            return Annotate(r.status(),
                            absl::StrCat("scoring for prompt ", prompt.id));
          }
          rewards[s] = *r;
        }
        PerPrompt& out = results[p];
        for (size_t i = 0; i < k; ++i) {
          for (size_t j = i + 1; j < k; ++j) {
            const PairDecision d = DecidePair(rewards[i], rewards[j], cfg);
            if (d == PairDecision::kDrop) {
              ++out.dropped;
              continue;
            }
            const size_t c = d == PairDecision::kChooseRight ? j : i;
            const size_t r = c == j ? i : j;
            out.kept.push_back({prompt.id, prompt.text, samples[c], samples[r],
                                rewards[c], rewards[r]});
          }
        }
        return absl::OkStatus();
      }));

  PreferenceRun run;
  size_t dropped = 0;
  for (PerPrompt& r : results) {
    dropped += r.dropped;
    for (PreferenceTriple& t : r.kept) run.triples.push_back(std::move(t));
  }
  run.stats = ComputePreferenceStats(run.triples, dropped);
  return run;
}

Json PreferenceTripleToJson(const PreferenceTriple& t) {
  return Json{{"prompt_id", t.prompt_id},
              {"prompt", t.prompt},
              {"chosen", t.chosen},
              {"rejected", t.rejected},
              {"chosen_rewards", RewardBreakdownToJson(t.chosen_rewards)},
              {"rejected_rewards", RewardBreakdownToJson(t.rejected_rewards)}};
}

absl::StatusOr<PreferenceTriple> PreferenceTripleFromJson(const Json& j) {
  if (!j.is_object()) return DataError("preference record is not an object");
  PreferenceTriple t;
  AOTK_ASSIGN_OR_RETURN(t.prompt_id, StringField(j, "prompt_id"));
  AOTK_ASSIGN_OR_RETURN(t.prompt, StringField(j, "prompt"));
  AOTK_ASSIGN_OR_RETURN(t.chosen, StringField(j, "chosen"));
  AOTK_ASSIGN_OR_RETURN(t.rejected, StringField(j, "rejected"));
  if (!j.contains("chosen_rewards") || !j.contains("rejected_rewards")) {
    return DataError("preference record lacks reward metadata");
  }
  AOTK_ASSIGN_OR_RETURN(t.chosen_rewards,
                        RewardBreakdownFromJson(j["chosen_rewards"]));
  AOTK_ASSIGN_OR_RETURN(t.rejected_rewards,
                        RewardBreakdownFromJson(j["rejected_rewards"]));
  return t;
}

absl::Status WritePreferences(const std::filesystem::path& path,
                              std::span<const PreferenceTriple> triples) {
  std::vector<Json> records;
  records.reserve(triples.size());
  for (const PreferenceTriple& t : triples) {
    records.push_back(PreferenceTripleToJson(t));
  }
  return WriteJsonLines(path, records);
}

absl::StatusOr<std::vector<PreferenceTriple>> ReadPreferences(
    const std::filesystem::path& path) {
  std::vector<PreferenceTriple> out;
  AOTK_RETURN_IF_ERROR(
      ForEachJsonLine(path, [&](size_t line, const Json& j) -> absl::Status {
        auto t = PreferenceTripleFromJson(j);
        if (!t.ok()) {
          return Annotate(t.status(),
                          absl::StrCat(path.string(), ":", line));
        }
        out.push_back(*std::move(t));
        return absl::OkStatus();
      }));
  return out;
}

}  // namespace aotk
