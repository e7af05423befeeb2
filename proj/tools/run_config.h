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

// Declarative run configuration: one JSON document, defaults filled in, every
// violation reported at once.

#ifndef AOTK_TOOLS_RUN_CONFIG_H_
#define AOTK_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "aotk/corpus.h"
#include "aotk/evalharness.h"
#include "aotk/io.h"
#include "aotk/po_align.h"
#include "aotk/policy.h"
#include "aotk/preference.h"
#include "aotk/rewards.h"
#include "aotk/synthetic.h"

namespace aotk::cli {

struct DataConfig {
  // JSONL or CSV path; empty means a generated corpus (see `synthetic`).
  std::string corpus;
  std::string format = "jsonl";
  FieldMapping fields;
  std::string name;  // dataset label in tables; defaults to the file stem
  size_t authors = 0;  // keep this many authors; 0 keeps all
  std::string author_selection = "top_by_count";
  double train_frac = 0.8;
  double val_frac = 0.1;
  double test_frac = 0.1;
  std::string stratify = "author";
  SyntheticCorpusOptions synthetic;
};

// Provider ids: "synthetic:tf", "synthetic:marker", "synthetic:hashed:<dim>",
// or "http:<model id>" against `endpoint`.
struct ProviderConfig {
  std::string utility = "synthetic:tf";
  std::string authorship = "synthetic:marker";
  std::string attacker = "synthetic:hashed:4096";
  std::string task_classifier = "synthetic:hashed:4096";
  std::string content;  // embed_score provider; empty reuses `utility`
  std::vector<std::string> markers;  // for synthetic:marker on real data
  std::string endpoint;
  bool cache = true;  // persist remote embeddings under the run directory
};

struct PolicyConfig {
  std::string init;  // saved KeepDropPolicy; empty starts fresh
  KeepDropPolicy::Options options;
  GenerationConfig generation;
  size_t max_chunk_chars = 2000;
};

struct ObfuscationConfig {
  // original | synonyms | llm_prompt | marker_deletion | policy
  std::string method = "original";
  // For `policy`: "train-dpo", "train-ppo", a saved policy path, or empty for
  // the untrained initial policy.
  std::string policy;
  std::string synonyms;    // JSON dictionary path
  std::string adjectives;  // newline-separated lexicon path
  double word_fraction = 0.9;
  double adjective_fraction = 0.8;
  std::string chat_endpoint;
  std::string chat_model = "gpt-3.5-turbo";
  std::vector<std::string> splits = {"train", "val", "test"};
};

struct EvaluationConfig {
  std::vector<Scenario> scenarios = {std::begin(kAllScenarios),
                                     std::end(kAllScenarios)};
  bool content_metrics = true;
  std::string classifier_backend = "nearest-centroid";
  double learning_rate = 2e-5;
  int batch_size = 8;
  int epochs = 3;
};

struct RunConfig {
  std::string run_id;
  std::string output_root = "runs";
  uint64_t seed = 0;
  int threads = 1;
  DataConfig data;
  ProviderConfig providers;
  Ablation ablation = Ablation::kFull;
  PreferenceConfig preference;
  TrainConfig dpo = DefaultTrainConfig(Algorithm::kDpo);
  TrainConfig ppo = DefaultTrainConfig(Algorithm::kPpo);
  PolicyConfig policy;
  ObfuscationConfig obfuscation;
  EvaluationConfig evaluation;
};

// Fills defaults for absent keys. Unknown keys, wrong types and out-of-range
// values are all collected into one config error. Per-module seeds are derived
// from `seed` and are not configurable separately.
absl::StatusOr<RunConfig> ParseRunConfig(const Json& j);

// Complete, normalized form (every field present).
Json RunConfigToJson(const RunConfig& cfg);

// Sets a dotted key ("data.corpus") in a config document. The value is parsed
// as JSON when possible, otherwise taken as a string.
absl::Status SetConfigValue(Json& config, std::string_view dotted_key,
                            std::string_view value);

}  // namespace aotk::cli

#endif  // AOTK_TOOLS_RUN_CONFIG_H_
