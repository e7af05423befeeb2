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

// Evaluation of obfuscators: authorship attackers under three threat
// scenarios, downstream utility classifiers (direct and retrained), and
// content-preservation metrics.

#ifndef AOTK_EVALHARNESS_H_
#define AOTK_EVALHARNESS_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "aotk/corpus.h"
#include "aotk/embeddings.h"
#include "aotk/io.h"
#include "aotk/obfuscate.h"

namespace aotk {

enum class ClassifierTask { kAttribution, kUtility };

struct ClassifierSpec {
  ClassifierTask task = ClassifierTask::kAttribution;
  std::string backend_id = "nearest-centroid";
  double learning_rate = 2e-5;
  int batch_size = 8;
  int epochs = 3;
  uint64_t seed = 0;
};

absl::Status ValidateClassifierSpec(const ClassifierSpec& spec);

struct LabeledText {
  std::string text;
  std::string label;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual const std::set<std::string>& labels() const = 0;
  virtual absl::StatusOr<std::vector<std::string>> Predict(
      std::span<const std::string> texts) const = 0;
  // Accuracy on the validation set given at training time.
  virtual double validation_accuracy() const = 0;
};

class ClassifierTrainer {
 public:
  virtual ~ClassifierTrainer() = default;
  virtual std::string backend_id() const = 0;
  // Fewer than two classes in `train` or an empty `val` is a data error.
  virtual absl::StatusOr<std::unique_ptr<Classifier>> Train(
      const ClassifierSpec& spec, std::span<const LabeledText> train,
      std::span<const LabeledText> val) const = 0;
};

// Class centroids of unit-normalized embeddings; prediction is the centroid
// of highest cosine, ties (and zero-norm inputs) going to the
// lexicographically first label. Deterministic and hyperparameter-free; the
// spec's optimizer fields are recorded but unused.
class NearestCentroidTrainer : public ClassifierTrainer {
 public:
  explicit NearestCentroidTrainer(
      std::shared_ptr<const EmbeddingProvider> embedder)
      : embedder_(std::move(embedder)) {}

  std::string backend_id() const override { return "nearest-centroid"; }
  absl::StatusOr<std::unique_ptr<Classifier>> Train(
      const ClassifierSpec& spec, std::span<const LabeledText> train,
      std::span<const LabeledText> val) const override;

 private:
  std::shared_ptr<const EmbeddingProvider> embedder_;
};

struct AccuracyCount {
  size_t correct = 0;
  size_t total = 0;
  double accuracy() const {
    return total == 0 ? 0.0
                      : static_cast<double>(correct) / static_cast<double>(total);
  }
};

// Accuracy of `classifier` on labeled texts. Labels outside the classifier's
// label space are a data error; counts are verified in a second pass.
absl::StatusOr<AccuracyCount> ClassifierAccuracy(
    const Classifier& classifier, std::span<const LabeledText> test);

// Fraction of obfuscated texts attributed to their true author.
absl::StatusOr<AccuracyCount> AttackAccuracy(
    const Classifier& attacker, std::span<const ObfuscationResult> test);

enum class Scenario { kOriginalOnly, kMixed5050, kObfuscatedOnly };

std::string_view ScenarioName(Scenario s);
absl::StatusOr<Scenario> ParseScenario(std::string_view name);
inline constexpr Scenario kAllScenarios[] = {
    Scenario::kOriginalOnly, Scenario::kMixed5050, Scenario::kObfuscatedOnly};

// Obfuscation results keyed by document id.
using ObfuscationIndex = std::unordered_map<std::string, ObfuscationResult>;
ObfuscationIndex IndexObfuscations(std::span<const ObfuscationResult> results);

struct MixedSet {
  std::vector<LabeledText> texts;  // labels are author ids
  size_t originals = 0;
  size_t obfuscated = 0;
  // Per author: (originals, obfuscated).
  std::map<std::string, std::pair<size_t, size_t>> per_author;
};

// Within each author, documents in corpus order alternate original,
// obfuscated, original, ...; an odd count leaves one extra original. Every
// document needs an obfuscation.
absl::StatusOr<MixedSet> BuildMixedTrainingSet(const Corpus& split,
                                               const ObfuscationIndex& obf);

struct ScenarioResult {
  Scenario scenario = Scenario::kOriginalOnly;
  std::optional<AccuracyCount> accuracy;  // empty when skipped
  std::string skipped_reason;
  size_t train_size = 0;
  double validation_accuracy = 0.0;
};

// Trains one attacker per scenario with the same spec and evaluates each on
// the obfuscated test split. Validation for each attacker comes from the
// same distribution as its training data. Scenarios lacking obfuscated
// training data are returned as skipped with a reason.
absl::StatusOr<std::vector<ScenarioResult>> RunAttackScenarios(
    const CorpusSplit& split, const ObfuscationIndex& obf,
    const ClassifierSpec& spec, const ClassifierTrainer& trainer,
    std::span<const Scenario> scenarios = kAllScenarios);

enum class UtilityMode { kDirect, kRetrained };

// direct: trained on original train texts; retrained: on obfuscated train
// texts. Both use the original task labels and are tested on the obfuscated
// test split.
absl::StatusOr<AccuracyCount> UtilityEval(const CorpusSplit& split,
                                          const ObfuscationIndex& obf,
                                          const ClassifierSpec& spec,
                                          const ClassifierTrainer& trainer,
                                          UtilityMode mode);

// Scores a text's linguistic acceptability in [0, 1].
class AcceptabilityScorer {
 public:
  virtual ~AcceptabilityScorer() = default;
  virtual absl::StatusOr<double> Score(std::string_view text) const = 0;
};

struct ContentMetricProviders {
  const EmbeddingProvider* embedder = nullptr;        // embed_score
  const AcceptabilityScorer* acceptability = nullptr;  // acceptability
};

// rouge1/rouge2/rougeL (F-measure, averaged over pairs), bleu (corpus-level,
// add-one smoothing for n >= 2, brevity penalty), meteor_exact (exact-match
// alignment), and, when providers are given, embed_score and acceptability.
// All in [0, 100].
absl::StatusOr<std::map<std::string, double>> ContentMetrics(
    std::span<const std::pair<std::string, std::string>> pairs,
    const ContentMetricProviders& providers = {});

// Single-pair building blocks, in [0, 1].
double RougeN(std::span<const std::string> reference,
              std::span<const std::string> candidate, int n);
double RougeL(std::span<const std::string> reference,
              std::span<const std::string> candidate);
double MeteorExact(std::span<const std::string> reference,
                   std::span<const std::string> candidate);

struct EvaluationReport {
  std::string method;
  std::string dataset;
  std::vector<ScenarioResult> scenarios;
  std::optional<double> utility_direct;
  std::optional<double> utility_retrained;
  std::map<std::string, double> content_metrics;
  Json metadata = Json::object();
};

Json EvaluationReportToJson(const EvaluationReport& r);
absl::StatusOr<EvaluationReport> EvaluationReportFromJson(const Json& j);

// Method rows by dataset column groups of (Util. ↑, Attr. ↓), accuracies x100;
// attribution is the original-only attacker. A second table lists the content
// metrics.
std::string RenderMarkdown(std::span<const EvaluationReport> reports);

// "method,scenario,accuracy" rows for the three attack scenarios and the two
// utility modes (utility_direct, utility_retrained); skipped scenarios are
// omitted.
std::string RenderFigureCsv(std::span<const EvaluationReport> reports);

}  // namespace aotk

#endif  // AOTK_EVALHARNESS_H_
