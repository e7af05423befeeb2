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

#include "aotk/evalharness.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "aotk/status.h"
#include "aotk/text.h"

namespace aotk {
namespace {

std::vector<double> Unit(const EmbeddingVector& v) {
  std::vector<double> out(v.values().begin(), v.values().end());
  double n = 0.0;
  for (double x : out) n += x * x;
  n = std::sqrt(n);
  if (n > 0.0) {
    for (double& x : out) x /= n;
  }
  return out;
}

class NearestCentroid : public Classifier {
 public:
  NearestCentroid(std::shared_ptr<const EmbeddingProvider> embedder,
                  std::map<std::string, std::vector<double>> centroids)
      : embedder_(std::move(embedder)), centroids_(std::move(centroids)) {
    for (const auto& [label, c] : centroids_) labels_.insert(label);
  }

  const std::set<std::string>& labels() const override { return labels_; }
  double validation_accuracy() const override { return val_accuracy_; }
  void set_validation_accuracy(double a) { val_accuracy_ = a; }

  absl::StatusOr<std::vector<std::string>> Predict(
      std::span<const std::string> texts) const override {
    std::vector<std::string> out;
    if (texts.empty()) return out;
    AOTK_ASSIGN_OR_RETURN(std::vector<EmbeddingVector> emb,
                          embedder_->Embed(texts));
    out.reserve(texts.size());
    for (const EmbeddingVector& e : emb) {
      const std::vector<double> x = Unit(e);
      const std::string* best = nullptr;
      double best_score = 0.0;
      // Labels iterate in sorted order, so a strict comparison resolves ties
      // toward the first label.
      for (const auto& [label, c] : centroids_) {
        double s = 0.0;
        for (size_t d = 0; d < x.size(); ++d) s += x[d] * c[d];
        if (best == nullptr || s > best_score) {
          best = &label;
          best_score = s;
        }
      }
      out.push_back(*best);
    }
    return out;
  }

 private:
  std::shared_ptr<const EmbeddingProvider> embedder_;
  std::map<std::string, std::vector<double>> centroids_;
  std::set<std::string> labels_;
  double val_accuracy_ = 0.0;
};

std::vector<std::string> Texts(std::span<const LabeledText> items) {
  std::vector<std::string> t;
  t.reserve(items.size());
  for (const LabeledText& i : items) t.push_back(i.text);
  return t;
}

absl::StatusOr<const ObfuscationResult*> Lookup(const ObfuscationIndex& obf,
                                                const Document& doc) {
  auto it = obf.find(doc.id);
  if (it == obf.end()) {
    return DataError(absl::StrCat("no obfuscation for document ", doc.id));
  }
  return &it->second;
}

size_t MissingCount(const Corpus& c, const ObfuscationIndex& obf) {
  size_t n = 0;
  for (const Document& d : c.documents()) n += obf.count(d.id) ? 0 : 1;
  return n;
}

std::vector<LabeledText> ByAuthor(const Corpus& c) {
  std::vector<LabeledText> out;
  for (const Document& d : c.documents()) out.push_back({d.text, d.author_id});
  return out;
}

absl::StatusOr<std::vector<LabeledText>> ObfuscatedByAuthor(
    const Corpus& c, const ObfuscationIndex& obf) {
  std::vector<LabeledText> out;
  for (const Document& d : c.documents()) {
    AOTK_ASSIGN_OR_RETURN(const ObfuscationResult* r, Lookup(obf, d));
    out.push_back({r->obfuscated_text, d.author_id});
  }
  return out;
}

absl::StatusOr<std::string> TaskLabel(const Document& d) {
  if (!d.task_label) {
    return DataError(absl::StrCat("document ", d.id, " has no task label"));
  }
  return *d.task_label;
}

absl::StatusOr<std::vector<LabeledText>> ByTaskLabel(
    const Corpus& c, const ObfuscationIndex* obf) {
  std::vector<LabeledText> out;
  for (const Document& d : c.documents()) {
    AOTK_ASSIGN_OR_RETURN(std::string label, TaskLabel(d));
    std::string text = d.text;
    if (obf != nullptr) {
      AOTK_ASSIGN_OR_RETURN(const ObfuscationResult* r, Lookup(*obf, d));
      text = r->obfuscated_text;
    }
    out.push_back({std::move(text), std::move(label)});
  }
  return out;
}

// --- n-gram helpers ---

std::map<std::vector<std::string>, size_t> NGrams(
    std::span<const std::string> toks, int n) {
  std::map<std::vector<std::string>, size_t> out;
  if (static_cast<int>(toks.size()) < n) return out;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    ++out[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  }
  return out;
}

// (clipped matches, candidate n-gram total)
std::pair<size_t, size_t> ClippedMatches(std::span<const std::string> ref,
                                         std::span<const std::string> cand,
                                         int n) {
  const auto r = NGrams(ref, n);
  const auto c = NGrams(cand, n);
  size_t match = 0, total = 0;
  for (const auto& [g, k] : c) {
    total += k;
    auto it = r.find(g);
    if (it != r.end()) match += std::min(k, it->second);
  }
  return {match, total};
}

double FMeasure(double overlap, double cand_total, double ref_total) {
  if (cand_total == 0 || ref_total == 0 || overlap == 0) return 0.0;
  const double p = overlap / cand_total;
  const double r = overlap / ref_total;
  return 2 * p * r / (p + r);
}

size_t Lcs(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string Pct(std::optional<double> v) {
  return v ? absl::StrFormat("%.2f", *v * 100.0) : std::string("-");
}

Json AccuracyJson(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

absl::Status ValidateClassifierSpec(const ClassifierSpec& spec) {
  std::vector<std::string> bad;
  if (spec.epochs < 1) {
    bad.push_back(absl::StrCat("epochs must be >= 1, got ", spec.epochs));
  }
  if (spec.batch_size < 1) {
    bad.push_back(
        absl::StrCat("batch_size must be >= 1, got ", spec.batch_size));
  }
  if (!(spec.learning_rate > 0.0)) {
    bad.push_back(
        absl::StrCat("learning_rate must be > 0, got ", spec.learning_rate));
  }
  if (spec.backend_id.empty()) bad.push_back("backend_id is empty");
  if (bad.empty()) return absl::OkStatus();
  std::string msg = bad[0];
  for (size_t i = 1; i < bad.size(); ++i) absl::StrAppend(&msg, "; ", bad[i]);
  return ConfigError(msg);
}

absl::StatusOr<std::unique_ptr<Classifier>> NearestCentroidTrainer::Train(
    const ClassifierSpec& spec, std::span<const LabeledText> train,
    std::span<const LabeledText> val) const {
  AOTK_RETURN_IF_ERROR(ValidateClassifierSpec(spec));
  if (embedder_ == nullptr) return ConfigError("classifier has no embedder");
  std::set<std::string> classes;
  for (const LabeledText& t : train) classes.insert(t.label);
  if (classes.size() < 2) {
    return DataError(absl::StrCat("training set has ", classes.size(),
                                  " class(es); need at least 2"));
  }
  if (val.empty()) return DataError("validation set is empty");

  const std::vector<std::string> texts = Texts(train);
  AOTK_ASSIGN_OR_RETURN(std::vector<EmbeddingVector> emb,
                        embedder_->Embed(texts));
  std::map<std::string, std::vector<double>> centroids;
  for (size_t i = 0; i < train.size(); ++i) {
    std::vector<double>& c = centroids[train[i].label];
    c.resize(embedder_->dim(), 0.0);
    const std::vector<double> u = Unit(emb[i]);
    for (size_t d = 0; d < u.size(); ++d) c[d] += u[d];
  }
  for (auto& [label, c] : centroids) {
    double n = 0.0;
    for (double x : c) n += x * x;
    n = std::sqrt(n);
    if (n > 0.0) {
      for (double& x : c) x /= n;
    }
  }
  auto model = std::make_unique<NearestCentroid>(embedder_, std::move(centroids));
  AOTK_ASSIGN_OR_RETURN(std::vector<std::string> pred,
                        model->Predict(Texts(val)));
  size_t correct = 0;
  for (size_t i = 0; i < val.size(); ++i) correct += pred[i] == val[i].label;
  model->set_validation_accuracy(static_cast<double>(correct) /
                                 static_cast<double>(val.size()));
  return std::unique_ptr<Classifier>(std::move(model));
}

absl::StatusOr<AccuracyCount> ClassifierAccuracy(
    const Classifier& classifier, std::span<const LabeledText> test) {
  if (test.empty()) return ArgumentError("accuracy on an empty test set");
  for (const LabeledText& t : test) {
    if (!classifier.labels().count(t.label)) {
      return DataError(absl::StrCat("test label '", t.label,
                                    "' is outside the classifier's labels"));
    }
  }
  AOTK_ASSIGN_OR_RETURN(std::vector<std::string> pred,
                        classifier.Predict(Texts(test)));
  if (pred.size() != test.size()) {
    return BackendError("classifier returned the wrong number of predictions");
  }
  AccuracyCount count;
  count.total = test.size();
  for (size_t i = 0; i < test.size(); ++i) {
    if (pred[i] == test[i].label) ++count.correct;
  }
  // Second, independent pass over the stored predictions.
  size_t recount = 0;
  size_t seen = 0;
  for (const LabeledText& t : test) {
    recount += pred[seen++].compare(t.label) == 0 ? 1 : 0;
  }
  if (recount != count.correct || seen != count.total ||
      count.correct > count.total) {
    return BackendError("accuracy recount mismatch");
  }
  return count;
}

absl::StatusOr<AccuracyCount> AttackAccuracy(
    const Classifier& attacker, std::span<const ObfuscationResult> test) {
  std::vector<LabeledText> items;
  items.reserve(test.size());
  for (const ObfuscationResult& r : test) {
    items.push_back({r.obfuscated_text, r.author_id});
  }
  return ClassifierAccuracy(attacker, items);
}

std::string_view ScenarioName(Scenario s) {
  switch (s) {
    case Scenario::kOriginalOnly:
      return "original_only";
    case Scenario::kMixed5050:
      return "mixed_50_50";
    case Scenario::kObfuscatedOnly:
      return "obfuscated_only";
  }
  return "original_only";
}

absl::StatusOr<Scenario> ParseScenario(std::string_view name) {
  for (Scenario s : kAllScenarios) {
    if (name == ScenarioName(s)) return s;
  }
  return ConfigError(absl::StrCat(
      "unknown scenario '", std::string(name),
      "' (expected original_only, mixed_50_50, obfuscated_only)"));
}

ObfuscationIndex IndexObfuscations(std::span<const ObfuscationResult> results) {
  ObfuscationIndex index;
  for (const ObfuscationResult& r : results) index.emplace(r.document_id, r);
  return index;
}

absl::StatusOr<MixedSet> BuildMixedTrainingSet(const Corpus& split,
                                               const ObfuscationIndex& obf) {
  MixedSet set;
  std::map<std::string, size_t> seen;
  for (const Document& d : split.documents()) {
    AOTK_ASSIGN_OR_RETURN(const ObfuscationResult* r, Lookup(obf, d));
    const bool original = seen[d.author_id]++ % 2 == 0;
    auto& [n_orig, n_obf] = set.per_author[d.author_id];
    if (original) {
      set.texts.push_back({d.text, d.author_id});
      ++n_orig;
      ++set.originals;
    } else {
      set.texts.push_back({r->obfuscated_text, d.author_id});
      ++n_obf;
      ++set.obfuscated;
    }
  }
  return set;
}

absl::StatusOr<std::vector<ScenarioResult>> RunAttackScenarios(
    const CorpusSplit& split, const ObfuscationIndex& obf,
    const ClassifierSpec& spec, const ClassifierTrainer& trainer,
    std::span<const Scenario> scenarios) {
  if (spec.task != ClassifierTask::kAttribution) {
    return ConfigError("attack scenarios need an attribution classifier spec");
  }
  AOTK_ASSIGN_OR_RETURN(std::vector<LabeledText> test,
                        ObfuscatedByAuthor(split.test, obf));
  std::vector<ScenarioResult> out;
  for (Scenario s : scenarios) {
    ScenarioResult result;
    result.scenario = s;
    std::vector<LabeledText> train, val;
    if (s == Scenario::kOriginalOnly) {
      train = ByAuthor(split.train);
      val = ByAuthor(split.val);
    } else {
      const size_t missing_train = MissingCount(split.train, obf);
      const size_t missing_val = MissingCount(split.val, obf);
      if (missing_train + missing_val > 0) {
        result.skipped_reason = absl::StrCat(
            "insufficient obfuscated training data: ", missing_train, " of ",
            split.train.size(), " train and ", missing_val, " of ",
            split.val.size(), " validation documents have no obfuscation");
        out.push_back(std::move(result));
        continue;
      }
      if (s == Scenario::kMixed5050) {
        AOTK_ASSIGN_OR_RETURN(MixedSet tr, BuildMixedTrainingSet(split.train, obf));
        AOTK_ASSIGN_OR_RETURN(MixedSet va, BuildMixedTrainingSet(split.val, obf));
        train = std::move(tr.texts);
        val = std::move(va.texts);
      } else {
        AOTK_ASSIGN_OR_RETURN(train, ObfuscatedByAuthor(split.train, obf));
        AOTK_ASSIGN_OR_RETURN(val, ObfuscatedByAuthor(split.val, obf));
      }
    }
    auto attacker = trainer.Train(spec, train, val);
    if (!attacker.ok()) {
      return Annotate(attacker.status(),
                      absl::StrCat("training ", std::string(ScenarioName(s)), " attacker"));
    }
    AOTK_ASSIGN_OR_RETURN(AccuracyCount acc, ClassifierAccuracy(**attacker, test));
    result.accuracy = acc;
    result.train_size = train.size();
    result.validation_accuracy = (*attacker)->validation_accuracy();
    out.push_back(std::move(result));
  }
  return out;
}

absl::StatusOr<AccuracyCount> UtilityEval(const CorpusSplit& split,
                                          const ObfuscationIndex& obf,
                                          const ClassifierSpec& spec,
                                          const ClassifierTrainer& trainer,
                                          UtilityMode mode) {
  if (spec.task != ClassifierTask::kUtility) {
    return ConfigError("utility evaluation needs a utility classifier spec");
  }
  const ObfuscationIndex* train_src =
      mode == UtilityMode::kRetrained ? &obf : nullptr;
  AOTK_ASSIGN_OR_RETURN(std::vector<LabeledText> train,
                        ByTaskLabel(split.train, train_src));
  AOTK_ASSIGN_OR_RETURN(std::vector<LabeledText> val,
                        ByTaskLabel(split.val, train_src));
  AOTK_ASSIGN_OR_RETURN(std::vector<LabeledText> test,
                        ByTaskLabel(split.test, &obf));
  AOTK_ASSIGN_OR_RETURN(std::unique_ptr<Classifier> clf,
                        trainer.Train(spec, train, val));
  return ClassifierAccuracy(*clf, test);
}

double RougeN(std::span<const std::string> reference,
              std::span<const std::string> candidate, int n) {
  const auto [match, cand_total] = ClippedMatches(reference, candidate, n);
  const size_t ref_total =
      reference.size() >= static_cast<size_t>(n) ? reference.size() - n + 1 : 0;
  if (cand_total == 0 && ref_total == 0) {
    // Too short for any n-gram: score by exact equality.
    return std::equal(reference.begin(), reference.end(), candidate.begin(),
                      candidate.end())
               ? 1.0
               : 0.0;
  }
  return FMeasure(static_cast<double>(match), static_cast<double>(cand_total),
                  static_cast<double>(ref_total));
}

double RougeL(std::span<const std::string> reference,
              std::span<const std::string> candidate) {
  if (reference.empty() && candidate.empty()) return 1.0;
  return FMeasure(static_cast<double>(Lcs(reference, candidate)),
                  static_cast<double>(candidate.size()),
                  static_cast<double>(reference.size()));
}

double MeteorExact(std::span<const std::string> reference,
                   std::span<const std::string> candidate) {
  constexpr double kAlpha = 0.9, kBeta = 3.0, kGamma = 0.5;
  // Hypothesis words from the back each take the last unmatched equal
  // reference word.
  std::vector<bool> used(reference.size(), false);
  std::vector<std::pair<size_t, size_t>> matches;  // (candidate, reference)
  for (size_t i = candidate.size(); i-- > 0;) {
    for (size_t j = reference.size(); j-- > 0;) {
      if (!used[j] && candidate[i] == reference[j]) {
        used[j] = true;
        matches.emplace_back(i, j);
        break;
      }
    }
  }
  if (matches.empty()) return 0.0;
  std::sort(matches.begin(), matches.end());
  size_t chunks = 1;
  for (size_t k = 0; k + 1 < matches.size(); ++k) {
    if (!(matches[k + 1].first == matches[k].first + 1 &&
          matches[k + 1].second == matches[k].second + 1)) {
      ++chunks;
    }
  }
  const double m = static_cast<double>(matches.size());
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double fmean = p * r / (kAlpha * p + (1 - kAlpha) * r);
  const double penalty = kGamma * std::pow(static_cast<double>(chunks) / m, kBeta);
  return fmean * (1 - penalty);
}

absl::StatusOr<std::map<std::string, double>> ContentMetrics(
    std::span<const std::pair<std::string, std::string>> pairs,
    const ContentMetricProviders& providers) {
  if (pairs.empty()) return ArgumentError("content metrics of no pairs");
  double r1 = 0, r2 = 0, rl = 0, meteor = 0;
  size_t match[5] = {0}, total[5] = {0};
  size_t ref_len = 0, cand_len = 0;
  for (const auto& [orig, obf] : pairs) {
    const std::vector<std::string> ref = NormalizedTokens(orig);
    const std::vector<std::string> cand = NormalizedTokens(obf);
    r1 += RougeN(ref, cand, 1);
    r2 += RougeN(ref, cand, 2);
    rl += RougeL(ref, cand);
    meteor += MeteorExact(ref, cand);
    for (int n = 1; n <= 4; ++n) {
      const auto [m, t] = ClippedMatches(ref, cand, n);
      match[n] += m;
      total[n] += t;
    }
    ref_len += ref.size();
    cand_len += cand.size();
  }
  const double k = static_cast<double>(pairs.size());

  double bleu = 0.0;
  if (cand_len > 0 && total[1] > 0 && match[1] > 0) {
    double log_p = std::log(static_cast<double>(match[1]) /
                            static_cast<double>(total[1]));
    for (int n = 2; n <= 4; ++n) {
      log_p += std::log((static_cast<double>(match[n]) + 1.0) /
                        (static_cast<double>(total[n]) + 1.0));
    }
    const double bp =
        cand_len > ref_len
            ? 1.0
            : std::exp(1.0 - static_cast<double>(ref_len) /
                                 static_cast<double>(cand_len));
    bleu = bp * std::exp(log_p / 4.0);
  }

  std::map<std::string, double> out = {
      {"rouge1", 100.0 * r1 / k},         {"rouge2", 100.0 * r2 / k},
      {"rougeL", 100.0 * rl / k},         {"bleu", 100.0 * bleu},
      {"meteor_exact", 100.0 * meteor / k}};

  if (providers.embedder != nullptr) {
    double sum = 0.0;
    for (const auto& [orig, obf] : pairs) {
      const std::string texts[] = {orig, obf};
      AOTK_ASSIGN_OR_RETURN(std::vector<EmbeddingVector> v,
                            providers.embedder->Embed(texts));
      AOTK_ASSIGN_OR_RETURN(double c, CosineSimilarity(v[0], v[1]));
      sum += c;
    }
    out["embed_score"] = 100.0 * sum / k;
  }
  if (providers.acceptability != nullptr) {
    double sum = 0.0;
    for (const auto& [orig, obf] : pairs) {
      AOTK_ASSIGN_OR_RETURN(double s, providers.acceptability->Score(obf));
      if (!(s >= 0.0 && s <= 1.0)) {
        return BackendError(
            absl::StrCat("acceptability score ", s, " outside [0, 1]"));
      }
      sum += s;
    }
    out["acceptability"] = 100.0 * sum / k;
  }
  return out;
}

Json EvaluationReportToJson(const EvaluationReport& r) {
  Json scenarios = Json::array();
  for (const ScenarioResult& s : r.scenarios) {
    Json j = {{"scenario", ScenarioName(s.scenario)}};
    if (s.accuracy) {
      j["accuracy"] = s.accuracy->accuracy();
      j["correct"] = s.accuracy->correct;
      j["total"] = s.accuracy->total;
      j["train_size"] = s.train_size;
      j["validation_accuracy"] = s.validation_accuracy;
    } else {
      j["accuracy"] = nullptr;
      j["skipped"] = s.skipped_reason;
    }
    scenarios.push_back(std::move(j));
  }
  return Json{{"method", r.method},
              {"dataset", r.dataset},
              {"attack_scenarios", scenarios},
              {"utility_accuracy_direct", AccuracyJson(r.utility_direct)},
              {"utility_accuracy_retrained", AccuracyJson(r.utility_retrained)},
              {"content_metrics", r.content_metrics},
              {"metadata", r.metadata}};
}

absl::StatusOr<EvaluationReport> EvaluationReportFromJson(const Json& j) {
  if (!j.is_object()) return DataError("evaluation report is not an object");
  EvaluationReport r;
  try {
    r.method = j.at("method").get<std::string>();
    r.dataset = j.value("dataset", "");
    for (const Json& s : j.at("attack_scenarios")) {
      ScenarioResult sr;
      AOTK_ASSIGN_OR_RETURN(sr.scenario,
                            ParseScenario(s.at("scenario").get<std::string>()));
      if (s.at("accuracy").is_null()) {
        sr.skipped_reason = s.value("skipped", "");
      } else {
        sr.accuracy = AccuracyCount{s.at("correct").get<size_t>(),
                                    s.at("total").get<size_t>()};
        sr.train_size = s.value("train_size", size_t{0});
        sr.validation_accuracy = s.value("validation_accuracy", 0.0);
      }
      r.scenarios.push_back(std::move(sr));
    }
    for (const char* key :
         {"utility_accuracy_direct", "utility_accuracy_retrained"}) {
      const Json& v = j.at(key);
      std::optional<double> val;
      if (!v.is_null()) val = v.get<double>();
      if (std::string(key) == "utility_accuracy_direct") {
        r.utility_direct = val;
      } else {
        r.utility_retrained = val;
      }
    }
    r.content_metrics =
        j.value("content_metrics", std::map<std::string, double>{});
    r.metadata = j.value("metadata", Json::object());
  } catch (const Json::exception& e) {
    return DataError(absl::StrCat("malformed evaluation report: ", e.what()));
  }
  return r;
}

std::string RenderMarkdown(std::span<const EvaluationReport> reports) {
  std::vector<std::string> datasets, methods;
  std::map<std::pair<std::string, std::string>, const EvaluationReport*> cell;
  for (const EvaluationReport& r : reports) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
      datasets.push_back(r.dataset);
    }
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
    cell[{r.method, r.dataset}] = &r;
  }
  std::ostringstream md;
  md << "| Method |";
  for (const std::string& d : datasets) {
    const std::string label = d.empty() ? "" : d + " ";
    md << " " << label << "Util. ↑ | " << label << "Attr. ↓ |";
  }
  md << "\n|---|";
  for (size_t i = 0; i < datasets.size(); ++i) md << "---:|---:|";
  md << "\n";
  for (const std::string& m : methods) {
    md << "| " << m << " |";
    for (const std::string& d : datasets) {
      auto it = cell.find({m, d});
      std::optional<double> util, attr;
      if (it != cell.end()) {
        util = it->second->utility_direct;
        for (const ScenarioResult& s : it->second->scenarios) {
          if (s.scenario == Scenario::kOriginalOnly && s.accuracy) {
            attr = s.accuracy->accuracy();
          }
        }
      }
      md << " " << Pct(util) << " | " << Pct(attr) << " |";
    }
    md << "\n";
  }

  static constexpr const char* kMetrics[] = {
      "rouge1", "rouge2", "rougeL", "bleu", "meteor_exact", "embed_score",
      "acceptability"};
  bool any = false;
  for (const EvaluationReport& r : reports) any = any || !r.content_metrics.empty();
  if (any) {
    md << "\n| Method |";
    for (const char* k : kMetrics) md << " " << k << " |";
    md << "\n|---|";
    for (size_t i = 0; i < std::size(kMetrics); ++i) md << "---:|";
    md << "\n";
    for (const EvaluationReport& r : reports) {
      if (r.content_metrics.empty()) continue;
      md << "| " << r.method;
      if (datasets.size() > 1) md << " (" << r.dataset << ")";
      md << " |";
      for (const char* k : kMetrics) {
        auto it = r.content_metrics.find(k);
        md << " "
           << (it == r.content_metrics.end()
                   ? std::string("-")
                   : absl::StrFormat("%.2f", it->second))
           << " |";
      }
      md << "\n";
    }
  }
  return md.str();
}

std::string RenderFigureCsv(std::span<const EvaluationReport> reports) {
  std::ostringstream csv;
  csv << "method,scenario,accuracy\n";
  auto row = [&](const std::string& method, std::string_view scenario,
                 double acc) {
    csv << method << "," << scenario << "," << absl::StrFormat("%.6f", acc)
        << "\n";
  };
  for (const EvaluationReport& r : reports) {
    for (const ScenarioResult& s : r.scenarios) {
      if (s.accuracy) row(r.method, ScenarioName(s.scenario), s.accuracy->accuracy());
    }
    if (r.utility_direct) row(r.method, "utility_direct", *r.utility_direct);
    if (r.utility_retrained) {
      row(r.method, "utility_retrained", *r.utility_retrained);
    }
  }
  return csv.str();
}

}  // namespace aotk
