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

#include "run_config.h"

#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "aotk/random.h"
#include "aotk/status.h"

namespace aotk::cli {
namespace {

// Reads typed members of one JSON object, recording problems instead of
// stopping at the first.
class Section {
 public:
  Section(const Json* j, std::string path, std::vector<std::string>* errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (j_ != nullptr && !j_->is_object()) {
      errors_->push_back(absl::StrCat(Where(""), ": expected an object"));
      j_ = nullptr;
    }
  }

  template <typename T>
  void Get(const char* key, T& out) {
    seen_.insert(key);
    if (j_ == nullptr || !j_->contains(key)) return;
    const Json& v = j_->at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return Bad(key, "expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return Bad(key, "expected an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && v.get<int64_t>() < 0 &&
          !v.is_number_unsigned()) {
        return Bad(key, "expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return Bad(key, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return Bad(key, "expected a string");
    } else {
      if (!v.is_array()) return Bad(key, "expected an array of strings");
      for (const Json& e : v) {
        if (!e.is_string()) return Bad(key, "expected an array of strings");
      }
    }
    out = v.get<T>();
  }

  Section Sub(const char* key) {
    seen_.insert(key);
    const Json* sub = j_ != nullptr && j_->contains(key) ? &j_->at(key) : nullptr;
    return Section(sub, Where(key), errors_);
  }

  void Bad(const std::string& key, std::string_view why) {
    errors_->push_back(absl::StrCat(Where(key), ": ", std::string(why)));
  }

  // Call after all Get/Sub calls.
  void RejectUnknown() {
    if (j_ == nullptr) return;
    for (const auto& [key, v] : j_->items()) {
      if (!seen_.count(key)) Bad(key, "unknown key");
    }
  }

  std::string Where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : absl::StrCat(path_, ".", key);
  }

 private:
  const Json* j_;
  std::string path_;
  std::vector<std::string>* errors_;
  std::set<std::string> seen_;
};

// Runs a module validator and keeps its messages, prefixed with `where`.
void Check(const absl::Status& s, std::string_view where,
           std::vector<std::string>* errors) {
  if (s.ok()) return;
  for (absl::string_view part : absl::StrSplit(s.message(), "; ")) {
    errors->push_back(absl::StrCat(std::string(where), ": ", std::string(part)));
  }
}

bool ValidProviderId(const std::string& id) {
  if (id == "synthetic:tf" || id == "synthetic:marker") return true;
  if (id.rfind("synthetic:hashed:", 0) == 0) {
    const std::string dim = id.substr(17);
    return !dim.empty() && dim.size() < 8 &&
           dim.find_first_not_of("0123456789") == std::string::npos &&
           std::stoul(dim) > 0;
  }
  return id.rfind("http:", 0) == 0 && id.size() > 5;
}

void ReadTrain(Section s, TrainConfig& cfg, std::vector<std::string>* errors) {
  s.Get("learning_rate", cfg.learning_rate);
  s.Get("batch_size", cfg.batch_size);
  s.Get("epochs", cfg.epochs);
  s.Get("beta", cfg.beta);
  s.RejectUnknown();
  Check(ValidateTrainConfig(cfg), s.Where(""), errors);
}

Json TrainJson(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"beta", c.beta}};
}

}  // namespace

absl::StatusOr<RunConfig> ParseRunConfig(const Json& j) {
  std::vector<std::string> errors;
  RunConfig cfg;
  Section root(&j, "", &errors);
  root.Get("run_id", cfg.run_id);
  root.Get("output_root", cfg.output_root);
  root.Get("seed", cfg.seed);
  root.Get("threads", cfg.threads);
  if (cfg.run_id.empty()) {
    errors.push_back("run_id: required");
  } else if (cfg.run_id.find_first_not_of(
                 "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
                 "0123456789._-") != std::string::npos ||
             cfg.run_id[0] == '.') {
    errors.push_back("run_id: only letters, digits, '.', '_' and '-' allowed");
  }
  if (cfg.threads < 1) errors.push_back("threads: must be >= 1");

  {
    DataConfig& d = cfg.data;
    Section s = root.Sub("data");
    s.Get("corpus", d.corpus);
    s.Get("format", d.format);
    s.Get("name", d.name);
    s.Get("authors", d.authors);
    s.Get("author_selection", d.author_selection);
    s.Get("train_frac", d.train_frac);
    s.Get("val_frac", d.val_frac);
    s.Get("test_frac", d.test_frac);
    s.Get("stratify", d.stratify);
    Section f = s.Sub("fields");
    f.Get("id", d.fields.id);
    f.Get("author_id", d.fields.author_id);
    f.Get("text", d.fields.text);
    f.Get("label", d.fields.label);
    f.Get("rating_to_sentiment", d.fields.rating_to_sentiment);
    f.RejectUnknown();
    Section g = s.Sub("synthetic");
    g.Get("authors", d.synthetic.authors);
    g.Get("docs_per_author", d.synthetic.docs_per_author);
    g.Get("content_words", d.synthetic.content_words);
    g.Get("filler_words", d.synthetic.filler_words);
    g.Get("style_strength", d.synthetic.style_strength);
    g.RejectUnknown();
    s.RejectUnknown();
    if (!ParseCorpusFormat(d.format).ok()) {
      errors.push_back("data.format: expected jsonl or csv");
    }
    if (!ParseAuthorSelection(d.author_selection).ok()) {
      errors.push_back(
          "data.author_selection: expected top_by_count or first_listed");
    }
    if (!ParseStratify(d.stratify).ok()) {
      errors.push_back("data.stratify: expected none, author or label");
    }
    SplitSpec spec{d.train_frac, d.val_frac, d.test_frac};
    Check(ValidateSplitSpec(spec), "data", &errors);
    if (d.corpus.empty()) {
      Check(ValidateSyntheticCorpusOptions(d.synthetic), "data.synthetic",
            &errors);
    } else if (!std::filesystem::exists(d.corpus)) {
      errors.push_back(absl::StrCat("data.corpus: ", d.corpus, " does not exist"));
    }
    d.synthetic.seed = DeriveSeed(cfg.seed, "synthetic");
  }

  {
    ProviderConfig& p = cfg.providers;
    Section s = root.Sub("providers");
    s.Get("utility", p.utility);
    s.Get("authorship", p.authorship);
    s.Get("attacker", p.attacker);
    s.Get("task_classifier", p.task_classifier);
    s.Get("content", p.content);
    s.Get("markers", p.markers);
    s.Get("endpoint", p.endpoint);
    s.Get("cache", p.cache);
    s.RejectUnknown();
    for (const auto& [key, id] :
         {std::pair{"utility", &p.utility}, std::pair{"authorship", &p.authorship},
          std::pair{"attacker", &p.attacker},
          std::pair{"task_classifier", &p.task_classifier},
          std::pair{"content", &p.content}}) {
      if (id->empty() && std::string(key) == "content") continue;
      if (!ValidProviderId(*id)) {
        errors.push_back(absl::StrCat("providers.", key, ": unknown provider '",
                                      *id, "'"));
      } else if (id->rfind("http:", 0) == 0 && p.endpoint.empty()) {
        errors.push_back(absl::StrCat("providers.", key,
                                      ": http providers need providers.endpoint"));
      }
    }
    if (p.utility == "synthetic:marker") {
      errors.push_back("providers.utility: the marker provider is authorship-only");
    }
    if (p.authorship == "synthetic:tf") {
      errors.push_back("providers.authorship: the tf provider is utility-only");
    }
    if (p.authorship == "synthetic:marker" && p.markers.empty() &&
        !cfg.data.corpus.empty()) {
      errors.push_back(
          "providers.markers: synthetic:marker on a real corpus needs a marker list");
    }
  }

  {
    Section s = root.Sub("reward");
    std::string ablation(AblationName(cfg.ablation));
    s.Get("ablation", ablation);
    s.RejectUnknown();
    auto a = ParseAblation(ablation);
    if (a.ok()) {
      cfg.ablation = *a;
    } else {
      errors.push_back("reward.ablation: expected full, no_privacy or no_utility");
    }
  }

  {
    Section s = root.Sub("preference");
    s.Get("eps_priv", cfg.preference.eps_priv);
    s.Get("eps_util", cfg.preference.eps_util);
    s.Get("samples_per_prompt", cfg.preference.samples_per_prompt);
    s.RejectUnknown();
    cfg.preference.seed = DeriveSeed(cfg.seed, "gen-prefs");
    Check(ValidatePreferenceConfig(cfg.preference), "preference", &errors);
  }

  {
    Section s = root.Sub("train");
    ReadTrain(s.Sub("dpo"), cfg.dpo, &errors);
    ReadTrain(s.Sub("ppo"), cfg.ppo, &errors);
    s.RejectUnknown();
    cfg.dpo.seed = DeriveSeed(cfg.seed, "train-dpo");
    cfg.ppo.seed = DeriveSeed(cfg.seed, "train-ppo");
  }

  {
    PolicyConfig& p = cfg.policy;
    Section s = root.Sub("policy");
    s.Get("init", p.init);
    s.Get("buckets", p.options.buckets);
    s.Get("keep_probability", p.options.keep_probability);
    s.Get("max_chunk_chars", p.max_chunk_chars);
    Section g = s.Sub("generation");
    g.Get("max_new_units", p.generation.max_new_units);
    g.Get("temperature", p.generation.temperature);
    g.Get("top_p", p.generation.top_p);
    g.RejectUnknown();
    s.RejectUnknown();
    Check(ValidateGenerationConfig(p.generation), "policy.generation", &errors);
    if (p.options.buckets < 1) errors.push_back("policy.buckets: must be >= 1");
    if (!(p.options.keep_probability > 0.0 && p.options.keep_probability < 1.0)) {
      errors.push_back("policy.keep_probability: must be in (0, 1)");
    }
    if (p.max_chunk_chars < 1) {
      errors.push_back("policy.max_chunk_chars: must be >= 1");
    }
    if (!p.init.empty() && !std::filesystem::exists(p.init)) {
      errors.push_back(absl::StrCat("policy.init: ", p.init, " does not exist"));
    }
  }

  {
    ObfuscationConfig& o = cfg.obfuscation;
    Section s = root.Sub("obfuscation");
    s.Get("method", o.method);
    s.Get("policy", o.policy);
    s.Get("synonyms", o.synonyms);
    s.Get("adjectives", o.adjectives);
    s.Get("word_fraction", o.word_fraction);
    s.Get("adjective_fraction", o.adjective_fraction);
    s.Get("chat_endpoint", o.chat_endpoint);
    s.Get("chat_model", o.chat_model);
    s.Get("splits", o.splits);
    s.RejectUnknown();
    static const std::set<std::string> kMethods = {
        "original", "synonyms", "llm_prompt", "marker_deletion", "policy"};
    if (!kMethods.count(o.method)) {
      errors.push_back(absl::StrCat(
          "obfuscation.method: unknown method '", o.method,
          "' (expected original, synonyms, llm_prompt, marker_deletion, policy)"));
    }
    if (o.method == "synonyms") {
      if (o.synonyms.empty()) {
        errors.push_back("obfuscation.synonyms: required for method synonyms");
      } else if (!std::filesystem::exists(o.synonyms)) {
        errors.push_back(
            absl::StrCat("obfuscation.synonyms: ", o.synonyms, " does not exist"));
      }
      if (!o.adjectives.empty() && !std::filesystem::exists(o.adjectives)) {
        errors.push_back(absl::StrCat("obfuscation.adjectives: ", o.adjectives,
                                      " does not exist"));
      }
    }
    if (o.method == "llm_prompt" && o.chat_endpoint.empty()) {
      errors.push_back("obfuscation.chat_endpoint: required for method llm_prompt");
    }
    if (o.method == "marker_deletion" && cfg.providers.markers.empty() &&
        !cfg.data.corpus.empty()) {
      errors.push_back(
          "providers.markers: marker_deletion on a real corpus needs a marker list");
    }
    if (o.method == "policy" && !o.policy.empty() && o.policy != "train-dpo" &&
        o.policy != "train-ppo" && !std::filesystem::exists(o.policy)) {
      errors.push_back(absl::StrCat("obfuscation.policy: ", o.policy,
                                    " is neither train-dpo, train-ppo nor a file"));
    }
    SynonymConfig syn;
    syn.word_fraction = o.word_fraction;
    syn.adjective_fraction = o.adjective_fraction;
    Check(ValidateSynonymConfig(syn), "obfuscation", &errors);
    if (o.splits.empty()) errors.push_back("obfuscation.splits: must not be empty");
    for (const std::string& split : o.splits) {
      if (split != "train" && split != "val" && split != "test") {
        errors.push_back(absl::StrCat("obfuscation.splits: unknown split '",
                                      split, "'"));
      }
    }
  }

  {
    EvaluationConfig& e = cfg.evaluation;
    Section s = root.Sub("evaluation");
    std::vector<std::string> names;
    for (Scenario sc : e.scenarios) names.emplace_back(ScenarioName(sc));
    s.Get("scenarios", names);
    s.Get("content_metrics", e.content_metrics);
    s.Get("classifier_backend", e.classifier_backend);
    s.Get("learning_rate", e.learning_rate);
    s.Get("batch_size", e.batch_size);
    s.Get("epochs", e.epochs);
    s.RejectUnknown();
    e.scenarios.clear();
    for (const std::string& n : names) {
      auto sc = ParseScenario(n);
      if (sc.ok()) {
        e.scenarios.push_back(*sc);
      } else {
        errors.push_back(absl::StrCat("evaluation.scenarios: unknown scenario '",
                                      n, "'"));
      }
    }
    ClassifierSpec spec;
    spec.backend_id = e.classifier_backend;
    spec.learning_rate = e.learning_rate;
    spec.batch_size = e.batch_size;
    spec.epochs = e.epochs;
    Check(ValidateClassifierSpec(spec), "evaluation", &errors);
    if (e.classifier_backend != "nearest-centroid") {
      errors.push_back(absl::StrCat("evaluation.classifier_backend: unsupported '",
                                    e.classifier_backend,
                                    "' (available: nearest-centroid)"));
    }
  }
  root.RejectUnknown();

  if (!errors.empty()) {
    return ConfigError(absl::StrCat("invalid config (", errors.size(),
                                    " problem(s)):\n  ",
                                    absl::StrJoin(errors, "\n  ")));
  }
  return cfg;
}

Json RunConfigToJson(const RunConfig& c) {
  const DataConfig& d = c.data;
  const ProviderConfig& p = c.providers;
  const ObfuscationConfig& o = c.obfuscation;
  const EvaluationConfig& e = c.evaluation;
  Json scenarios = Json::array();
  for (Scenario s : e.scenarios) scenarios.push_back(ScenarioName(s));
  return Json{
      {"run_id", c.run_id},
      {"output_root", c.output_root},
      {"seed", c.seed},
      {"threads", c.threads},
      {"data",
       {{"corpus", d.corpus},
        {"format", d.format},
        {"name", d.name},
        {"authors", d.authors},
        {"author_selection", d.author_selection},
        {"train_frac", d.train_frac},
        {"val_frac", d.val_frac},
        {"test_frac", d.test_frac},
        {"stratify", d.stratify},
        {"fields",
         {{"id", d.fields.id},
          {"author_id", d.fields.author_id},
          {"text", d.fields.text},
          {"label", d.fields.label},
          {"rating_to_sentiment", d.fields.rating_to_sentiment}}},
        {"synthetic",
         {{"authors", d.synthetic.authors},
          {"docs_per_author", d.synthetic.docs_per_author},
          {"content_words", d.synthetic.content_words},
          {"filler_words", d.synthetic.filler_words},
          {"style_strength", d.synthetic.style_strength}}}}},
      {"providers",
       {{"utility", p.utility},
        {"authorship", p.authorship},
        {"attacker", p.attacker},
        {"task_classifier", p.task_classifier},
        {"content", p.content},
        {"markers", p.markers},
        {"endpoint", p.endpoint},
        {"cache", p.cache}}},
      {"reward", {{"ablation", AblationName(c.ablation)}}},
      {"preference",
       {{"eps_priv", c.preference.eps_priv},
        {"eps_util", c.preference.eps_util},
        {"samples_per_prompt", c.preference.samples_per_prompt}}},
      {"train", {{"dpo", TrainJson(c.dpo)}, {"ppo", TrainJson(c.ppo)}}},
      {"policy",
       {{"init", c.policy.init},
        {"buckets", c.policy.options.buckets},
        {"keep_probability", c.policy.options.keep_probability},
        {"max_chunk_chars", c.policy.max_chunk_chars},
        {"generation",
         {{"max_new_units", c.policy.generation.max_new_units},
          {"temperature", c.policy.generation.temperature},
          {"top_p", c.policy.generation.top_p}}}}},
      {"obfuscation",
       {{"method", o.method},
        {"policy", o.policy},
        {"synonyms", o.synonyms},
        {"adjectives", o.adjectives},
        {"word_fraction", o.word_fraction},
        {"adjective_fraction", o.adjective_fraction},
        {"chat_endpoint", o.chat_endpoint},
        {"chat_model", o.chat_model},
        {"splits", o.splits}}},
      {"evaluation",
       {{"scenarios", scenarios},
        {"content_metrics", e.content_metrics},
        {"classifier_backend", e.classifier_backend},
        {"learning_rate", e.learning_rate},
        {"batch_size", e.batch_size},
        {"epochs", e.epochs}}}};
}

absl::Status SetConfigValue(Json& config, std::string_view dotted_key,
                            std::string_view value) {
  if (dotted_key.empty()) return ConfigError("empty config key");
  if (!config.is_object()) return ConfigError("config is not an object");
  Json* node = &config;
  std::vector<std::string> parts = absl::StrSplit(std::string(dotted_key), '.');
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    Json& next = (*node)[parts[i]];
    if (next.is_null()) next = Json::object();
    if (!next.is_object()) {
      return ConfigError(absl::StrCat(std::string(dotted_key), ": '", parts[i],
                                      "' is not an object"));
    }
    node = &next;
  }
  Json parsed = Json::parse(value.begin(), value.end(), nullptr, false);
  (*node)[parts.back()] =
      parsed.is_discarded() ? Json(std::string(value)) : std::move(parsed);
  return absl::OkStatus();
}

}  // namespace aotk::cli
