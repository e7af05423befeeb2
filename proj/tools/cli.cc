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

#include "cli.h"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <set>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "aotk/corpus.h"
#include "aotk/embeddings.h"
#include "aotk/evalharness.h"
#include "aotk/obfuscate.h"
#include "aotk/po_align.h"
#include "aotk/policy.h"
#include "aotk/preference.h"
#include "aotk/random.h"
#include "aotk/rewards.h"
#include "aotk/status.h"
#include "aotk/synthetic.h"
#include "aotk/text.h"
#include "run_config.h"
#include "run_dir.h"

namespace aotk::cli {
namespace fs = std::filesystem;
namespace {

// Sections that may differ between invocations of the same run; they are
// recorded per step instead of in the run-wide snapshot.
const std::vector<std::string> kStepLocalKeys = {"threads", "obfuscation",
                                                 "evaluation"};

struct Flags {
  std::string config_path;
  std::string run_id;
  std::string output_root;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  std::string corpus;
  std::vector<std::string> sets;
  // obfuscate
  std::string method;
  std::string policy;
  // evaluate
  std::string obfuscated;
};

struct Context {
  RunConfig cfg;
  Json config;
  RunDirectory* run = nullptr;
  std::ostream* out = nullptr;
  std::optional<Corpus> corpus;
  std::optional<CorpusSplit> split;
  std::string dataset;
};

absl::StatusOr<Json> BuildConfigJson(const Flags& f) {
  Json j = Json::object();
  if (!f.config_path.empty()) {
    AOTK_ASSIGN_OR_RETURN(std::string text, ReadFile(f.config_path));
    j = Json::parse(text, nullptr, false, /*ignore_comments=*/true);
    if (j.is_discarded() || !j.is_object()) {
      return ConfigError(absl::StrCat(f.config_path, ": not a JSON object"));
    }
  }
  // Flags win over the file.
  for (const std::string& s : f.sets) {
    const size_t eq = s.find('=');
    if (eq == std::string::npos) {
      return ConfigError(absl::StrCat("--set expects key=value, got '", s, "'"));
    }
    AOTK_RETURN_IF_ERROR(SetConfigValue(j, s.substr(0, eq), s.substr(eq + 1)));
  }
  if (!f.run_id.empty()) j["run_id"] = f.run_id;
  if (!f.output_root.empty()) j["output_root"] = f.output_root;
  if (f.seed) j["seed"] = *f.seed;
  if (f.threads) j["threads"] = *f.threads;
  if (!f.corpus.empty()) j["data"]["corpus"] = f.corpus;
  if (!f.method.empty()) j["obfuscation"]["method"] = f.method;
  if (!f.policy.empty()) j["obfuscation"]["policy"] = f.policy;
  return j;
}

absl::Status LoadData(Context& ctx, bool need_split) {
  const DataConfig& d = ctx.cfg.data;
  std::optional<Corpus> corpus;
  if (d.corpus.empty()) {
    AOTK_ASSIGN_OR_RETURN(corpus, GenerateSyntheticCorpus(d.synthetic));
    ctx.dataset = d.name.empty() ? "synthetic" : d.name;
  } else {
    AOTK_ASSIGN_OR_RETURN(CorpusFormat format, ParseCorpusFormat(d.format));
    LoadOptions opts;
    opts.fields = d.fields;
    AOTK_ASSIGN_OR_RETURN(LoadedCorpus loaded, LoadCorpus(d.corpus, format, opts));
    corpus = std::move(loaded.corpus);
    ctx.dataset = d.name.empty() ? fs::path(d.corpus).stem().string() : d.name;
  }
  if (d.authors > 0) {
    AOTK_ASSIGN_OR_RETURN(AuthorSelection sel,
                          ParseAuthorSelection(d.author_selection));
    AOTK_ASSIGN_OR_RETURN(corpus, SubsetAuthors(*corpus, d.authors, sel));
  }
  if (!need_split) {
    ctx.corpus = std::move(corpus);
    return absl::OkStatus();
  }
  SplitSpec spec{d.train_frac, d.val_frac, d.test_frac,
                 DeriveSeed(ctx.cfg.seed, "split")};
  AOTK_ASSIGN_OR_RETURN(spec.stratify_by, ParseStratify(d.stratify));
  AOTK_ASSIGN_OR_RETURN(ctx.split, Split(*corpus, spec));
  ctx.corpus = std::move(corpus);
  return absl::OkStatus();
}

std::vector<std::string> Markers(const Context& ctx) {
  if (!ctx.cfg.providers.markers.empty()) return ctx.cfg.providers.markers;
  return SyntheticMarkers(ctx.cfg.data.synthetic.authors);
}

std::string SafeName(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') {
      c = '_';
    }
  }
  return s;
}

absl::StatusOr<std::shared_ptr<const EmbeddingProvider>> MakeProvider(
    const Context& ctx, const std::string& id, EmbeddingRole role) {
  std::shared_ptr<const EmbeddingProvider> p;
  if (id == "synthetic:tf") {
    if (role != EmbeddingRole::kUtility) {
      return ConfigError("synthetic:tf can only serve the utility role");
    }
    std::vector<std::string> texts;
    for (const Document& d : ctx.corpus->documents()) texts.push_back(d.text);
    AOTK_ASSIGN_OR_RETURN(p, TermFrequencyProvider::Create(BuildVocabulary(texts)));
  } else if (id == "synthetic:marker") {
    if (role != EmbeddingRole::kAuthorship) {
      return ConfigError("synthetic:marker can only serve the authorship role");
    }
    AOTK_ASSIGN_OR_RETURN(p, MarkerProvider::Create(Markers(ctx)));
  } else if (id.rfind("synthetic:hashed:", 0) == 0) {
    AOTK_ASSIGN_OR_RETURN(
        p, HashedTermProvider::Create(role, std::stoul(id.substr(17))));
  } else if (id.rfind("http:", 0) == 0) {
    HttpEmbeddingProvider::Options opts;
    opts.endpoint = ctx.cfg.providers.endpoint;
    if (const char* key = std::getenv("AOTK_EMBEDDING_API_KEY")) {
      opts.api_key = key;
    }
    AOTK_ASSIGN_OR_RETURN(p, HttpEmbeddingProvider::Create(role, id.substr(5), opts));
    if (ctx.cfg.providers.cache) {
      const fs::path cache = *ctx.run / "cache";
      fs::create_directories(cache);
      AOTK_ASSIGN_OR_RETURN(
          p, CachingEmbeddingProvider::Create(
                 p, cache / (SafeName(id.substr(5)) + ".jsonl")));
    }
  } else {
    return ConfigError(absl::StrCat("unknown provider '", id, "'"));
  }
  return p;
}

struct Scoring {
  std::shared_ptr<const EmbeddingProvider> utility, authorship;
  std::optional<RewardScorer> scorer;
};

absl::StatusOr<Scoring> MakeScorer(const Context& ctx) {
  Scoring s;
  AOTK_ASSIGN_OR_RETURN(s.utility, MakeProvider(ctx, ctx.cfg.providers.utility,
                                                EmbeddingRole::kUtility));
  AOTK_ASSIGN_OR_RETURN(
      s.authorship, MakeProvider(ctx, ctx.cfg.providers.authorship,
                                 EmbeddingRole::kAuthorship));
  RewardConfig rc;
  rc.ablation = ctx.cfg.ablation;
  rc.kl_coefficient = ctx.cfg.ppo.beta;
  AOTK_ASSIGN_OR_RETURN(RewardScorer scorer, RewardScorer::Create(
                                                 s.utility.get(),
                                                 s.authorship.get(), rc));
  s.scorer.emplace(std::move(scorer));
  return s;
}

absl::StatusOr<std::unique_ptr<TrainablePolicy>> InitialPolicy(
    const RunConfig& cfg) {
  std::unique_ptr<KeepDropPolicy> p;
  if (cfg.policy.init.empty()) {
    AOTK_ASSIGN_OR_RETURN(p, KeepDropPolicy::Create(cfg.policy.options));
  } else {
    AOTK_ASSIGN_OR_RETURN(p, KeepDropPolicy::FromFile(cfg.policy.init));
  }
  p->set_generation_config(cfg.policy.generation);
  return std::unique_ptr<TrainablePolicy>(std::move(p));
}

std::vector<Prompt> TrainPrompts(const Context& ctx) {
  std::vector<Prompt> prompts;
  for (const Document& d : ctx.split->train.documents()) {
    prompts.push_back({d.id, d.text});
  }
  return prompts;
}

Checksums ConfigInput(std::string_view name, const Json& section) {
  return {{absl::StrCat("config:", std::string(name)),
           Sha256Hex(section.dump())}};
}

void Merge(Checksums& into, const Checksums& from) {
  into.insert(from.begin(), from.end());
}

// Runs `body` unless the step already completed with the same inputs. A
// completed step whose inputs changed has its outputs cleared and is rerun;
// an interrupted step resumes over its existing outputs.
absl::Status RunStep(
    Context& ctx, const std::string& step, const Json& args,
    const Checksums& inputs, const std::vector<fs::path>& outputs,
    const std::function<absl::StatusOr<std::vector<fs::path>>()>& body) {
  RunDirectory& run = *ctx.run;
  AOTK_ASSIGN_OR_RETURN(bool complete, run.IsComplete(step, inputs));
  if (complete) {
    *ctx.out << step << ": already complete in " << run.path().string()
             << "\n";
    return absl::OkStatus();
  }
  if (run.HasRecord(step) &&
      run.manifest()["steps"][step].value("status", "") == "complete") {
    *ctx.out << step << ": inputs changed since the last run; recomputing\n";
    for (const fs::path& p : outputs) {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
  }
  AOTK_RETURN_IF_ERROR(run.MarkStarted(step, args));
  AOTK_ASSIGN_OR_RETURN(std::vector<fs::path> artifacts, body());
  return run.MarkComplete(step, args, inputs, artifacts);
}

// --- subcommands ---

absl::Status CmdStats(Context& ctx) {
  const fs::path tsv = *ctx.run / "stats.tsv";
  const fs::path md = *ctx.run / "stats.md";
  return RunStep(ctx, "stats", Json::object(), {}, {tsv, md},
                 [&]() -> absl::StatusOr<std::vector<fs::path>> {
                   // Tokens: normalized word-character runs, which split
                   // punctuation and contractions unlike whitespace words.
                   AOTK_ASSIGN_OR_RETURN(
                       CorpusStats stats,
                       ComputeStats(*ctx.corpus, [](std::string_view t) {
                         return NormalizedTokens(t).size();
                       }));
                   std::vector<NamedStats> rows = {{ctx.dataset, stats}};
                   AOTK_RETURN_IF_ERROR(
                       WriteFileAtomically(tsv, StatsToTsv(rows)));
                   AOTK_RETURN_IF_ERROR(
                       WriteFileAtomically(md, StatsToMarkdown(rows)));
                   *ctx.out << StatsToTsv(rows);
                   return std::vector<fs::path>{tsv, md};
                 });
}

absl::Status CmdGenPrefs(Context& ctx) {
  const fs::path prefs = *ctx.run / "preferences.jsonl";
  const fs::path stats_path = *ctx.run / "preferences_stats.json";
  Checksums inputs;
  if (!ctx.cfg.policy.init.empty()) {
    AOTK_ASSIGN_OR_RETURN(inputs, ctx.run->Checksum({ctx.cfg.policy.init}));
  }
  return RunStep(
      ctx, "gen-prefs", Json::object(), inputs, {prefs, stats_path},
      [&]() -> absl::StatusOr<std::vector<fs::path>> {
        AOTK_ASSIGN_OR_RETURN(Scoring s, MakeScorer(ctx));
        AOTK_ASSIGN_OR_RETURN(std::unique_ptr<TrainablePolicy> policy,
                              InitialPolicy(ctx.cfg));
        const std::vector<Prompt> prompts = TrainPrompts(ctx);
        AOTK_ASSIGN_OR_RETURN(
            PreferenceRun result,
            GeneratePreferencePairs(prompts, *policy, *s.scorer,
                                    ctx.cfg.preference, ctx.cfg.threads));
        AOTK_RETURN_IF_ERROR(WritePreferences(prefs, result.triples));
        const PreferenceStats& st = result.stats;
        Json stats = {{"prompts", prompts.size()},
                      {"kept", st.kept},
                      {"dropped_pairs", st.dropped},
                      {"mean_privacy_margin", st.mean_privacy_margin},
                      {"mean_utility_gap", st.mean_utility_gap},
                      {"eps_priv", ctx.cfg.preference.eps_priv},
                      {"eps_util", ctx.cfg.preference.eps_util}};
        AOTK_RETURN_IF_ERROR(
            WriteFileAtomically(stats_path, stats.dump(2) + "\n"));
        *ctx.out << "gen-prefs: kept " << st.kept << " triples from "
                 << prompts.size() << " prompts (" << st.dropped
                 << " pairs dropped)\n";
        return std::vector<fs::path>{prefs, stats_path};
      });
}

absl::Status CmdTrain(Context& ctx, Algorithm algo) {
  const std::string step = algo == Algorithm::kDpo ? "train-dpo" : "train-ppo";
  const fs::path dir = *ctx.run / step;
  const fs::path policy_path = dir / "policy.json";
  const fs::path log_path = dir / "log.jsonl";
  const TrainConfig& tc = algo == Algorithm::kDpo ? ctx.cfg.dpo : ctx.cfg.ppo;
  const fs::path prefs = *ctx.run / "preferences.jsonl";
  Checksums inputs;
  if (algo == Algorithm::kDpo) {
    if (!fs::exists(prefs)) {
      return DataError(absl::StrCat(prefs.string(),
                                    " not found; run gen-prefs first"));
    }
    AOTK_ASSIGN_OR_RETURN(inputs, ctx.run->Checksum({prefs}));
  }
  if (!ctx.cfg.policy.init.empty()) {
    AOTK_ASSIGN_OR_RETURN(Checksums init, ctx.run->Checksum({ctx.cfg.policy.init}));
    Merge(inputs, init);
  }
  return RunStep(
      ctx, step, Json::object(), inputs, {dir},
      [&]() -> absl::StatusOr<std::vector<fs::path>> {
        fs::create_directories(dir);
        AOTK_ASSIGN_OR_RETURN(std::unique_ptr<TrainablePolicy> reference,
                              InitialPolicy(ctx.cfg));
        TrainOptions opts;
        opts.checkpoint_dir = dir / "checkpoints";
        opts.log_path = log_path;
        TrainResult result;
        if (algo == Algorithm::kDpo) {
          AOTK_ASSIGN_OR_RETURN(std::vector<PreferenceTriple> triples,
                                ReadPreferences(prefs));
          if (triples.empty()) {
            return DataError(
                "no preference triples survived filtering; nothing to train on");
          }
          AOTK_ASSIGN_OR_RETURN(
              result, TrainDpo(triples, *reference, *reference, tc, opts));
        } else {
          AOTK_ASSIGN_OR_RETURN(Scoring s, MakeScorer(ctx));
          const std::vector<Prompt> prompts = TrainPrompts(ctx);
          AOTK_ASSIGN_OR_RETURN(result, TrainPpo(prompts, *s.scorer, *reference,
                                                 *reference, tc, opts));
        }
        AOTK_RETURN_IF_ERROR(result.policy->Save(policy_path));
        *ctx.out << step << ": " << result.steps << " steps over "
                 << result.epochs_completed << " epochs";
        if (result.resumed_from_epoch > 0) {
          *ctx.out << " (resumed after epoch " << result.resumed_from_epoch
                   << ")";
        }
        *ctx.out << "\n";
        return std::vector<fs::path>{policy_path, log_path};
      });
}

struct BuiltObfuscator {
  std::unique_ptr<Obfuscator> obfuscator;
  Checksums inputs;
};

absl::StatusOr<BuiltObfuscator> MakeObfuscator(Context& ctx) {
  const ObfuscationConfig& o = ctx.cfg.obfuscation;
  BuiltObfuscator b;
  if (o.method == "original") {
    b.obfuscator = std::make_unique<IdentityObfuscator>();
  } else if (o.method == "marker_deletion") {
    b.obfuscator =
        std::make_unique<TokenDeletingObfuscator>("marker_deletion", Markers(ctx));
  } else if (o.method == "synonyms") {
    SynonymConfig sc;
    AOTK_ASSIGN_OR_RETURN(sc.dictionary, LoadSynonymDictionary(o.synonyms));
    sc.word_fraction = o.word_fraction;
    sc.adjective_fraction = o.adjective_fraction;
    sc.seed = DeriveSeed(ctx.cfg.seed, "obfuscate/synonyms");
    std::vector<fs::path> files = {o.synonyms};
    std::shared_ptr<const PosTagger> tagger;
    if (!o.adjectives.empty()) {
      AOTK_ASSIGN_OR_RETURN(std::string text, ReadFile(o.adjectives));
      std::set<std::string> adjectives;
      for (absl::string_view line : absl::StrSplit(text, '\n')) {
        std::string w = AsciiLower(Trim(std::string_view(line.data(), line.size())));
        if (!w.empty()) adjectives.insert(std::move(w));
      }
      tagger = std::make_shared<LexiconTagger>(std::move(adjectives));
      files.push_back(o.adjectives);
    }
    AOTK_ASSIGN_OR_RETURN(b.obfuscator,
                          SynonymObfuscator::Create(std::move(sc), tagger));
    AOTK_ASSIGN_OR_RETURN(b.inputs, ctx.run->Checksum(files));
  } else if (o.method == "llm_prompt") {
    HttpChatClient::Options opts;
    opts.endpoint = o.chat_endpoint;
    opts.model = o.chat_model;
    if (const char* key = std::getenv("AOTK_CHAT_API_KEY")) opts.api_key = key;
    AOTK_ASSIGN_OR_RETURN(std::unique_ptr<HttpChatClient> client,
                          HttpChatClient::Create(std::move(opts)));
    b.obfuscator = std::make_unique<LlmPromptObfuscator>(std::move(client));
  } else if (o.method == "policy") {
    std::string method_id = "policy-init";
    std::unique_ptr<TrainablePolicy> policy;
    fs::path file;
    if (o.policy == "train-dpo" || o.policy == "train-ppo") {
      file = *ctx.run / o.policy / "policy.json";
      method_id = o.policy == "train-dpo" ? "policy-dpo" : "policy-ppo";
      if (!fs::exists(file)) {
        return DataError(absl::StrCat(file.string(), " not found; run ",
                                      o.policy, " first"));
      }
    } else if (!o.policy.empty()) {
      file = o.policy;
      method_id = "policy";
    }
    if (file.empty()) {
      AOTK_ASSIGN_OR_RETURN(policy, InitialPolicy(ctx.cfg));
    } else {
      AOTK_ASSIGN_OR_RETURN(policy, KeepDropPolicy::FromFile(file));
      policy->set_generation_config(ctx.cfg.policy.generation);
      AOTK_ASSIGN_OR_RETURN(b.inputs, ctx.run->Checksum({file}));
    }
    b.obfuscator = std::make_unique<PolicyObfuscator>(
        std::shared_ptr<const Policy>(std::move(policy)), method_id,
        ctx.cfg.policy.max_chunk_chars,
        DeriveSeed(ctx.cfg.seed, absl::StrCat("obfuscate/", method_id)));
  } else {
    return ConfigError(absl::StrCat("unknown method '", o.method, "'"));
  }
  return b;
}

absl::StatusOr<Corpus> SelectSplits(const Context& ctx,
                                    const std::vector<std::string>& names) {
  std::set<std::string> ids;
  for (const std::string& n : names) {
    const Corpus& part = n == "train" ? ctx.split->train
                         : n == "val" ? ctx.split->val
                                      : ctx.split->test;
    for (const Document& d : part.documents()) ids.insert(d.id);
  }
  std::vector<Document> docs;
  for (const Document& d : ctx.corpus->documents()) {
    if (ids.count(d.id)) docs.push_back(d);
  }
  return Corpus::Create(std::move(docs), ctx.corpus->author_space(),
                        ctx.corpus->label_space());
}

absl::Status CmdObfuscate(Context& ctx) {
  AOTK_ASSIGN_OR_RETURN(BuiltObfuscator b, MakeObfuscator(ctx));
  const std::string method = b.obfuscator->method_id();
  const fs::path dir = *ctx.run / "obfuscations";
  const fs::path out = dir / (method + ".jsonl");
  const fs::path failures = dir / (method + ".failures.jsonl");
  const Json section = ctx.config["obfuscation"];
  Checksums inputs = ConfigInput("obfuscation", section);
  Merge(inputs, b.inputs);
  return RunStep(
      ctx, "obfuscate/" + method, section, inputs, {out, failures},
      [&]() -> absl::StatusOr<std::vector<fs::path>> {
        fs::create_directories(dir);
        AOTK_ASSIGN_OR_RETURN(Corpus docs,
                              SelectSplits(ctx, ctx.cfg.obfuscation.splits));
        BatchOptions opts;
        opts.threads = ctx.cfg.threads;
        opts.output = out;
        AOTK_ASSIGN_OR_RETURN(BatchReport report,
                              BatchObfuscate(*b.obfuscator, docs, opts));
        std::error_code ec;
        fs::remove(failures, ec);
        if (!report.failures.empty()) {
          std::vector<Json> lines;
          for (const BatchFailure& f : report.failures) {
            lines.push_back({{"document_id", f.document_id},
                             {"category", ErrorCategoryName(f.category)},
                             {"error", f.error}});
          }
          AOTK_RETURN_IF_ERROR(WriteJsonLines(failures, lines));
          const BatchFailure& first = report.failures.front();
          const std::string msg = absl::StrCat(
              report.failures.size(), " of ", docs.size(),
              " documents failed (first: ", first.document_id, ": ",
              first.error, "); see ", failures.string(),
              "; rerun to retry only the failed documents");
          switch (first.category) {
            case ErrorCategory::kRemote:
              return RemoteError(msg);
            case ErrorCategory::kData:
              return DataError(msg);
            case ErrorCategory::kConfig:
              return ConfigError(msg);
            default:
              return BackendError(msg);
          }
        }
        *ctx.out << "obfuscate/" << method << ": " << report.results.size()
                 << " documents (" << report.reused << " reused) -> "
                 << out.string() << "\n";
        return std::vector<fs::path>{out};
      });
}

bool Covers(const Corpus& c, const ObfuscationIndex& obf) {
  for (const Document& d : c.documents()) {
    if (!obf.count(d.id)) return false;
  }
  return true;
}

absl::Status CmdEvaluate(Context& ctx, const std::string& obfuscated_flag) {
  fs::path source = obfuscated_flag;
  if (source.empty()) {
    AOTK_ASSIGN_OR_RETURN(BuiltObfuscator b, MakeObfuscator(ctx));
    source = *ctx.run / "obfuscations" / (b.obfuscator->method_id() + ".jsonl");
  }
  if (!fs::exists(source)) {
    return DataError(absl::StrCat(source.string(),
                                  " not found; run obfuscate first or pass "
                                  "--obfuscated"));
  }
  AOTK_ASSIGN_OR_RETURN(std::vector<ObfuscationResult> results,
                        ReadObfuscations(source));
  if (results.empty()) return DataError(absl::StrCat(source.string(), " is empty"));
  const std::string method = results.front().method_id;
  for (const ObfuscationResult& r : results) {
    if (r.method_id != method) {
      return DataError(absl::StrCat(source.string(), " mixes methods '", method,
                                    "' and '", r.method_id, "'"));
    }
    const Document* d = ctx.corpus->Find(r.document_id);
    if (d == nullptr) {
      return DataError(absl::StrCat("obfuscated document ", r.document_id,
                                    " is not in the corpus"));
    }
    if (d->author_id != r.author_id || d->text != r.original_text) {
      return DataError(absl::StrCat("obfuscated document ", r.document_id,
                                    " does not match the corpus record"));
    }
  }
  const fs::path dir = *ctx.run / "reports";
  const fs::path out = dir / (SafeName(method) + ".json");
  const Json section = ctx.config["evaluation"];
  Checksums inputs = ConfigInput("evaluation", section);
  AOTK_ASSIGN_OR_RETURN(Checksums src, ctx.run->Checksum({source}));
  Merge(inputs, src);
  Json args = section;
  args["obfuscated"] = fs::absolute(source).string();
  return RunStep(
      ctx, "evaluate/" + method, args, inputs, {out},
      [&]() -> absl::StatusOr<std::vector<fs::path>> {
        fs::create_directories(dir);
        const ObfuscationIndex obf = IndexObfuscations(results);
        const EvaluationConfig& e = ctx.cfg.evaluation;
        EvaluationReport report;
        report.method = method;
        report.dataset = ctx.dataset;
        Json notes = Json::array();

        ClassifierSpec spec;
        spec.backend_id = e.classifier_backend;
        spec.learning_rate = e.learning_rate;
        spec.batch_size = e.batch_size;
        spec.epochs = e.epochs;

        AOTK_ASSIGN_OR_RETURN(
            std::shared_ptr<const EmbeddingProvider> attacker_emb,
            MakeProvider(ctx, ctx.cfg.providers.attacker,
                         EmbeddingRole::kAuthorship));
        NearestCentroidTrainer attacker(attacker_emb);
        spec.task = ClassifierTask::kAttribution;
        spec.seed = DeriveSeed(ctx.cfg.seed, "evaluate/attacker");
        AOTK_ASSIGN_OR_RETURN(
            report.scenarios,
            RunAttackScenarios(*ctx.split, obf, spec, attacker, e.scenarios));

        if (ctx.corpus->label_space().empty()) {
          notes.push_back("utility skipped: corpus has no task labels");
        } else {
          AOTK_ASSIGN_OR_RETURN(
              std::shared_ptr<const EmbeddingProvider> task_emb,
              MakeProvider(ctx, ctx.cfg.providers.task_classifier,
                           EmbeddingRole::kUtility));
          NearestCentroidTrainer task(task_emb);
          spec.task = ClassifierTask::kUtility;
          spec.seed = DeriveSeed(ctx.cfg.seed, "evaluate/utility");
          AOTK_ASSIGN_OR_RETURN(
              AccuracyCount direct,
              UtilityEval(*ctx.split, obf, spec, task, UtilityMode::kDirect));
          report.utility_direct = direct.accuracy();
          if (Covers(ctx.split->train, obf) && Covers(ctx.split->val, obf)) {
            AOTK_ASSIGN_OR_RETURN(
                AccuracyCount retrained,
                UtilityEval(*ctx.split, obf, spec, task, UtilityMode::kRetrained));
            report.utility_retrained = retrained.accuracy();
          } else {
            notes.push_back(
                "utility_retrained skipped: train/val documents lack "
                "obfuscations");
          }
        }

        if (e.content_metrics) {
          std::vector<std::pair<std::string, std::string>> pairs;
          for (const Document& d : ctx.split->test.documents()) {
            pairs.emplace_back(d.text, obf.at(d.id).obfuscated_text);
          }
          const std::string content_id = ctx.cfg.providers.content.empty()
                                             ? ctx.cfg.providers.utility
                                             : ctx.cfg.providers.content;
          AOTK_ASSIGN_OR_RETURN(
              std::shared_ptr<const EmbeddingProvider> content_emb,
              MakeProvider(ctx, content_id, EmbeddingRole::kUtility));
          AOTK_ASSIGN_OR_RETURN(report.content_metrics,
                                ContentMetrics(pairs, {content_emb.get(), nullptr}));
          notes.push_back("acceptability not reported: no scorer configured");
        }
        for (const ScenarioResult& s : report.scenarios) {
          if (!s.accuracy) {
            notes.push_back(absl::StrCat(std::string(ScenarioName(s.scenario)),
                                         " skipped: ", s.skipped_reason));
          }
        }
        report.metadata = {{"run_id", ctx.cfg.run_id},
                           {"seed", ctx.cfg.seed},
                           {"obfuscations", fs::absolute(source).string()},
                           {"obfuscations_sha256", src.begin()->second},
                           {"attacker", ctx.cfg.providers.attacker},
                           {"task_classifier", ctx.cfg.providers.task_classifier},
                           {"classifier_backend", e.classifier_backend},
                           {"notes", notes}};
        AOTK_RETURN_IF_ERROR(WriteFileAtomically(
            out, EvaluationReportToJson(report).dump(2) + "\n"));
        *ctx.out << "evaluate/" << method << ":";
        for (const ScenarioResult& s : report.scenarios) {
          *ctx.out << " " << ScenarioName(s.scenario) << "="
                   << (s.accuracy ? absl::StrFormat("%.4f", s.accuracy->accuracy())
                                  : std::string("skipped"));
        }
        if (report.utility_direct) {
          *ctx.out << " utility_direct="
                   << absl::StrFormat("%.4f", *report.utility_direct);
        }
        *ctx.out << "\n";
        return std::vector<fs::path>{out};
      });
}

absl::Status CmdReport(Context& ctx) {
  const fs::path dir = *ctx.run / "reports";
  std::vector<fs::path> files;
  if (fs::exists(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    return DataError(absl::StrCat("no evaluation reports under ", dir.string(),
                                  "; run evaluate first"));
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    // The unobfuscated baseline leads the table.
    const bool ao = a.stem() == "original", bo = b.stem() == "original";
    if (ao != bo) return ao;
    return a < b;
  });
  AOTK_ASSIGN_OR_RETURN(Checksums inputs, ctx.run->Checksum(files));
  const fs::path md = *ctx.run / "report.md";
  const fs::path csv = *ctx.run / "figure.csv";
  return RunStep(ctx, "report", Json::object(), inputs, {md, csv},
                 [&]() -> absl::StatusOr<std::vector<fs::path>> {
                   std::vector<EvaluationReport> reports;
                   for (const fs::path& f : files) {
                     AOTK_ASSIGN_OR_RETURN(std::string text, ReadFile(f));
                     Json j = Json::parse(text, nullptr, false);
                     auto r = EvaluationReportFromJson(j);
                     if (!r.ok()) return Annotate(r.status(), f.string());
                     reports.push_back(*std::move(r));
                   }
                   const std::string table = RenderMarkdown(reports);
                   AOTK_RETURN_IF_ERROR(WriteFileAtomically(md, table));
                   AOTK_RETURN_IF_ERROR(
                       WriteFileAtomically(csv, RenderFigureCsv(reports)));
                   *ctx.out << table;
                   return std::vector<fs::path>{md, csv};
                 });
}

void PrintError(std::ostream& err, const absl::Status& s) {
  err << "error [" << ErrorCategoryName(CategoryOf(s)) << "]: " << s.message()
      << "\n";
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Task-oriented authorship obfuscation toolkit", "aotk"};
  app.set_version_flag("--version", std::string("aotk ") + kToolVersion);
  app.require_subcommand(1);
  Flags f;
  auto common = [&f](CLI::App* sub) {
    sub->add_option("-c,--config", f.config_path, "Run config JSON")
        ->check(CLI::ExistingFile);
    sub->add_option("--run-id", f.run_id, "Run id (overrides config)");
    sub->add_option("--output-root", f.output_root, "Directory holding runs");
    sub->add_option("--seed", f.seed, "Run seed");
    sub->add_option("--threads", f.threads, "Worker threads");
    sub->add_option("--corpus", f.corpus, "Corpus path (overrides data.corpus)");
    sub->add_option("--set", f.sets, "Config override key.path=value")
        ->take_all();
  };
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"stats", "Corpus statistics (TSV and Markdown)"},
      {"gen-prefs", "Sample and filter preference triples"},
      {"train-dpo", "Train the policy with DPO on the preference triples"},
      {"train-ppo", "Train the policy with PPO on the reward"},
      {"obfuscate", "Obfuscate the corpus with the configured method"},
      {"evaluate", "Attack scenarios, utility and content metrics"},
      {"report", "Render stored evaluation reports"},
  };
  std::map<std::string, CLI::App*> apps;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    common(sub);
    apps[s.name] = sub;
  }
  apps["obfuscate"]->add_option("--method", f.method, "Obfuscation method");
  apps["obfuscate"]->add_option(
      "--policy", f.policy, "train-dpo, train-ppo or a saved policy path");
  apps["evaluate"]->add_option("--method", f.method,
                               "Method whose obfuscations to evaluate");
  apps["evaluate"]->add_option("--policy", f.policy,
                               "Policy source when --method policy");
  apps["evaluate"]->add_option("--obfuscated", f.obfuscated,
                               "Obfuscation results JSONL")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  std::string name;
  for (const auto& [n, sub] : apps) {
    if (sub->parsed()) name = n;
  }

  auto body = [&]() -> absl::Status {
    AOTK_ASSIGN_OR_RETURN(Json raw, BuildConfigJson(f));
    AOTK_ASSIGN_OR_RETURN(RunConfig cfg, ParseRunConfig(raw));
    Context ctx;
    ctx.config = RunConfigToJson(cfg);
    ctx.cfg = std::move(cfg);
    ctx.out = &out;
    AOTK_ASSIGN_OR_RETURN(
        RunDirectory run,
        RunDirectory::Open(ctx.cfg.output_root, ctx.cfg.run_id, ctx.config,
                           kStepLocalKeys));
    ctx.run = &run;
    AOTK_RETURN_IF_ERROR(LoadData(ctx, name != "stats" && name != "report"));
    if (name == "stats") return CmdStats(ctx);
    if (name == "gen-prefs") return CmdGenPrefs(ctx);
    if (name == "train-dpo") return CmdTrain(ctx, Algorithm::kDpo);
    if (name == "train-ppo") return CmdTrain(ctx, Algorithm::kPpo);
    if (name == "obfuscate") return CmdObfuscate(ctx);
    if (name == "evaluate") return CmdEvaluate(ctx, f.obfuscated);
    if (name == "report") return CmdReport(ctx);
    return ConfigError(absl::StrCat("unknown subcommand '", name, "'"));
  };
  absl::Status status;
  try {
    status = body();
  } catch (const std::exception& e) {
    status = BackendError(absl::StrCat("internal error: ", e.what()));
  }
  if (!status.ok()) {
    PrintError(err, status);
    return ExitCodeFor(status);
  }
  return 0;
}

}  // namespace aotk::cli
