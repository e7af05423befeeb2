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
// Acceptance checks. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero when any criterion fails.

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "aotk/corpus.h"
#include "aotk/embeddings.h"
#include "aotk/evalharness.h"
#include "aotk/io.h"
#include "aotk/obfuscate.h"
#include "aotk/po_align.h"
#include "aotk/policy.h"
#include "aotk/preference.h"
#include "aotk/random.h"
#include "aotk/rewards.h"
#include "aotk/synthetic.h"
#include "aotk/text.h"

namespace aotk {
namespace {

namespace fs = std::filesystem;

constexpr uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;  // failures, or informational remarks

  void Check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back(what);
    }
  }
};

template <typename T>
T Must(absl::StatusOr<T> v, const std::string& what) {
  if (!v.ok()) {
    throw std::runtime_error(absl::StrCat(what, ": ", v.status().ToString()));
  }
  return *std::move(v);
}

void Must(const absl::Status& s, const std::string& what) {
  if (!s.ok()) throw std::runtime_error(absl::StrCat(what, ": ", s.ToString()));
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::string tmpl =
        (fs::temp_directory_path() / ("aotk_accept_" + tag + "_XXXXXX")).string();
    if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp");
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string ReadAll(const fs::path& p) { return Must(ReadFile(p), p.string()); }

// Random text over a fixed vocabulary; never empty.
std::string RandomText(Rng& rng, const std::vector<std::string>& vocab,
                       size_t min_words, size_t max_words) {
  const size_t n = min_words + rng.UniformIndex(max_words - min_words + 1);
  std::string out;
  for (size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += vocab[rng.UniformIndex(vocab.size())];
  }
  return out;
}

const std::vector<std::string>& TestMarkers() {
  static const auto* m = new std::vector<std::string>{"zqa", "zqb", "zqc", "zqd"};
  return *m;
}

std::vector<std::string> TestVocab() {
  std::vector<std::string> v = {"film", "plot", "great", "weak", "actor",
                                "scene", "music", "slow", "sharp", "dull",
                                "story", "ending", "cast", "long", "good"};
  for (const auto& m : TestMarkers()) v.push_back(m);
  return v;
}

// --- C1 ---------------------------------------------------------------------

Outcome C1() {
  Outcome o;
  const auto vocab = TestVocab();
  auto tf = Must(TermFrequencyProvider::Create(vocab), "tf provider");
  auto marker = Must(MarkerProvider::Create(TestMarkers()), "marker provider");
  const EmbeddingProvider* providers[] = {tf.get(), marker.get()};
  Rng rng(DeriveSeed(kSeed, "c1"));
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const std::string t = RandomText(rng, vocab, 1, 30);
    for (const EmbeddingProvider* p : providers) {
      const double u = Must(UtilityReward(t, t, *p), "utility");
      const double pr = Must(PrivacyReward(t, t, *p), "privacy");
      worst = std::max({worst, std::abs(u - 1.0), std::abs(pr)});
    }
  }
  o.Check(worst <= 1e-9, absl::StrFormat("identity deviation %.3g > 1e-9", worst));

  const double cos = Must(CosineSimilarity(EmbeddingVector({1.0, 1.0}),
                                           EmbeddingVector({1.0, 0.0})),
                          "cosine");
  o.Check(std::abs(cos - 1.0 / std::sqrt(2.0)) <= 1e-9,
          absl::StrFormat("cos((1,1),(1,0)) = %.12f, expected 1/sqrt(2)", cos));
  o.Check(absl::StrFormat("%.5f", cos) == "0.70711",
          absl::StrFormat("cos((1,1),(1,0)) rounds to %.5f, expected 0.70711", cos));
  return o;
}

// --- C2 ---------------------------------------------------------------------

Outcome C2() {
  Outcome o;
  const auto vocab = TestVocab();
  auto tf = Must(TermFrequencyProvider::Create(vocab), "tf provider");
  auto marker = Must(MarkerProvider::Create(TestMarkers()), "marker provider");
  auto hu = Must(HashedTermProvider::Create(EmbeddingRole::kUtility, 64), "hashed");
  auto ha = Must(HashedTermProvider::Create(EmbeddingRole::kAuthorship, 64), "hashed");
  const std::pair<const EmbeddingProvider*, const EmbeddingProvider*> pairs[] = {
      {tf.get(), marker.get()}, {hu.get(), ha.get()}};
  Rng rng(DeriveSeed(kSeed, "c2"));
  size_t out_of_bounds = 0;
  double worst_split = 0;
  for (const auto& [u, a] : pairs) {
    auto full = Must(RewardScorer::Create(u, a, {Ablation::kFull, 0.2}), "scorer");
    auto np = Must(RewardScorer::Create(u, a, {Ablation::kNoPrivacy, 0.2}), "scorer");
    auto nu = Must(RewardScorer::Create(u, a, {Ablation::kNoUtility, 0.2}), "scorer");
    for (int i = 0; i < 1000; ++i) {
      const std::string x = RandomText(rng, vocab, 1, 25);
      const std::string y = RandomText(rng, vocab, 1, 25);
      const RewardBreakdown f = Must(full.Score(x, y), "score");
      if (f.utility < -1.0 || f.utility > 1.0 || f.privacy < 0.0 ||
          f.privacy > 2.0) {
        ++out_of_bounds;
      }
      const double sum = Must(np.Score(x, y), "score").combined +
                         Must(nu.Score(x, y), "score").combined;
      worst_split = std::max(worst_split, std::abs(f.combined - sum));
    }
  }
  o.Check(out_of_bounds == 0, absl::StrCat(out_of_bounds, " rewards out of bounds"));
  o.Check(worst_split <= 1e-12,
          absl::StrFormat("|full - (no_privacy + no_utility)| = %.3g", worst_split));
  return o;
}

// --- C3 ---------------------------------------------------------------------

Outcome C3() {
  Outcome o;
  const double v = Must(KlShapedReward(1.0, 0.5, 0.2), "shaped");
  o.Check(v == 0.9, absl::StrFormat("KlShapedReward(1, 0.5, 0.2) = %.17g", v));
  for (double beta : {0.0, 0.1, 0.2, 1.0}) {
    for (double r : {-1.0, 0.0, 1.3}) {
      const double base = Must(KlShapedReward(r, 0.0, beta), "shaped");
      for (int i = 1; i < 50; ++i) {
        const double kl = 0.1 * i;
        const double y = Must(KlShapedReward(r, kl, beta), "shaped");
        const double slope = (y - base) / kl;
        if (std::abs(slope + beta) > 1e-9 || base != r) {
          o.Check(false, absl::StrFormat("not affine: r=%g beta=%g kl=%g slope=%g",
                                         r, beta, kl, slope));
          return o;
        }
      }
    }
  }
  return o;
}

// --- C4 ---------------------------------------------------------------------

double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

Outcome C4() {
  Outcome o;
  const double z = Must(DpoLoss(0.7, 0.7, 0.1), "loss").loss;
  o.Check(std::abs(z - std::log(2.0)) <= 1e-9,
          absl::StrFormat("zero-margin loss %.12f", z));
  const double a = Must(DpoLoss(1, -1, 0.1), "loss").loss;
  const double b = Must(DpoLoss(-1, 1, 0.1), "loss").loss;
  o.Check(std::abs(a - 0.598139) <= 1e-6, absl::StrFormat("L(1,-1) = %.9f", a));
  o.Check(std::abs(b - 0.798139) <= 1e-6, absl::StrFormat("L(-1,1) = %.9f", b));
  // Independent closed form.
  o.Check(std::abs(a - Softplus(-0.2)) <= 1e-12, "L(1,-1) != softplus(-0.2)");

  double prev = INFINITY;
  for (int i = 0; i < 100; ++i) {
    const double m = -20.0 + 40.0 * i / 99.0;
    const double l = Must(DpoLoss(m, 0.0, 0.1), "loss").loss;
    if (!(l < prev)) {
      o.Check(false, absl::StrFormat("not strictly decreasing at margin %g", m));
      break;
    }
    prev = l;
  }

  Rng rng(DeriveSeed(kSeed, "c4"));
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const double lc = -3 + 6 * rng.UniformDouble();
    const double lr = -3 + 6 * rng.UniformDouble();
    const double beta = 0.05 + 0.75 * rng.UniformDouble();
    const double g = Must(DpoLoss(lc, lr, beta), "loss").grad_wrt_margin;
    const double h = 1e-5;
    const double fd = (Must(DpoLoss(lc + h, lr, beta), "loss").loss -
                       Must(DpoLoss(lc - h, lr, beta), "loss").loss) /
                      (2 * h);
    worst = std::max(worst, std::abs(g - fd) / std::abs(fd));
  }
  o.Check(worst <= 1e-5, absl::StrFormat("gradient relative error %.3g", worst));

  for (double m : {1e4, -1e4}) {
    const DpoLossValue v = Must(DpoLoss(m, 0.0, 0.1), "loss");
    o.Check(std::isfinite(v.loss) && std::isfinite(v.grad_wrt_margin),
            absl::StrFormat("non-finite at margin %g", m));
  }
  return o;
}

// --- C5 ---------------------------------------------------------------------

enum class Choice { kDrop, kLeft, kRight };

Choice OracleDecide(double lp, double lu, double rp, double ru, double eps_p,
                    double eps_u) {
  const double dp = std::abs(rp - lp);
  const double du = std::abs(ru - lu);
  if (!(dp > eps_p) || !(du < eps_u)) return Choice::kDrop;
  return rp > lp ? Choice::kRight : Choice::kLeft;
}

Choice FromDecision(PairDecision d) {
  switch (d) {
    case PairDecision::kChooseLeft:
      return Choice::kLeft;
    case PairDecision::kChooseRight:
      return Choice::kRight;
    default:
      return Choice::kDrop;
  }
}

std::vector<Document> SyntheticDocs(size_t authors, size_t per_author,
                                    uint64_t seed) {
  SyntheticCorpusOptions so;
  so.authors = authors;
  so.docs_per_author = per_author;
  so.seed = seed;
  return Must(GenerateSyntheticCorpus(so), "synthetic corpus").documents();
}

Outcome C5(uint64_t seed, std::string& artifact) {
  Outcome o;
  PreferenceConfig cfg;  // 0.10 / 0.05
  Rng rng(DeriveSeed(seed, "c5/tuples"));
  size_t disagree = 0;
  std::map<Choice, size_t> seen;
  for (int i = 0; i < 1000; ++i) {
    // Half on a coarse grid to hit the thresholds exactly, half continuous.
    auto draw = [&](double hi) {
      return i % 2 == 0 ? 0.01 * rng.UniformIndex(static_cast<size_t>(hi * 100) + 1)
                        : hi * rng.UniformDouble();
    };
    RewardBreakdown l, r;
    l.privacy = draw(1.0);
    r.privacy = draw(1.0);
    l.utility = draw(1.0);
    r.utility = i % 4 < 2 ? l.utility + 0.08 * (rng.UniformDouble() - 0.5)
                          : draw(1.0);
    const Choice want =
        OracleDecide(l.privacy, l.utility, r.privacy, r.utility, 0.10, 0.05);
    const Choice got = FromDecision(DecidePair(l, r, cfg));
    ++seen[want];
    if (got != want) ++disagree;
    artifact += Json{{"i", i},
                     {"left", {l.privacy, l.utility}},
                     {"right", {r.privacy, r.utility}},
                     {"decision", static_cast<int>(got)}}
                    .dump() +
                "\n";
  }
  o.Check(disagree == 0, absl::StrCat(disagree, "/1000 decisions disagree"));
  o.Check(seen.size() == 3, "tuples did not exercise all three outcomes");

  // Triples emitted by the generator.
  Corpus corpus = Must(Corpus::Create(SyntheticDocs(4, 40, seed)), "corpus");
  std::vector<std::string> texts;
  std::vector<Prompt> prompts;
  for (const Document& d : corpus.documents()) {
    texts.push_back(d.text);
    prompts.push_back({d.id, d.text});
  }
  auto tf = Must(TermFrequencyProvider::Create(BuildVocabulary(texts)), "tf");
  auto marker = Must(MarkerProvider::Create(SyntheticMarkers(4)), "marker");
  auto scorer = Must(RewardScorer::Create(tf.get(), marker.get()), "scorer");
  auto policy = Must(KeepDropPolicy::Create({4096, 0.85}), "policy");
  PreferenceConfig gen = cfg;
  gen.seed = DeriveSeed(seed, "c5/gen");
  PreferenceRun run =
      Must(GeneratePreferencePairs(prompts, *policy, scorer, gen, 2), "generate");
  o.Check(!run.triples.empty(), "generator kept no triples");
  size_t bad = 0;
  for (const PreferenceTriple& t : run.triples) {
    const double dp = t.chosen_rewards.privacy - t.rejected_rewards.privacy;
    const double du = std::abs(t.chosen_rewards.utility - t.rejected_rewards.utility);
    if (!(dp > 0.10) || !(du < 0.05) || !CheckTriple(t, cfg).ok()) ++bad;
    artifact += PreferenceTripleToJson(t).dump() + "\n";
  }
  o.Check(bad == 0, absl::StrCat(bad, " emitted triples violate the margins"));
  o.notes.push_back(absl::StrCat(run.triples.size(), " triples kept, ",
                                 run.stats.dropped, " pairs dropped"));
  return o;
}

// --- C6 ---------------------------------------------------------------------

Outcome C6() {
  Outcome o;
  Rng rng(DeriveSeed(kSeed, "c6"));
  size_t failures = 0;
  for (int c = 0; c < 100; ++c) {
    std::vector<Document> docs;
    const size_t authors = 2 + rng.UniformIndex(5);
    for (size_t a = 0; a < authors; ++a) {
      const size_t n = 3 + rng.UniformIndex(28);
      for (size_t i = 0; i < n; ++i) {
        docs.push_back({absl::StrCat("c", c, "-a", a, "-", i), absl::StrCat("a", a),
                        absl::StrCat("text ", a, " ", i),
                        i % 2 ? "positive" : "negative", "rand"});
      }
    }
    Corpus corpus = Must(Corpus::Create(docs), "corpus");
    SplitSpec spec;
    spec.seed = rng.NextU64();
    CorpusSplit s = Must(Split(corpus, spec), "split");
    std::multiset<std::string> ids;
    for (const Corpus* part : {&s.train, &s.val, &s.test}) {
      for (const Document& d : part->documents()) ids.insert(d.id);
    }
    std::multiset<std::string> want;
    for (const Document& d : docs) want.insert(d.id);
    if (ids != want) ++failures;
  }
  o.Check(failures == 0, absl::StrCat(failures, "/100 splits are not partitions"));

  // Hand-checked corpus: word counts 3,2,4,1,6; char counts 5,3,7,1,11.
  std::vector<Document> hand = {{"1", "A", "a b c", {}, ""},
                                {"2", "A", "d e", {}, ""},
                                {"3", "B", "f g h i", {}, ""},
                                {"4", "B", "j", {}, ""},
                                {"5", "C", "k l m n o p", {}, ""}};
  CorpusStats st = Must(ComputeStats(Must(Corpus::Create(hand), "corpus")), "stats");
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  o.Check(st.n_authors == 3 && st.n_texts == 5, "hand corpus counts");
  o.Check(st.texts_per_author.mean == 5.0 / 3.0 &&
              near(st.texts_per_author.std, std::sqrt(2.0 / 9.0)),
          "texts per author");
  o.Check(st.words_per_text.mean == 16.0 / 5.0 &&
              near(st.words_per_text.std, std::sqrt(2.96)),
          "words per text");
  o.Check(st.chars_per_text.mean == 27.0 / 5.0 &&
              near(st.chars_per_text.std, std::sqrt(11.84)),
          "chars per text");

  const char* imdb = std::getenv("AOTK_IMDB62_PATH");
  if (imdb == nullptr || *imdb == '\0') {
    o.notes.push_back("IMDb62 subset check skipped: AOTK_IMDB62_PATH not set");
    return o;
  }
  const fs::path path(imdb);
  const CorpusFormat fmt =
      path.extension() == ".csv" ? CorpusFormat::kCsv : CorpusFormat::kJsonl;
  LoadOptions lo;
  lo.fields = {"reviewId", "userId", "content", "rating", true};
  LoadedCorpus loaded = Must(LoadCorpus(path, fmt, lo), "load IMDb62");
  Corpus sub = Must(SubsetAuthors(loaded.corpus, 10, AuthorSelection::kFirstListed),
                    "subset");
  std::map<std::string, size_t> per;
  for (const Document& d : sub.documents()) ++per[d.author_id];
  bool each = per.size() == 10;
  for (const auto& [a, n] : per) each = each && n == 1000;
  o.Check(sub.size() == 10000 && each,
          absl::StrCat("IMDb62 subset has ", sub.size(), " texts over ", per.size(),
                       " authors"));
  return o;
}

// --- C7 / C8 ----------------------------------------------------------------

struct Pipeline {
  std::optional<Corpus> corpus;
  std::optional<CorpusSplit> split;
  std::vector<ObfuscationResult> identity, deletion;
  double mean_combined_identity = 0, mean_combined_deletion = 0;
  std::vector<ScenarioResult> attack_identity, attack_deletion;
  double util_direct_identity = 0, util_direct_deletion = 0;
  double util_retrained_deletion = 0;
  AccuracyCount raw_attack, raw_utility;
  AccuracyCount util_direct_identity_count;
  std::string artifact;
};

std::vector<ObfuscationResult> ObfuscateAll(const Obfuscator& ob, const Corpus& c) {
  BatchReport rep = Must(BatchObfuscate(ob, c), "obfuscate " + ob.method_id());
  if (!rep.failures.empty()) throw std::runtime_error("obfuscation failures");
  return rep.results;
}

std::vector<LabeledText> Labeled(const Corpus& c, bool by_author) {
  std::vector<LabeledText> out;
  for (const Document& d : c.documents()) {
    out.push_back({d.text, by_author ? d.author_id : *d.task_label});
  }
  return out;
}

Pipeline RunPipeline(uint64_t seed) {
  Pipeline p;
  constexpr size_t kAuthors = 10;
  p.corpus = Must(Corpus::Create(SyntheticDocs(kAuthors, 100, seed)), "corpus");
  SplitSpec spec;
  spec.seed = DeriveSeed(seed, "c7/split");
  p.split = Must(Split(*p.corpus, spec), "split");

  IdentityObfuscator id;
  TokenDeletingObfuscator del("marker_deletion", SyntheticMarkers(kAuthors));
  p.identity = ObfuscateAll(id, *p.corpus);
  p.deletion = ObfuscateAll(del, *p.corpus);

  std::vector<std::string> texts;
  for (const Document& d : p.corpus->documents()) texts.push_back(d.text);
  auto tf = Must(TermFrequencyProvider::Create(BuildVocabulary(texts)), "tf");
  auto marker = Must(MarkerProvider::Create(SyntheticMarkers(kAuthors)), "marker");
  auto scorer = Must(RewardScorer::Create(tf.get(), marker.get()), "scorer");
  for (auto [results, mean] : {std::pair{&p.identity, &p.mean_combined_identity},
                               std::pair{&p.deletion, &p.mean_combined_deletion}}) {
    for (const ObfuscationResult& r : *results) {
      const RewardBreakdown b =
          Must(scorer.Score(r.original_text, r.obfuscated_text), "score");
      *mean += b.combined;
      p.artifact += Json{{"doc", r.document_id},
                         {"method", r.method_id},
                         {"text", r.obfuscated_text},
                         {"rewards", RewardBreakdownToJson(b)}}
                        .dump() +
                    "\n";
    }
    *mean /= static_cast<double>(results->size());
  }

  std::shared_ptr<const EmbeddingProvider> attack_embed = Must(
      HashedTermProvider::Create(EmbeddingRole::kAuthorship, 4096), "hashed");
  std::shared_ptr<const EmbeddingProvider> task_embed = Must(
      HashedTermProvider::Create(EmbeddingRole::kUtility, 4096), "hashed");
  NearestCentroidTrainer attacker(attack_embed), tasker(task_embed);
  ClassifierSpec attack_spec;
  attack_spec.seed = DeriveSeed(seed, "c7/attack");
  ClassifierSpec task_spec;
  task_spec.task = ClassifierTask::kUtility;
  task_spec.seed = DeriveSeed(seed, "c7/task");

  const ObfuscationIndex id_index = IndexObfuscations(p.identity);
  const ObfuscationIndex del_index = IndexObfuscations(p.deletion);
  p.attack_identity =
      Must(RunAttackScenarios(*p.split, id_index, attack_spec, attacker), "attack");
  p.attack_deletion =
      Must(RunAttackScenarios(*p.split, del_index, attack_spec, attacker), "attack");
  p.util_direct_identity_count = Must(
      UtilityEval(*p.split, id_index, task_spec, tasker, UtilityMode::kDirect),
      "utility");
  p.util_direct_identity = p.util_direct_identity_count.accuracy();
  p.util_direct_deletion =
      Must(UtilityEval(*p.split, del_index, task_spec, tasker, UtilityMode::kDirect),
           "utility")
          .accuracy();
  p.util_retrained_deletion =
      Must(UtilityEval(*p.split, del_index, task_spec, tasker,
                       UtilityMode::kRetrained),
           "utility")
          .accuracy();

  // Fixed-point references computed on the raw originals.
  auto raw_attacker = Must(attacker.Train(attack_spec, Labeled(p.split->train, true),
                                          Labeled(p.split->val, true)),
                           "train attacker");
  p.raw_attack = Must(ClassifierAccuracy(*raw_attacker, Labeled(p.split->test, true)),
                      "raw attack");
  auto raw_task = Must(tasker.Train(task_spec, Labeled(p.split->train, false),
                                    Labeled(p.split->val, false)),
                       "train task");
  p.raw_utility = Must(ClassifierAccuracy(*raw_task, Labeled(p.split->test, false)),
                       "raw utility");

  for (const auto& [name, rs] : {std::pair{"original", &p.attack_identity},
                                 std::pair{"marker_deletion", &p.attack_deletion}}) {
    for (const ScenarioResult& s : *rs) {
      p.artifact += Json{{"method", name},
                         {"scenario", std::string(ScenarioName(s.scenario))},
                         {"correct", s.accuracy ? s.accuracy->correct : 0},
                         {"total", s.accuracy ? s.accuracy->total : 0}}
                        .dump() +
                    "\n";
    }
  }
  p.artifact += Json{{"utility_direct_identity", p.util_direct_identity},
                     {"utility_direct_deletion", p.util_direct_deletion},
                     {"utility_retrained_deletion", p.util_retrained_deletion}}
                    .dump() +
                "\n";
  return p;
}

double ScenarioAccuracy(const std::vector<ScenarioResult>& rs, Scenario s) {
  for (const ScenarioResult& r : rs) {
    if (r.scenario == s && r.accuracy) return r.accuracy->accuracy();
  }
  throw std::runtime_error(absl::StrCat("scenario ", std::string(ScenarioName(s)),
                                        " missing or skipped"));
}

Outcome C7(const Pipeline& p) {
  Outcome o;
  const double margin = p.mean_combined_deletion - p.mean_combined_identity;
  o.Check(margin >= 0.2,
          absl::StrFormat("(a) combined reward margin %.4f < 0.2", margin));
  const double id_acc = ScenarioAccuracy(p.attack_identity, Scenario::kOriginalOnly);
  const double del_acc = ScenarioAccuracy(p.attack_deletion, Scenario::kOriginalOnly);
  const double chance = 1.0 / static_cast<double>(p.corpus->author_space().size());
  o.Check(id_acc >= 0.95, absl::StrFormat("(b) identity attack accuracy %.4f", id_acc));
  o.Check(del_acc <= chance + 0.10,
          absl::StrFormat("(b) deletion attack accuracy %.4f > %.2f", del_acc,
                          chance + 0.10));
  o.Check(p.util_direct_deletion >= 0.90,
          absl::StrFormat("(c) direct utility %.4f", p.util_direct_deletion));
  o.Check(p.util_retrained_deletion >= p.util_direct_deletion,
          absl::StrFormat("(d) retrained %.4f < direct %.4f",
                          p.util_retrained_deletion, p.util_direct_deletion));
  // Identity leaves every text unchanged, so evaluating it must reproduce the
  // raw-original numbers exactly.
  bool unchanged = true;
  for (const ObfuscationResult& r : p.identity) {
    unchanged = unchanged && r.obfuscated_text == r.original_text;
  }
  o.Check(unchanged, "(e) identity changed a text");
  const auto& orig = *p.attack_identity.front().accuracy;
  o.Check(p.attack_identity.front().scenario == Scenario::kOriginalOnly &&
              orig.correct == p.raw_attack.correct && orig.total == p.raw_attack.total,
          "(e) identity attack accuracy differs from raw originals");
  o.Check(p.util_direct_identity_count.correct == p.raw_utility.correct &&
              p.util_direct_identity_count.total == p.raw_utility.total,
          "(e) identity direct utility differs from raw originals");
  o.notes.push_back(absl::StrFormat(
      "margin %.3f, attack id %.3f / del %.3f, utility %.3f -> %.3f", margin, id_acc,
      del_acc, p.util_direct_deletion, p.util_retrained_deletion));
  return o;
}

Outcome C8(const Pipeline& p) {
  Outcome o;
  // Count mixed-set composition independently: obfuscated copies lack the
  // marker token.
  const ObfuscationIndex del_index = IndexObfuscations(p.deletion);
  MixedSet mixed = Must(BuildMixedTrainingSet(p.split->train, del_index), "mixed");
  const auto markers = SyntheticMarkers(p.corpus->author_space().size());
  const std::set<std::string> marker_set(markers.begin(), markers.end());
  std::map<std::string, std::pair<size_t, size_t>> counted;
  for (const LabeledText& t : mixed.texts) {
    bool has_marker = false;
    for (const std::string& tok : NormalizedTokens(t.text)) {
      has_marker = has_marker || marker_set.count(tok) > 0;
    }
    auto& c = counted[t.label];
    (has_marker ? c.first : c.second)++;
  }
  std::map<std::string, size_t> train_per_author;
  for (const Document& d : p.split->train.documents()) ++train_per_author[d.author_id];
  o.Check(counted.size() == train_per_author.size(), "authors missing from mixed set");
  for (const auto& [author, c] : counted) {
    const size_t n = train_per_author[author];
    o.Check(c.first + c.second == n,
            absl::StrCat(author, ": mixed size ", c.first + c.second, " != ", n));
    o.Check(n % 2 != 0 || c.first == c.second,
            absl::StrCat(author, ": ", c.first, " originals vs ", c.second,
                         " obfuscated"));
    o.Check(n % 2 == 0 || c.first == c.second + 1,
            absl::StrCat(author, ": odd split ", c.first, "/", c.second));
  }

  double lo = 1, hi = 0;
  for (Scenario s : kAllScenarios) {
    const double a = ScenarioAccuracy(p.attack_identity, s);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  o.Check(hi - lo <= 0.02,
          absl::StrFormat("identity scenarios spread %.4f > 0.02", hi - lo));
  return o;
}

// --- C9 ---------------------------------------------------------------------

Outcome C9(const Pipeline& p) {
  Outcome o;
  std::vector<std::pair<std::string, std::string>> same;
  for (size_t i = 0; i < 50; ++i) {
    const std::string& t = p.corpus->documents()[i].text;
    same.emplace_back(t, t);
  }
  auto m = Must(ContentMetrics(same), "metrics");
  for (const char* k : {"rouge1", "rouge2", "rougeL", "bleu"}) {
    o.Check(std::abs(m[k] - 100.0) <= 1e-9,
            absl::StrFormat("identical pairs: %s = %.6f", k, m[k]));
  }

  const auto vocab = TestVocab();
  Rng rng(DeriveSeed(kSeed, "c9"));
  size_t violations = 0;
  for (int i = 0; i < 500; ++i) {
    const auto a = NormalizedTokens(RandomText(rng, vocab, 1, 20));
    const auto b = NormalizedTokens(RandomText(rng, vocab, 1, 20));
    if (RougeL(a, b) > RougeN(a, b, 1) + 1e-12) ++violations;
  }
  o.Check(violations == 0, absl::StrCat(violations, "/500 pairs with rougeL > rouge1"));

  const std::vector<std::string> ref = {"a", "b", "c", "d"};
  const std::vector<std::string> cand = {"a", "b", "x", "d"};
  const double r1 = 100 * RougeN(ref, cand, 1);
  o.Check(std::abs(r1 - 75.0) <= 0.1, absl::StrFormat("hand rouge1 = %.4f", r1));
  return o;
}

// --- C10 --------------------------------------------------------------------

std::vector<PreferenceTriple> HandTriples() {
  std::vector<PreferenceTriple> t;
  const char* bodies[] = {"great movie overall",  "weak ending though",
                          "strong cast and crew", "slow first act",
                          "lovely score here",    "flat dialogue sadly",
                          "sharp editing work",   "dull middle part"};
  for (int i = 0; i < 8; ++i) {
    const std::string body = bodies[i];
    const std::string marker = "zq" + std::to_string(i % 2);
    RewardBreakdown c, r;
    c.privacy = 1.0;
    c.utility = 0.95;
    r.privacy = 0.0;
    r.utility = 0.97;
    t.push_back({"t" + std::to_string(i), body + " " + marker, body,
                 body + " " + marker, c, r});
  }
  return t;
}

double MeanLoss(const std::vector<PreferenceTriple>& triples, const Policy& policy,
                const Policy& ref, double beta) {
  double total = 0;
  for (const auto& t : triples) {
    const double a = Must(policy.LogProb(t.prompt, t.chosen), "logprob") -
                     Must(ref.LogProb(t.prompt, t.chosen), "logprob");
    const double b = Must(policy.LogProb(t.prompt, t.rejected), "logprob") -
                     Must(ref.LogProb(t.prompt, t.rejected), "logprob");
    total += Must(DpoLoss(a, b, beta), "loss").loss;
  }
  return total / static_cast<double>(triples.size());
}

Outcome C10(uint64_t seed, std::string& artifact) {
  Outcome o;
  ScratchDir dir("c10");
  auto ref = Must(KeepDropPolicy::Create({128, 0.7}), "policy");
  const auto triples = HandTriples();
  TrainConfig cfg{Algorithm::kDpo, 20.0, 2, 1, 0.1, DeriveSeed(seed, "c10/dpo")};
  const double before = MeanLoss(triples, *ref, *ref, cfg.beta);
  TrainOptions dpo_opts{dir.path() / "dpo/ckpt", dir.path() / "dpo/log.jsonl", true};
  TrainResult res = Must(TrainDpo(triples, *ref, *ref, cfg, dpo_opts), "train dpo");
  const double after = MeanLoss(triples, *res.policy, *ref, cfg.beta);
  o.Check(after <= 0.9 * before,
          absl::StrFormat("mean loss %.6f -> %.6f (< 10%% drop)", before, after));

  auto log = Must(RecoverJsonLines(dpo_opts.log_path), "dpo log");
  if (log.empty()) throw std::runtime_error("empty dpo log");
  const Json& first = log.front();
  double recomputed = 0;
  const size_t n = first["logratio_chosen"].size();
  for (size_t i = 0; i < n; ++i) {
    recomputed += Must(DpoLoss(first["logratio_chosen"][i].get<double>(),
                               first["logratio_rejected"][i].get<double>(), cfg.beta),
                       "loss")
                      .loss;
  }
  recomputed /= static_cast<double>(n);
  const double logged = first["loss"].get<double>();
  o.Check(n > 0 && std::abs(logged - recomputed) <= 1e-6,
          absl::StrFormat("step-0 logged loss %.9f vs recomputed %.9f", logged,
                          recomputed));

  // PPO smoke run starting from the reference.
  std::vector<Prompt> prompts;
  for (int i = 0; i < 10; ++i) {
    prompts.push_back({"p" + std::to_string(i),
                       "some words here mk" + std::to_string(i % 2) + " and there"});
  }
  auto tf = Must(TermFrequencyProvider::Create(
                     {"some", "words", "here", "and", "there", "mk0", "mk1"}),
                 "tf");
  auto marker = Must(MarkerProvider::Create({"mk0", "mk1"}), "marker");
  auto scorer = Must(RewardScorer::Create(tf.get(), marker.get()), "scorer");
  TrainConfig ppo{Algorithm::kPpo, 2.0, 5, 1, 0.2, DeriveSeed(seed, "c10/ppo")};
  TrainOptions ppo_opts{dir.path() / "ppo/ckpt", dir.path() / "ppo/log.jsonl", true};
  Must(TrainPpo(prompts, scorer, *ref, *ref, ppo, ppo_opts), "train ppo");
  auto plog = Must(RecoverJsonLines(ppo_opts.log_path), "ppo log");
  if (plog.empty()) throw std::runtime_error("empty ppo log");
  double worst = 0;
  for (const Json& kl : plog.front()["kl"]) worst = std::max(worst, std::abs(kl.get<double>()));
  o.Check(!plog.front()["kl"].empty() && worst <= 1e-9,
          absl::StrFormat("step-0 KL %.3g", worst));

  artifact = ReadAll(dpo_opts.log_path) + ReadAll(ppo_opts.log_path) +
             ReadAll(dpo_opts.checkpoint_dir / "epoch-1/weights.json") +
             ReadAll(ppo_opts.checkpoint_dir / "epoch-1/weights.json");
  return o;
}

// --- C11 --------------------------------------------------------------------

Outcome C11(const std::string& c5, const std::string& c7, const std::string& c10) {
  Outcome o;
  ScratchDir dir("c11");
  std::string c5b, c10b;
  using Item = std::tuple<const char*, const std::string*, const std::string*>;
  C5(kSeed, c5b);
  const std::string c7b = RunPipeline(kSeed).artifact;
  C10(kSeed, c10b);
  // Compare the written files, not just the in-memory strings.
  for (const auto& [name, a, b] : {Item{"c5", &c5, &c5b}, Item{"c7", &c7, &c7b},
                                   Item{"c10", &c10, &c10b}}) {
    const fs::path pa = dir.path() / (std::string(name) + "-run1.jsonl");
    const fs::path pb = dir.path() / (std::string(name) + "-run2.jsonl");
    Must(WriteFileAtomically(pa, *a), "write");
    Must(WriteFileAtomically(pb, *b), "write");
    o.Check(!a->empty() && ReadAll(pa) == ReadAll(pb),
            absl::StrCat(name, " artifacts differ between runs"));
  }
  return o;
}

// ---------------------------------------------------------------------------

bool Report(const char* id, const char* title, const std::function<Outcome()>& fn) {
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o.pass = false;
    o.notes.push_back(absl::StrCat("error: ", e.what()));
  }
  std::string detail;
  for (const std::string& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
  std::printf("[%s] %s %s%s%s\n", o.pass ? "PASS" : "FAIL", id, title,
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  return o.pass;
}

int Main() {
  bool ok = true;
  ok &= Report("C1", "reward identities and cosine example", C1);
  ok &= Report("C2", "reward bounds and ablation additivity", C2);
  ok &= Report("C3", "KL-shaped reward", C3);
  ok &= Report("C4", "DPO loss values, monotonicity, gradient, stability", C4);
  std::string c5_art, c10_art;
  ok &= Report("C5", "pair selection matches oracle; emitted margins hold",
               [&] { return C5(kSeed, c5_art); });
  ok &= Report("C6", "split partition, hand statistics, IMDb62 subset", C6);

  std::optional<Pipeline> pipeline;
  std::string pipeline_error;
  try {
    pipeline = RunPipeline(kSeed);
  } catch (const std::exception& e) {
    pipeline_error = e.what();
  }
  auto with_pipeline = [&](Outcome (*fn)(const Pipeline&)) {
    return [&, fn]() -> Outcome {
      if (!pipeline) throw std::runtime_error("pipeline failed: " + pipeline_error);
      return fn(*pipeline);
    };
  };
  ok &= Report("C7", "synthetic end-to-end pipeline", with_pipeline(C7));
  ok &= Report("C8", "mixed training sets and identity scenarios", with_pipeline(C8));
  ok &= Report("C9", "content metrics", with_pipeline(C9));
  ok &= Report("C10", "DPO and PPO smoke runs", [&] { return C10(kSeed, c10_art); });
  ok &= Report("C11", "same-seed runs are byte-identical", [&] {
    if (!pipeline) throw std::runtime_error("pipeline failed: " + pipeline_error);
    return C11(c5_art, pipeline->artifact, c10_art);
  });
  return ok ? 0 : 1;
}

}  // namespace
}  // namespace aotk

int main() { return aotk::Main(); }
