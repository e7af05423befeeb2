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

#include "aotk/synthetic.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "aotk/evalharness.h"
#include "aotk/rewards.h"
#include "aotk/status.h"
#include "aotk/text.h"

namespace aotk {
namespace {

Corpus Generate(SyntheticCorpusOptions o) {
  auto c = GenerateSyntheticCorpus(o);
  EXPECT_TRUE(c.ok()) << c.status();
  return *std::move(c);
}

std::vector<ObfuscationResult> ObfuscateAll(const Obfuscator& o, const Corpus& c) {
  std::vector<ObfuscationResult> out;
  for (const Document& d : c.documents()) {
    auto r = o.Obfuscate(d);
    EXPECT_TRUE(r.ok()) << r.status();
    out.push_back(*std::move(r));
  }
  return out;
}

TEST(SyntheticCorpusTest, ShapeAndBalance) {
  SyntheticCorpusOptions o;
  o.authors = 4;
  o.docs_per_author = 10;
  Corpus c = Generate(o);
  EXPECT_EQ(c.size(), 40u);
  EXPECT_EQ(c.author_space().size(), 4u);
  EXPECT_THAT(c.label_space(), ::testing::ElementsAre("negative", "positive"));
  std::map<std::string, int> positives;
  for (const Document& d : c.documents()) {
    const auto toks = NormalizedTokens(d.text);
    const std::string marker =
        SyntheticMarker(std::stoul(d.author_id.substr(d.author_id.size() - 3)));
    EXPECT_EQ(std::count(toks.begin(), toks.end(), marker), 1) << d.text;
    positives[d.author_id] += *d.task_label == "positive";
  }
  for (const auto& [a, n] : positives) EXPECT_EQ(n, 5) << a;
}

TEST(SyntheticCorpusTest, DeterministicAndSeedSensitive) {
  SyntheticCorpusOptions o;
  o.authors = 3;
  o.docs_per_author = 5;
  o.style_strength = 0.5;
  EXPECT_EQ(Generate(o).documents(), Generate(o).documents());
  SyntheticCorpusOptions other = o;
  other.seed = 9;
  EXPECT_NE(Generate(o).documents(), Generate(other).documents());
}

TEST(SyntheticCorpusTest, InvalidOptionsListed) {
  SyntheticCorpusOptions o;
  o.authors = 1;
  o.style_strength = 2;
  absl::Status s = ValidateSyntheticCorpusOptions(o);
  EXPECT_EQ(CategoryOf(s), ErrorCategory::kConfig);
  EXPECT_THAT(std::string(s.message()), ::testing::HasSubstr("authors"));
  EXPECT_THAT(std::string(s.message()), ::testing::HasSubstr("style_strength"));
}

TEST(TokenDeletingObfuscatorTest, RemovesOnlyListedTokens) {
  TokenDeletingObfuscator del("marker_deletion", {"zqmarkaa"});
  Document d{"d1", "a", "the film zqmarkaa was great zqmarkaa.", {}, ""};
  auto r = del.Obfuscate(d);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->obfuscated_text, "the film was great.");
  EXPECT_EQ(r->metadata["deleted_tokens"], 2);
  EXPECT_EQ(r->method_id, "marker_deletion");
  Document only{"d2", "a", "zqmarkaa", {}, ""};
  EXPECT_EQ(CategoryOf(del.Obfuscate(only).status()), ErrorCategory::kBackend);
}

TEST(SyntheticPipelineTest, SeparableAuthorsTrainAccurateAttacker) {
  SyntheticCorpusOptions o;
  o.authors = 2;
  o.docs_per_author = 50;
  Corpus c = Generate(o);
  CorpusSplit split = *Split(c, SplitSpec{});
  auto hashed = HashedTermProvider::Create(EmbeddingRole::kAuthorship, 4096);
  NearestCentroidTrainer trainer(std::shared_ptr<const EmbeddingProvider>(*std::move(hashed)));
  IdentityObfuscator id;
  const Scenario only[] = {Scenario::kOriginalOnly};
  ClassifierSpec spec;
  auto r = RunAttackScenarios(split, IndexObfuscations(ObfuscateAll(id, c)), spec,
                              trainer, only);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_GE((*r)[0].validation_accuracy, 0.95);
  EXPECT_GE((*r)[0].accuracy->accuracy(), 0.95);
}

TEST(SyntheticPipelineTest, MarkerDeletionBeatsIdentityOnCombinedReward) {
  SyntheticCorpusOptions o;
  o.authors = 5;
  o.docs_per_author = 20;
  Corpus c = Generate(o);
  std::vector<std::string> texts;
  for (const Document& d : c.documents()) texts.push_back(d.text);
  auto tf = *TermFrequencyProvider::Create(BuildVocabulary(texts));
  auto markers = *MarkerProvider::Create(SyntheticMarkers(o.authors));
  auto scorer = *RewardScorer::Create(tf.get(), markers.get());
  TokenDeletingObfuscator del("marker_deletion", SyntheticMarkers(o.authors));
  IdentityObfuscator id;
  double sum_id = 0, sum_del = 0;
  for (const auto& [results, sum] :
       {std::pair{ObfuscateAll(id, c), &sum_id}, std::pair{ObfuscateAll(del, c), &sum_del}}) {
    for (const ObfuscationResult& r : results) {
      *sum += scorer.Score(r.original_text, r.obfuscated_text)->combined;
    }
  }
  EXPECT_GE((sum_del - sum_id) / c.size(), 0.2);
}

TEST(SyntheticPipelineTest, AdaptiveAttackerUsesStyleSignal) {
  SyntheticCorpusOptions o;
  o.authors = 4;
  o.docs_per_author = 60;
  o.style_strength = 0.7;
  Corpus c = Generate(o);
  CorpusSplit split = *Split(c, SplitSpec{});
  auto hashed = HashedTermProvider::Create(EmbeddingRole::kAuthorship, 4096);
  NearestCentroidTrainer trainer(std::shared_ptr<const EmbeddingProvider>(*std::move(hashed)));
  TokenDeletingObfuscator del("marker_deletion", SyntheticMarkers(o.authors));
  auto r = RunAttackScenarios(split, IndexObfuscations(ObfuscateAll(del, c)),
                              ClassifierSpec{}, trainer);
  ASSERT_TRUE(r.ok()) << r.status();
  const double original = (*r)[0].accuracy->accuracy();
  const double adapted = (*r)[2].accuracy->accuracy();
  EXPECT_GE(adapted, original);
  EXPECT_GT(adapted, 1.0 / o.authors + 0.1);
}

}  // namespace
}  // namespace aotk
