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

#include "aotk/obfuscate.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>

#include "aotk/random.h"
#include "aotk/status.h"
#include "aotk/text.h"
#include "http_test_server.h"
#include "test_util.h"

namespace aotk {
namespace {

using ::testing::HasSubstr;

Document Doc(std::string id, std::string text, std::string author = "a") {
  return Document{std::move(id), std::move(author), std::move(text),
                  std::nullopt, "test"};
}

std::unique_ptr<SynonymObfuscator> Syn(
    std::map<std::string, std::vector<std::string>> dict, double words = 0.9,
    double adjectives = 0.8, std::shared_ptr<const PosTagger> tagger = nullptr,
    uint64_t seed = 0) {
  auto o = SynonymObfuscator::Create({std::move(dict), words, adjectives, seed},
                                     std::move(tagger));
  EXPECT_TRUE(o.ok()) << o.status();
  return *std::move(o);
}

TEST(IdentityTest, ReturnsTextUnchanged) {
  IdentityObfuscator id;
  auto r = id.Obfuscate(Doc("d1", "  Some text,  as is. ", "auth"));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->obfuscated_text, "  Some text,  as is. ");
  EXPECT_EQ(r->method_id, "original");
  EXPECT_EQ(r->author_id, "auth");
  EXPECT_FALSE(id.Obfuscate(Doc("d2", "   ")).ok());
}

TEST(SynonymTest, SpecExamples) {
  auto o = Syn({{"good", {"great"}}}, 1.0);
  auto r = o->Obfuscate(Doc("d", "good movie"));
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->obfuscated_text, "great movie");
  EXPECT_EQ(r->metadata["replacement_count"], 1);

  auto none = Syn({})->Obfuscate(Doc("d", "good movie"));
  EXPECT_EQ(none->obfuscated_text, "good movie");
  EXPECT_EQ(none->metadata["replacement_count"], 0);
}

TEST(SynonymTest, DefaultsAndCase) {
  SynonymConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.word_fraction, 0.9);
  EXPECT_DOUBLE_EQ(cfg.adjective_fraction, 0.8);
  auto o = Syn({{"good", {"great"}}}, 1.0);
  EXPECT_EQ(o->Obfuscate(Doc("d", "Good. GOOD, good!"))->obfuscated_text,
            "Great. GREAT, great!");
}

TEST(SynonymTest, MultiWordAndSelfSynonymsAreIgnored) {
  auto o = Syn({{"good", {"very nice", "GOOD"}}, {"bad", {"poor"}}}, 1.0);
  auto r = o->Obfuscate(Doc("d", "good and bad"));
  EXPECT_EQ(r->obfuscated_text, "good and poor");
  EXPECT_EQ(r->metadata["eligible_count"], 1);
}

TEST(SynonymTest, AdjectiveBudget) {
  std::map<std::string, std::vector<std::string>> dict;
  std::string text;
  std::set<std::string> adjectives;
  for (char c = 'a'; c < 'f'; ++c) {
    dict[std::string("adj") + c] = {"x"};
    dict[std::string("noun") + c] = {"y"};
    adjectives.insert(std::string("adj") + c);
    text += std::string("adj") + c + " noun" + c + " ";
  }
  auto tagger = std::make_shared<LexiconTagger>(adjectives);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto r = Syn(dict, 1.0, 0.8, tagger, seed)->Obfuscate(Doc("d", text));
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r->metadata["adjective_replacements"], 4);
    EXPECT_EQ(r->metadata["replacement_count"], 9);
  }
  // Without a tagger the adjective constraint does not apply.
  auto r = Syn(dict, 1.0, 0.8)->Obfuscate(Doc("d", text));
  EXPECT_EQ(r->metadata["replacement_count"], 10);
}

TEST(SynonymTest, CountAndBudgetProperties) {
  const std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta",
                                          "Eps",   "zeta", "eta",   "theta"};
  std::map<std::string, std::vector<std::string>> dict = {
      {"alpha", {"a1", "a2"}}, {"beta", {"b1"}}, {"gamma", {"g1", "g2", "g3"}},
      {"eps", {"e1"}}};
  Rng rng(10);
  for (int i = 0; i < 300; ++i) {
    std::string text;
    const size_t n = 1 + rng.UniformIndex(30);
    size_t eligible = 0;
    for (size_t k = 0; k < n; ++k) {
      const std::string& w = vocab[rng.UniformIndex(vocab.size())];
      if (dict.count(AsciiLower(w))) ++eligible;
      text += w;
      text += rng.UniformIndex(4) == 0 ? ", " : " ";
    }
    const double frac = rng.UniformDouble();
    auto o = Syn(dict, frac, 0.8, nullptr, i);
    auto r = o->Obfuscate(Doc("d" + std::to_string(i), text));
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(SplitWhitespace(r->obfuscated_text).size(),
              SplitWhitespace(text).size());
    EXPECT_EQ(FindWords(r->obfuscated_text).size(), FindWords(text).size());
    EXPECT_LE(r->metadata["replacement_count"].get<size_t>(),
              static_cast<size_t>(std::ceil(frac * eligible)));
    EXPECT_EQ(*o->Obfuscate(Doc("d" + std::to_string(i), text)), *r);
  }
}

TEST(SynonymTest, ConfigValidationAndDictionaryFile) {
  EXPECT_FALSE(SynonymObfuscator::Create({{}, 1.5, -0.1, 0}).ok());
  testing::TempDir dir;
  testing::WriteText(dir / "d.json", R"({"Good": ["great", "fine"]})");
  auto d = LoadSynonymDictionary(dir / "d.json");
  ASSERT_TRUE(d.ok());
  EXPECT_THAT((*d)["good"], ::testing::ElementsAre("great", "fine"));
  testing::WriteText(dir / "bad.json", R"({"good": "great"})");
  EXPECT_EQ(CategoryOf(LoadSynonymDictionary(dir / "bad.json").status()),
            ErrorCategory::kData);
}

// --- chat ---

HttpChatClient::Options ChatOptions(const std::string& url,
                                    std::vector<int64_t>* sleeps = nullptr) {
  HttpChatClient::Options o;
  o.endpoint = url;
  o.api_key = "secret";
  o.retry.sleep = [sleeps](std::chrono::milliseconds d) {
    if (sleeps) sleeps->push_back(d.count());
  };
  return o;
}

Json ChatReply(const std::string& content) {
  return {{"choices", {{{"message", {{"role", "assistant"},
                                     {"content", content}}}}}}};
}

TEST(LlmPromptTest, SendsVerbatimPromptAndEchoes) {
  Json seen;
  std::string auth;
  testing::TestServer server(
      "/v1/chat/completions",
      [&](const httplib::Request& req, httplib::Response& res) {
        seen = Json::parse(req.body);
        auth = req.get_header_value("Authorization");
        const std::string msg = seen["messages"][0]["content"];
        const std::string text = msg.substr(msg.find("\n\n") + 2);
        res.set_content(ChatReply(text).dump(), "application/json");
      });
  auto client = HttpChatClient::Create(ChatOptions(server.url()));
  ASSERT_TRUE(client.ok());
  LlmPromptObfuscator o(std::shared_ptr<const ChatClient>(std::move(*client)));
  auto r = o.Obfuscate(Doc("d", "I loved this film."));
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->obfuscated_text, "I loved this film.");
  EXPECT_EQ(r->method_id, "llm_prompt");
  EXPECT_EQ(seen["model"], "gpt-3.5-turbo");
  EXPECT_EQ(seen["messages"].size(), 1u);
  EXPECT_THAT(seen["messages"][0]["content"].get<std::string>(),
              HasSubstr("Rewrite the following paragraph so that the "
                        "author’s style is obfuscated."));
  EXPECT_FALSE(seen.contains("temperature"));
  EXPECT_EQ(auth, "Bearer secret");
}

TEST(LlmPromptTest, EmptyReplyIsRemoteError) {
  testing::TestServer server(
      "/v1/chat/completions",
      [](const httplib::Request&, httplib::Response& res) {
        res.set_content(ChatReply("").dump(), "application/json");
      });
  LlmPromptObfuscator o(*HttpChatClient::Create(ChatOptions(server.url())));
  auto r = o.Obfuscate(Doc("doc-7", "text"));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(CategoryOf(r.status()), ErrorCategory::kRemote);
  EXPECT_THAT(r.status().message(), HasSubstr("doc-7"));
}

TEST(LlmPromptTest, RetriesTransientFailures) {
  std::atomic<int> calls{0};
  testing::TestServer server(
      "/v1/chat/completions",
      [&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
          res.status = 429;
          return;
        }
        res.set_content(ChatReply("rewritten").dump(), "application/json");
      });
  std::vector<int64_t> sleeps;
  LlmPromptObfuscator o(
      *HttpChatClient::Create(ChatOptions(server.url(), &sleeps)));
  auto r = o.Obfuscate(Doc("d", "text"));
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->obfuscated_text, "rewritten");
  EXPECT_THAT(sleeps, ::testing::ElementsAre(1000, 2000));
}

TEST(LlmPromptTest, ExhaustedRetriesAreRemoteError) {
  testing::TestServer server(
      "/v1/chat/completions",
      [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  auto opts = ChatOptions(server.url());
  opts.retry.max_attempts = 2;
  LlmPromptObfuscator o(*HttpChatClient::Create(opts));
  auto r = o.Obfuscate(Doc("d", "text"));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(CategoryOf(r.status()), ErrorCategory::kRemote);
}

TEST(LlmPromptTest, EnvironmentConfiguration) {
  unsetenv("AOTK_CHAT_ENDPOINT");
  EXPECT_EQ(CategoryOf(HttpChatClient::FromEnvironment({}).status()),
            ErrorCategory::kConfig);
  setenv("AOTK_CHAT_ENDPOINT", "http://127.0.0.1:1", 1);
  auto c = HttpChatClient::FromEnvironment({});
  EXPECT_TRUE(c.ok());
  unsetenv("AOTK_CHAT_ENDPOINT");
}

// --- policy ---

TEST(PolicyObfuscatorTest, ChunksInOrder) {
  // Keeps every word deterministically: an echo policy.
  std::shared_ptr<KeepDropPolicy> echo = *KeepDropPolicy::Create({16, 0.99});
  GenerationConfig g;
  g.top_p = 0.5;
  echo->set_generation_config(g);
  PolicyObfuscator o(echo, "sft", 20, 1);
  const std::string text =
      "First sentence here. Second one follows! Third comes last?";
  auto r = o.Obfuscate(Doc("d", text));
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->obfuscated_text, text);
  EXPECT_EQ(r->metadata["chunk_count"], 3);
  EXPECT_EQ(r->method_id, "sft");
}

TEST(PolicyObfuscatorTest, DeterministicGivenSeed) {
  std::shared_ptr<KeepDropPolicy> p = *KeepDropPolicy::Create({16, 0.5});
  PolicyObfuscator a(p, "policy", 1000, 7), b(p, "policy", 1000, 7),
      c(p, "policy", 1000, 8);
  const Document d =
      Doc("d", "one two three four five six seven eight nine ten eleven");
  EXPECT_EQ(a.Obfuscate(d)->obfuscated_text, b.Obfuscate(d)->obfuscated_text);
  bool differs = false;
  for (int i = 0; i < 5 && !differs; ++i) {
    PolicyObfuscator e(p, "policy", 1000, 100 + i);
    differs = e.Obfuscate(d)->obfuscated_text != a.Obfuscate(d)->obfuscated_text;
  }
  EXPECT_TRUE(differs);
  (void)c;
}

// --- batch ---

// Fails on chosen ids and counts its calls.
class FlakyObfuscator : public Obfuscator {
 public:
  explicit FlakyObfuscator(std::set<std::string> failing)
      : failing_(std::move(failing)) {}
  std::string method_id() const override { return "custom"; }
  mutable std::atomic<int> calls{0};

 protected:
  absl::StatusOr<std::string> Rewrite(const Document& doc,
                                      Json&) const override {
    ++calls;
    if (failing_.count(doc.id)) return RemoteError("service refused");
    return "rewritten " + doc.text;
  }

 private:
  std::set<std::string> failing_;
};

Corpus MakeCorpus(int n) {
  std::vector<Document> docs;
  for (int i = 1; i <= n; ++i) {
    docs.push_back(Doc("d" + std::to_string(i), "text " + std::to_string(i),
                       "a" + std::to_string(i % 2)));
  }
  return *Corpus::Create(std::move(docs));
}

TEST(BatchTest, IdentityOverTenDocs) {
  IdentityObfuscator id;
  auto report = BatchObfuscate(id, MakeCorpus(10));
  ASSERT_TRUE(report.ok());
  EXPECT_EQ(report->results.size(), 10u);
  EXPECT_TRUE(report->failures.empty());
}

TEST(BatchTest, FailuresAreCollected) {
  FlakyObfuscator o({"d3"});
  auto report = BatchObfuscate(o, MakeCorpus(5), {.threads = 3});
  ASSERT_TRUE(report.ok());
  ASSERT_EQ(report->results.size(), 4u);
  ASSERT_EQ(report->failures.size(), 1u);
  EXPECT_EQ(report->failures[0].document_id, "d3");
  EXPECT_THAT(report->failures[0].error, HasSubstr("service refused"));
  EXPECT_EQ(report->failures[0].category, ErrorCategory::kRemote);
  EXPECT_EQ(report->results[2].document_id, "d4");
}

TEST(BatchTest, AllFailingIsError) {
  FlakyObfuscator o({"d1", "d2"});
  auto report = BatchObfuscate(o, MakeCorpus(2));
  ASSERT_FALSE(report.ok());
  EXPECT_EQ(CategoryOf(report.status()), ErrorCategory::kRemote);
}

TEST(BatchTest, ResumesWithoutRecomputing) {
  testing::TempDir dir;
  const auto out = dir / "obf.jsonl";
  const Corpus corpus = MakeCorpus(12);
  FlakyObfuscator first({"d5", "d9"});
  auto r1 = BatchObfuscate(first, corpus, {4, out});
  ASSERT_TRUE(r1.ok());
  EXPECT_EQ(first.calls, 12);
  // Persisted in corpus order despite concurrency.
  auto persisted = ReadObfuscations(out);
  ASSERT_TRUE(persisted.ok());
  ASSERT_EQ(persisted->size(), 10u);
  EXPECT_EQ((*persisted)[4].document_id, "d6");

  // Torn tail from a crash mid-write.
  std::string bytes = testing::ReadText(out);
  testing::WriteText(out, bytes + "{\"document_id\": \"d5\", \"auth");

  FlakyObfuscator second({});
  auto r2 = BatchObfuscate(second, corpus, {2, out});
  ASSERT_TRUE(r2.ok()) << r2.status();
  EXPECT_EQ(second.calls, 2);
  EXPECT_EQ(r2->reused, 10u);
  EXPECT_EQ(r2->results.size(), 12u);
  EXPECT_EQ(r2->results[4].document_id, "d5");
  EXPECT_EQ(ReadObfuscations(out)->size(), 12u);

  IdentityObfuscator other;
  auto mismatch = BatchObfuscate(other, corpus, {1, out});
  EXPECT_EQ(CategoryOf(mismatch.status()), ErrorCategory::kConfig);
}

TEST(ObfuscationResultTest, JsonRoundTrip) {
  ObfuscationResult r{"d", "a", "orig", "obf", "synonyms",
                      Json{{"replacement_count", 3}}};
  EXPECT_EQ(*ObfuscationResultFromJson(ObfuscationResultToJson(r)), r);
  Json bad = ObfuscationResultToJson(r);
  bad["obfuscated_text"] = " ";
  EXPECT_FALSE(ObfuscationResultFromJson(bad).ok());
}

}  // namespace
}  // namespace aotk
