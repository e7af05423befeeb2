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

// Text-rewriting policies. A policy samples a completion for a prompt and
// scores completions by log-probability; trainable policies additionally
// expose gradients of that log-probability.

#ifndef AOTK_POLICY_H_
#define AOTK_POLICY_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "aotk/io.h"

namespace aotk {

struct GenerationConfig {
  int max_new_units = 512;
  double temperature = 1.0;
  double top_p = 1.0;
};

absl::Status ValidateGenerationConfig(const GenerationConfig& cfg);

class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string backend_id() const = 0;
  const GenerationConfig& generation_config() const { return generation_; }
  void set_generation_config(const GenerationConfig& cfg) { generation_ = cfg; }

  // Same prompt, seed, and parameters give the same completion.
  virtual absl::StatusOr<std::string> Generate(std::string_view prompt,
                                               uint64_t seed) const = 0;

  // log pi(completion | prompt) at temperature 1.
  virtual absl::StatusOr<double> LogProb(std::string_view prompt,
                                         std::string_view completion) const = 0;

  virtual std::unique_ptr<Policy> Clone() const = 0;

 private:
  GenerationConfig generation_;
};

// One sampled completion with its shaped reward, as handed to a PPO update.
struct PpoSample {
  std::string prompt;
  std::string completion;
  double shaped_reward = 0.0;
};

class TrainablePolicy : public Policy {
 public:
  // Adds weight * grad log pi(completion | prompt) to the gradient buffer.
  virtual absl::Status AccumulateLogProbGradient(std::string_view prompt,
                                                 std::string_view completion,
                                                 double weight) = 0;
  // Moves parameters by learning_rate * buffer (ascent) and clears it.
  virtual absl::Status ApplyUpdate(double learning_rate) = 0;
  virtual void ClearGradient() = 0;

  // Backend-specific PPO inner update. The default is one on-policy
  // policy-gradient step with the batch-mean reward as baseline.
  virtual absl::Status PpoUpdate(std::span<const PpoSample> samples,
                                 double learning_rate);

  virtual absl::Status Save(const std::filesystem::path& path) const = 0;
  virtual absl::Status Load(const std::filesystem::path& path) = 0;

  virtual std::unique_ptr<TrainablePolicy> CloneTrainable() const = 0;
  std::unique_ptr<Policy> Clone() const override { return CloneTrainable(); }
};

// Word-level edit policy: every whitespace-separated word of the prompt is
// kept independently with probability sigmoid(bias + w[hash(word)]), and the
// kept words are joined by single spaces. Outcomes with no kept word are
// excluded, so log-probabilities are conditional on a non-empty completion.
// A completion is scored along its leftmost alignment to the prompt words;
// completions that are not an ordered subset of them are an error.
class KeepDropPolicy : public TrainablePolicy {
 public:
  static constexpr char kBackendId[] = "toy/keep-drop";

  struct Options {
    size_t buckets = 4096;
    double keep_probability = 0.85;  // initial, for every word
  };

  static absl::StatusOr<std::unique_ptr<KeepDropPolicy>> Create(Options opts);
  static absl::StatusOr<std::unique_ptr<KeepDropPolicy>> FromFile(
      const std::filesystem::path& path);

  std::string backend_id() const override { return kBackendId; }
  absl::StatusOr<std::string> Generate(std::string_view prompt,
                                       uint64_t seed) const override;
  absl::StatusOr<double> LogProb(std::string_view prompt,
                                 std::string_view completion) const override;

  absl::Status AccumulateLogProbGradient(std::string_view prompt,
                                         std::string_view completion,
                                         double weight) override;
  absl::Status ApplyUpdate(double learning_rate) override;
  void ClearGradient() override;

  absl::Status Save(const std::filesystem::path& path) const override;
  absl::Status Load(const std::filesystem::path& path) override;
  std::unique_ptr<TrainablePolicy> CloneTrainable() const override;

  // Keep probability of `word` at temperature 1.
  double KeepProbability(std::string_view word) const;

  // Flat parameter vector: the bias, then one weight per bucket.
  std::vector<double> GetParameters() const;
  absl::Status SetParameters(std::span<const double> params);

 private:
  KeepDropPolicy(size_t buckets, double bias);

  size_t Bucket(std::string_view word) const;
  double Logit(std::string_view word) const;
  // Keep/drop decision per prompt word along the leftmost alignment.
  absl::StatusOr<std::vector<bool>> Align(
      const std::vector<std::string_view>& words,
      std::string_view completion) const;

  double bias_;
  std::vector<double> weights_;
  double bias_grad_ = 0.0;
  std::vector<double> weight_grad_;
};

}  // namespace aotk

#endif  // AOTK_POLICY_H_
