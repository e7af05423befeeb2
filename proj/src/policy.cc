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

#include "aotk/policy.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "aotk/random.h"
#include "aotk/status.h"
#include "aotk/text.h"

namespace aotk {
namespace {

// log(1 + e^x) without overflow.
double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

constexpr int kMaxResamples = 1000;

}  // namespace

absl::Status ValidateGenerationConfig(const GenerationConfig& cfg) {
  if (cfg.max_new_units < 1) {
    return ConfigError(absl::StrCat("max_new_units must be >= 1, got ",
                                    cfg.max_new_units));
  }
  if (!(cfg.temperature > 0.0)) {
    return ConfigError(
        absl::StrCat("temperature must be > 0, got ", cfg.temperature));
  }
  if (!(cfg.top_p > 0.0 && cfg.top_p <= 1.0)) {
    return ConfigError(absl::StrCat("top_p must be in (0, 1], got ", cfg.top_p));
  }
  return absl::OkStatus();
}

absl::Status TrainablePolicy::PpoUpdate(std::span<const PpoSample> samples,
                                        double learning_rate) {
  if (samples.empty()) return absl::OkStatus();
  double baseline = 0.0;
  for (const PpoSample& s : samples) baseline += s.shaped_reward;
  baseline /= static_cast<double>(samples.size());
  ClearGradient();
  for (const PpoSample& s : samples) {
    const double advantage = s.shaped_reward - baseline;
    AOTK_RETURN_IF_ERROR(AccumulateLogProbGradient(
        s.prompt, s.completion,
        advantage / static_cast<double>(samples.size())));
  }
  return ApplyUpdate(learning_rate);
}

// --- KeepDropPolicy ---

KeepDropPolicy::KeepDropPolicy(size_t buckets, double bias)
    : bias_(bias), weights_(buckets, 0.0), weight_grad_(buckets, 0.0) {}

absl::StatusOr<std::unique_ptr<KeepDropPolicy>> KeepDropPolicy::Create(
    Options opts) {
  if (opts.buckets == 0) return ConfigError("keep-drop policy needs buckets");
  if (!(opts.keep_probability > 0.0 && opts.keep_probability < 1.0)) {
    return ConfigError(absl::StrCat("keep_probability must be in (0, 1), got ",
                                    opts.keep_probability));
  }
  const double p = opts.keep_probability;
  return std::unique_ptr<KeepDropPolicy>(
      new KeepDropPolicy(opts.buckets, std::log(p / (1.0 - p))));
}

absl::StatusOr<std::unique_ptr<KeepDropPolicy>> KeepDropPolicy::FromFile(
    const std::filesystem::path& path) {
  std::unique_ptr<KeepDropPolicy> p(new KeepDropPolicy(1, 0.0));
  AOTK_RETURN_IF_ERROR(p->Load(path));
  return p;
}

size_t KeepDropPolicy::Bucket(std::string_view word) const {
  return Fnv1a64(AsciiLower(word)) % weights_.size();
}

double KeepDropPolicy::Logit(std::string_view word) const {
  return bias_ + weights_[Bucket(word)];
}

double KeepDropPolicy::KeepProbability(std::string_view word) const {
  return Sigmoid(Logit(word));
}

std::vector<double> KeepDropPolicy::GetParameters() const {
  std::vector<double> p;
  p.reserve(weights_.size() + 1);
  p.push_back(bias_);
  p.insert(p.end(), weights_.begin(), weights_.end());
  return p;
}

absl::Status KeepDropPolicy::SetParameters(std::span<const double> params) {
  if (params.size() != weights_.size() + 1) {
    return ArgumentError(absl::StrCat("expected ", weights_.size() + 1,
                                      " parameters, got ", params.size()));
  }
  bias_ = params[0];
  std::copy(params.begin() + 1, params.end(), weights_.begin());
  return absl::OkStatus();
}

absl::StatusOr<std::string> KeepDropPolicy::Generate(std::string_view prompt,
                                                     uint64_t seed) const {
  const std::vector<std::string_view> words = SplitWhitespace(prompt);
  if (words.empty()) return ArgumentError("generate: empty prompt");
  const GenerationConfig& gen = generation_config();
  AOTK_RETURN_IF_ERROR(ValidateGenerationConfig(gen));

  std::vector<double> keep(words.size());
  for (size_t i = 0; i < words.size(); ++i) {
    keep[i] = Sigmoid(Logit(words[i]) / gen.temperature);
  }
  Rng rng(seed);
  std::vector<bool> kept(words.size());
  bool any = false;
  for (int attempt = 0; attempt < kMaxResamples && !any; ++attempt) {
    for (size_t i = 0; i < words.size(); ++i) {
      const double p = keep[i];
      // Nucleus over the two outcomes: when the likelier one alone reaches
      // top_p, it is taken deterministically.
      if (std::max(p, 1.0 - p) >= gen.top_p) {
        kept[i] = p >= 0.5;
      } else {
        kept[i] = rng.UniformDouble() < p;
      }
      any = any || kept[i];
    }
  }
  if (!any) {
    // Vanishingly rare at sane parameters; fall back to the likeliest word.
    const size_t best = static_cast<size_t>(
        std::max_element(keep.begin(), keep.end()) - keep.begin());
    kept[best] = true;
  }
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (!kept[i]) continue;
    if (!out.empty()) out += ' ';
    out.append(words[i]);
  }
  return out;
}

absl::StatusOr<std::vector<bool>> KeepDropPolicy::Align(
    const std::vector<std::string_view>& words,
    std::string_view completion) const {
  const std::vector<std::string_view> target = SplitWhitespace(completion);
  if (target.empty()) return ArgumentError("log-prob of an empty completion");
  std::vector<bool> kept(words.size(), false);
  size_t t = 0;
  for (size_t i = 0; i < words.size() && t < target.size(); ++i) {
    if (words[i] == target[t]) {
      kept[i] = true;
      ++t;
    }
  }
  if (t != target.size()) {
    return BackendError(absl::StrCat(
        "completion is not an ordered subset of the prompt words (word ", t + 1,
        " '", std::string(target[t]), "' unmatched)"));
  }
  return kept;
}

absl::StatusOr<double> KeepDropPolicy::LogProb(
    std::string_view prompt, std::string_view completion) const {
  const std::vector<std::string_view> words = SplitWhitespace(prompt);
  if (words.empty()) return ArgumentError("log-prob: empty prompt");
  AOTK_ASSIGN_OR_RETURN(std::vector<bool> kept, Align(words, completion));
  double lp = 0.0;
  double log_all_dropped = 0.0;
  for (size_t i = 0; i < words.size(); ++i) {
    const double z = Logit(words[i]);
    lp -= kept[i] ? Softplus(-z) : Softplus(z);
    log_all_dropped -= Softplus(z);
  }
  // Condition on at least one kept word.
  return lp - std::log1p(-std::exp(log_all_dropped));
}

absl::Status KeepDropPolicy::AccumulateLogProbGradient(
    std::string_view prompt, std::string_view completion, double weight) {
  if (!std::isfinite(weight)) {
    return ArgumentError("gradient weight is not finite");
  }
  const std::vector<std::string_view> words = SplitWhitespace(prompt);
  if (words.empty()) return ArgumentError("gradient: empty prompt");
  AOTK_ASSIGN_OR_RETURN(std::vector<bool> kept, Align(words, completion));
  double log_all_dropped = 0.0;
  for (std::string_view w : words) log_all_dropped -= Softplus(Logit(w));
  const double all_dropped = std::exp(log_all_dropped);
  // d/dz_i [log p(decisions) - log(1 - Q)] = kept_i - p_i / (1 - Q), with
  // Q the probability that every word is dropped.
  for (size_t i = 0; i < words.size(); ++i) {
    const double p = Sigmoid(Logit(words[i]));
    const double g =
        weight * ((kept[i] ? 1.0 : 0.0) - p / (1.0 - all_dropped));
    bias_grad_ += g;
    weight_grad_[Bucket(words[i])] += g;
  }
  return absl::OkStatus();
}

absl::Status KeepDropPolicy::ApplyUpdate(double learning_rate) {
  if (!std::isfinite(learning_rate) || learning_rate < 0) {
    return ArgumentError("learning rate must be finite and >= 0");
  }
  bias_ += learning_rate * bias_grad_;
  for (size_t b = 0; b < weights_.size(); ++b) {
    weights_[b] += learning_rate * weight_grad_[b];
  }
  const bool finite =
      std::isfinite(bias_) &&
      std::all_of(weights_.begin(), weights_.end(),
                  [](double w) { return std::isfinite(w); });
  ClearGradient();
  if (!finite) return BackendError("parameters became non-finite");
  return absl::OkStatus();
}

void KeepDropPolicy::ClearGradient() {
  bias_grad_ = 0.0;
  std::fill(weight_grad_.begin(), weight_grad_.end(), 0.0);
}

absl::Status KeepDropPolicy::Save(const std::filesystem::path& path) const {
  Json sparse = Json::array();
  for (size_t b = 0; b < weights_.size(); ++b) {
    if (weights_[b] != 0.0) sparse.push_back(Json::array({b, weights_[b]}));
  }
  const Json j = {{"backend", kBackendId},
                  {"buckets", weights_.size()},
                  {"bias", bias_},
                  {"weights", sparse}};
  return WriteFileAtomically(path, j.dump() + "\n");
}

absl::Status KeepDropPolicy::Load(const std::filesystem::path& path) {
  AOTK_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  const Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  const std::string where = path.string();
  if (!j.is_object() || j.value("backend", "") != kBackendId) {
    return DataError(absl::StrCat(where, ": not a ", kBackendId, " checkpoint"));
  }
  if (!j.contains("buckets") || !j["buckets"].is_number_unsigned() ||
      j["buckets"].get<size_t>() == 0 || !j.contains("bias") ||
      !j["bias"].is_number() || !j.contains("weights") ||
      !j["weights"].is_array()) {
    return DataError(absl::StrCat(where, ": malformed checkpoint"));
  }
  const size_t buckets = j["buckets"].get<size_t>();
  std::vector<double> weights(buckets, 0.0);
  for (const Json& e : j["weights"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() ||
        !e[1].is_number() || e[0].get<size_t>() >= buckets) {
      return DataError(absl::StrCat(where, ": malformed weight entry"));
    }
    weights[e[0].get<size_t>()] = e[1].get<double>();
  }
  bias_ = j["bias"].get<double>();
  weights_ = std::move(weights);
  weight_grad_.assign(buckets, 0.0);
  bias_grad_ = 0.0;
  return absl::OkStatus();
}

std::unique_ptr<TrainablePolicy> KeepDropPolicy::CloneTrainable() const {
  return std::unique_ptr<TrainablePolicy>(new KeepDropPolicy(*this));
}

}  // namespace aotk
