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

#include "aotk/po_align.h"

#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "aotk/random.h"
#include "aotk/status.h"

namespace aotk {
namespace {

double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double Mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

std::filesystem::path EpochDir(const TrainOptions& o, int epoch) {
  return o.checkpoint_dir / absl::StrCat("epoch-", epoch);
}

struct RunState {
  std::unique_ptr<TrainablePolicy> policy;
  int start_epoch = 1;  // first epoch still to run
  int global_step = 0;
};

// Restores the newest complete checkpoint (if resuming) and trims the step
// log to match it.
absl::StatusOr<RunState> PrepareRun(const TrainablePolicy& initial,
                                    const TrainConfig& cfg,
                                    const TrainOptions& options) {
  AOTK_RETURN_IF_ERROR(ValidateTrainConfig(cfg));
  if (options.checkpoint_dir.empty() || options.log_path.empty()) {
    return ConfigError("training needs a checkpoint directory and a log path");
  }
  std::error_code ec;
  std::filesystem::create_directories(options.checkpoint_dir, ec);
  if (ec) {
    return DataError(absl::StrCat("cannot create ",
                                  options.checkpoint_dir.string(), ": ",
                                  ec.message()));
  }
  RunState state;
  state.policy = initial.CloneTrainable();
  if (options.resume) {
    for (int e = cfg.epochs; e >= 1; --e) {
      const std::filesystem::path state_file = EpochDir(options, e) / "state.json";
      if (!std::filesystem::exists(state_file)) continue;
      AOTK_ASSIGN_OR_RETURN(std::string text, ReadFile(state_file));
      const Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
      if (!j.is_object() || !j.value("complete", false)) continue;
      if (j.value("config", Json()) != TrainConfigToJson(cfg)) {
        return ConfigError(absl::StrCat(
            "checkpoint ", state_file.string(),
            " was written with a different training config"));
      }
      AOTK_RETURN_IF_ERROR(
          state.policy->Load(EpochDir(options, e) / "weights.json"));
      state.start_epoch = e + 1;
      state.global_step = j.value("global_step", 0);
      break;
    }
  }
  // Keep log records of completed epochs only.
  std::vector<Json> kept;
  if (state.start_epoch > 1 && std::filesystem::exists(options.log_path)) {
    AOTK_ASSIGN_OR_RETURN(std::vector<Json> records,
                          RecoverJsonLines(options.log_path));
    for (Json& r : records) {
      if (r.value("step", -1) < state.global_step) kept.push_back(std::move(r));
    }
  }
  AOTK_RETURN_IF_ERROR(WriteJsonLines(options.log_path, kept));
  return state;
}

absl::Status WriteCheckpoint(const TrainablePolicy& policy,
                             const TrainConfig& cfg,
                             const TrainOptions& options, int epoch,
                             int global_step) {
  const std::filesystem::path dir = EpochDir(options, epoch);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return DataError(
        absl::StrCat("cannot create ", dir.string(), ": ", ec.message()));
  }
  AOTK_RETURN_IF_ERROR(policy.Save(dir / "weights.json"));
  // The state file is written last and marks the checkpoint complete.
  const Json state = {{"backend", policy.backend_id()},
                      {"config", TrainConfigToJson(cfg)},
                      {"epoch", epoch},
                      {"global_step", global_step},
                      {"complete", true}};
  return WriteFileAtomically(dir / "state.json", state.dump(2) + "\n");
}

absl::Status Diverged(int step, const TrainOptions& options, int last_epoch,
                      std::string_view what) {
  const std::string kept =
      last_epoch > 0 ? EpochDir(options, last_epoch).string() : "none";
  return BackendError(absl::StrCat("training diverged at step ", step, " (",
                                   std::string(what),
                                   "); last good checkpoint: ", kept));
}

std::vector<size_t> EpochOrder(size_t n, uint64_t seed, std::string_view tag,
                               int epoch) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(seed, absl::StrCat(std::string(tag), "/epoch/", epoch)));
  rng.Shuffle(order);
  return order;
}

}  // namespace

std::string_view AlgorithmName(Algorithm a) {
  return a == Algorithm::kPpo ? "ppo" : "dpo";
}

TrainConfig DefaultTrainConfig(Algorithm algorithm) {
  TrainConfig cfg;
  cfg.algorithm = algorithm;
  cfg.epochs = 3;
  if (algorithm == Algorithm::kPpo) {
    cfg.learning_rate = 1.47e-5;
    cfg.batch_size = 16;
    cfg.beta = 0.2;
  } else {
    cfg.learning_rate = 2.96e-5;
    cfg.batch_size = 32;
    cfg.beta = 0.1;
  }
  return cfg;
}

absl::Status ValidateTrainConfig(const TrainConfig& cfg) {
  std::vector<std::string> bad;
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    bad.push_back(
        absl::StrCat("learning_rate must be > 0, got ", cfg.learning_rate));
  }
  if (cfg.batch_size < 1) {
    bad.push_back(absl::StrCat("batch_size must be >= 1, got ", cfg.batch_size));
  }
  if (cfg.epochs < 1) {
    bad.push_back(absl::StrCat("epochs must be >= 1, got ", cfg.epochs));
  }
  if (!(cfg.beta > 0.0) || !std::isfinite(cfg.beta)) {
    bad.push_back(absl::StrCat("beta must be > 0, got ", cfg.beta));
  }
  if (bad.empty()) return absl::OkStatus();
  std::string msg = bad[0];
  for (size_t i = 1; i < bad.size(); ++i) absl::StrAppend(&msg, "; ", bad[i]);
  return ConfigError(msg);
}

Json TrainConfigToJson(const TrainConfig& cfg) {
  return Json{{"algorithm", AlgorithmName(cfg.algorithm)},
              {"learning_rate", cfg.learning_rate},
              {"batch_size", cfg.batch_size},
              {"epochs", cfg.epochs},
              {"beta", cfg.beta},
              {"seed", cfg.seed}};
}

absl::StatusOr<TrainConfig> TrainConfigFromJson(const Json& j) {
  if (!j.is_object()) return DataError("train config is not an object");
  const std::string algo = j.value("algorithm", "");
  if (algo != "ppo" && algo != "dpo") {
    return ConfigError(absl::StrCat("unknown algorithm '", algo, "'"));
  }
  TrainConfig cfg = DefaultTrainConfig(algo == "ppo" ? Algorithm::kPpo
                                                     : Algorithm::kDpo);
  try {
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.beta = j.value("beta", cfg.beta);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const Json::exception& e) {
    return ConfigError(absl::StrCat("train config: ", e.what()));
  }
  AOTK_RETURN_IF_ERROR(ValidateTrainConfig(cfg));
  return cfg;
}

absl::StatusOr<DpoLossValue> DpoLoss(double logratio_chosen,
                                     double logratio_rejected, double beta) {
  if (!std::isfinite(logratio_chosen) || !std::isfinite(logratio_rejected) ||
      !std::isfinite(beta)) {
    return ArgumentError("DPO loss of a non-finite input");
  }
  if (!(beta > 0.0)) {
    return ArgumentError(absl::StrCat("DPO beta must be > 0, got ", beta));
  }
  const double z = beta * (logratio_chosen - logratio_rejected);
  return DpoLossValue{Softplus(-z), -beta * Sigmoid(-z)};
}

absl::StatusOr<std::vector<PpoScored>> PpoStepRewards(
    std::span<const std::pair<std::string, std::string>> batch,
    const RewardScorer& scorer, const Policy& reference, const Policy& policy,
    double beta) {
  AOTK_ASSIGN_OR_RETURN(std::vector<RewardBreakdown> rewards,
                        scorer.ScoreBatch(batch));
  std::vector<PpoScored> out;
  out.reserve(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto& [prompt, completion] = batch[i];
    auto lp = policy.LogProb(prompt, completion);
    auto lp_ref = reference.LogProb(prompt, completion);
    if (!lp.ok() || !lp_ref.ok()) {
      const absl::Status& s = !lp.ok() ? lp.status() : lp_ref.status();
      return BackendError(
          absl::StrCat("log-prob of sample ", i, ": ", s.message()));
    }
    PpoScored p{prompt, completion, rewards[i], std::max(0.0, *lp - *lp_ref),
                0.0};
    AOTK_ASSIGN_OR_RETURN(p.shaped_reward,
                          KlShapedReward(p.rewards.combined, p.kl, beta));
    out.push_back(std::move(p));
  }
  return out;
}

absl::StatusOr<TrainResult> TrainDpo(std::span<const PreferenceTriple> triples,
                                     const Policy& reference,
                                     const TrainablePolicy& initial,
                                     const TrainConfig& cfg,
                                     const TrainOptions& options) {
  if (cfg.algorithm != Algorithm::kDpo) {
    return ConfigError("TrainDpo needs a dpo config");
  }
  if (triples.empty()) return DataError("DPO training needs preference pairs");
  AOTK_ASSIGN_OR_RETURN(RunState state, PrepareRun(initial, cfg, options));
  TrainablePolicy& policy = *state.policy;

  // The reference is frozen, so its log-probs are computed once.
  std::vector<double> ref_c(triples.size()), ref_r(triples.size());
  for (size_t i = 0; i < triples.size(); ++i) {
    auto c = reference.LogProb(triples[i].prompt, triples[i].chosen);
    auto r = reference.LogProb(triples[i].prompt, triples[i].rejected);
    if (!c.ok() || !r.ok()) {
      return Annotate(!c.ok() ? c.status() : r.status(),
                      absl::StrCat("reference log-prob of pair ",
                                   triples[i].prompt_id));
    }
    ref_c[i] = *c;
    ref_r[i] = *r;
  }

  AOTK_ASSIGN_OR_RETURN(JsonlAppender log, JsonlAppender::Open(options.log_path));
  const size_t bs = static_cast<size_t>(cfg.batch_size);
  TrainResult result;
  result.resumed_from_epoch = state.start_epoch - 1;
  for (int epoch = state.start_epoch; epoch <= cfg.epochs; ++epoch) {
    const std::vector<size_t> order =
        EpochOrder(triples.size(), cfg.seed, "dpo", epoch);
    for (size_t begin = 0; begin < order.size(); begin += bs) {
      const size_t end = std::min(order.size(), begin + bs);
      const double scale = 1.0 / static_cast<double>(end - begin);
      std::vector<double> lrc, lrr, losses;
      std::vector<std::string> ids;
      double priv_c = 0, priv_r = 0, util_c = 0, util_r = 0;
      policy.ClearGradient();
      for (size_t k = begin; k < end; ++k) {
        const size_t i = order[k];
        const PreferenceTriple& t = triples[i];
        auto c = policy.LogProb(t.prompt, t.chosen);
        auto r = policy.LogProb(t.prompt, t.rejected);
        if (!c.ok() || !r.ok()) {
          return Annotate(!c.ok() ? c.status() : r.status(),
                          absl::StrCat("policy log-prob of pair ", t.prompt_id));
        }
        const double a = *c - ref_c[i];
        const double b = *r - ref_r[i];
        auto loss = DpoLoss(a, b, cfg.beta);
        if (!loss.ok() || !std::isfinite(loss->loss)) {
          return Diverged(state.global_step, options, epoch - 1,
                          "non-finite DPO loss");
        }
        // Descent on the mean loss: chosen log-prob moves by -g, rejected by
        // +g, where g is d loss / d margin.
        AOTK_RETURN_IF_ERROR(policy.AccumulateLogProbGradient(
            t.prompt, t.chosen, -loss->grad_wrt_margin * scale));
        AOTK_RETURN_IF_ERROR(policy.AccumulateLogProbGradient(
            t.prompt, t.rejected, loss->grad_wrt_margin * scale));
        lrc.push_back(a);
        lrr.push_back(b);
        losses.push_back(loss->loss);
        ids.push_back(t.prompt_id);
        priv_c += t.chosen_rewards.privacy * scale;
        priv_r += t.rejected_rewards.privacy * scale;
        util_c += t.chosen_rewards.utility * scale;
        util_r += t.rejected_rewards.utility * scale;
      }
      double acc = 0.0;
      for (size_t k = 0; k < lrc.size(); ++k) acc += lrc[k] > lrr[k] ? scale : 0;
      Json rec = {{"algorithm", "dpo"},
                  {"step", state.global_step},
                  {"epoch", epoch},
                  {"loss", Mean(losses)},
                  {"reward_accuracy", acc},
                  {"pair_ids", ids},
                  {"logratio_chosen", lrc},
                  {"logratio_rejected", lrr},
                  {"mean_chosen_privacy", priv_c},
                  {"mean_rejected_privacy", priv_r},
                  {"mean_chosen_utility", util_c},
                  {"mean_rejected_utility", util_r}};
      AOTK_RETURN_IF_ERROR(log.Append(rec));
      if (absl::Status s = policy.ApplyUpdate(cfg.learning_rate); !s.ok()) {
        return Diverged(state.global_step, options, epoch - 1, std::string(s.message()));
      }
      ++state.global_step;
    }
    AOTK_RETURN_IF_ERROR(
        WriteCheckpoint(policy, cfg, options, epoch, state.global_step));
  }
  result.epochs_completed = cfg.epochs;
  result.steps = state.global_step;
  result.policy = std::move(state.policy);
  return result;
}

absl::StatusOr<TrainResult> TrainPpo(std::span<const Prompt> prompts,
                                     const RewardScorer& scorer,
                                     const Policy& reference,
                                     const TrainablePolicy& initial,
                                     const TrainConfig& cfg,
                                     const TrainOptions& options) {
  if (cfg.algorithm != Algorithm::kPpo) {
    return ConfigError("TrainPpo needs a ppo config");
  }
  if (prompts.empty()) return DataError("PPO training needs prompts");
  AOTK_ASSIGN_OR_RETURN(RunState state, PrepareRun(initial, cfg, options));
  TrainablePolicy& policy = *state.policy;
  AOTK_ASSIGN_OR_RETURN(JsonlAppender log, JsonlAppender::Open(options.log_path));
  const size_t bs = static_cast<size_t>(cfg.batch_size);
  TrainResult result;
  result.resumed_from_epoch = state.start_epoch - 1;
  for (int epoch = state.start_epoch; epoch <= cfg.epochs; ++epoch) {
    const std::vector<size_t> order =
        EpochOrder(prompts.size(), cfg.seed, "ppo", epoch);
    for (size_t begin = 0; begin < order.size(); begin += bs) {
      const size_t end = std::min(order.size(), begin + bs);
      std::vector<std::pair<std::string, std::string>> batch;
      std::vector<std::string> ids;
      for (size_t k = begin; k < end; ++k) {
        const Prompt& p = prompts[order[k]];
        const uint64_t seed =
            DeriveSeed(cfg.seed, absl::StrCat("ppo/", epoch, "/", p.id));
        auto completion = policy.Generate(p.text, seed);
        if (!completion.ok()) {
          return Annotate(completion.status(),
                          absl::StrCat("sampling for prompt ", p.id));
        }
        batch.emplace_back(p.text, *std::move(completion));
        ids.push_back(p.id);
      }
      AOTK_ASSIGN_OR_RETURN(
          std::vector<PpoScored> scored,
          PpoStepRewards(batch, scorer, reference, policy, cfg.beta));
      std::vector<double> kl, shaped, util, priv, comb;
      std::vector<PpoSample> samples;
      for (const PpoScored& s : scored) {
        if (!std::isfinite(s.shaped_reward)) {
          return Diverged(state.global_step, options, epoch - 1,
                          "non-finite shaped reward");
        }
        kl.push_back(s.kl);
        shaped.push_back(s.shaped_reward);
        util.push_back(s.rewards.utility);
        priv.push_back(s.rewards.privacy);
        comb.push_back(s.rewards.combined);
        samples.push_back({s.prompt, s.completion, s.shaped_reward});
      }
      Json rec = {{"algorithm", "ppo"},
                  {"step", state.global_step},
                  {"epoch", epoch},
                  {"mean_shaped_reward", Mean(shaped)},
                  {"mean_kl", Mean(kl)},
                  {"prompt_ids", ids},
                  {"kl", kl},
                  {"shaped_reward", shaped},
                  {"mean_utility", Mean(util)},
                  {"mean_privacy", Mean(priv)},
                  {"mean_combined", Mean(comb)}};
      AOTK_RETURN_IF_ERROR(log.Append(rec));
      if (absl::Status s = policy.PpoUpdate(samples, cfg.learning_rate);
          !s.ok()) {
        return Diverged(state.global_step, options, epoch - 1, std::string(s.message()));
      }
      ++state.global_step;
    }
    AOTK_RETURN_IF_ERROR(
        WriteCheckpoint(policy, cfg, options, epoch, state.global_step));
  }
  result.epochs_completed = cfg.epochs;
  result.steps = state.global_step;
  result.policy = std::move(state.policy);
  return result;
}

}  // namespace aotk
