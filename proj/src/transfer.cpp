// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "convscreen/transfer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "convscreen/calibration.hpp"
#include "convscreen/util.hpp"

namespace convscreen {

namespace {

void check_plan(const TransferPlan& plan, bool need_source) {
  if (plan.finetune_lr_factor <= 0.0 || plan.finetune_lr_factor > 1.0)
    throw std::invalid_argument("finetune_lr_factor must lie in (0,1]");
  if (!plan.freeze_embeddings)
    throw std::invalid_argument(
        "embedding providers are frozen by construction");
  if (plan.window < 1 || plan.stride < 1)
    throw std::invalid_argument("window and stride must be >= 1");
  if (plan.target_train.conversations.empty())
    throw std::invalid_argument("target train corpus is empty");
  if (plan.target_valid.conversations.empty())
    throw std::invalid_argument("target validation corpus is empty");
  if (need_source && plan.source_train.conversations.empty())
    throw std::invalid_argument("source train corpus is empty");
  if (need_source && plan.source_valid.conversations.empty())
    throw std::invalid_argument("source validation corpus is empty");
}

std::string config_snapshot(const TransferPlan& plan, TransferMode mode,
                            ThresholdRule rule, int embed_dim) {
  char buf[512];
  std::snprintf(
      buf, sizeof(buf),
      "mode=%s seed=%llu hidden=%d attention=%d window=%d stride=%d "
      "embed_dim=%d lr=%.17g lr_finetune_factor=%.17g epochs=%d batch=%d "
      "patience=%d clip=%.17g class_weighting=%d threshold_rule=%s",
      transfer_mode_name(mode),
      static_cast<unsigned long long>(plan.seed), plan.model.hidden_dim,
      plan.model.attention ? 1 : 0, plan.window, plan.stride, embed_dim,
      plan.pretrain.learning_rate, plan.finetune_lr_factor,
      plan.pretrain.max_epochs, plan.pretrain.batch_size,
      plan.pretrain.patience, plan.pretrain.clip_norm,
      plan.pretrain.class_weighting ? 1 : 0, threshold_rule_name(rule));
  return buf;
}

}  // namespace

const char* transfer_mode_name(TransferMode mode) {
  switch (mode) {
    case TransferMode::target_only:
      return "target-only";
    case TransferMode::source_no_finetune:
      return "source-no-finetune";
    case TransferMode::source_finetune:
      return "source+finetune";
  }
  throw std::invalid_argument("unknown transfer mode");
}

TransferMode transfer_mode_from_name(const std::string& name) {
  if (name == "target-only") return TransferMode::target_only;
  if (name == "source-no-finetune") return TransferMode::source_no_finetune;
  if (name == "source+finetune") return TransferMode::source_finetune;
  throw std::invalid_argument("unknown transfer mode: " + name);
}

TrainedChunkModel pretrain(const TransferPlan& plan,
                           const EmbeddingProvider& provider, Exec exec) {
  check_plan(plan, /*need_source=*/true);
  TrainConfig config = plan.pretrain;
  config.seed = derive_seed(plan.seed, "pretrain");
  return train_on_corpora(plan.source_train, plan.source_valid, provider,
                          plan.window, plan.stride, plan.model, config, exec);
}

TrainedChunkModel fine_tune(const RecurrentChunkModel& model,
                            const TransferPlan& plan,
                            const EmbeddingProvider& provider, Exec exec) {
  check_plan(plan, /*need_source=*/false);
  TrainConfig config = plan.pretrain;
  config.learning_rate = plan.pretrain.learning_rate * plan.finetune_lr_factor;
  config.seed = derive_seed(plan.seed, "finetune");
  return train_on_corpora(plan.target_train, plan.target_valid, provider,
                          plan.window, plan.stride, plan.model, config, exec,
                          &model);
}

MetricSet compute_metrics(const std::vector<int>& predictions,
                          const std::vector<int>& truths) {
  const ConfusionCounts cc = confusion(predictions, truths);
  MetricSet m;
  m.uar = uar(cc);
  m.uap = uap(cc, /*zero_for_undefined=*/true);
  m.macro_f1 = macro_f1(cc);
  m.accuracy = accuracy(cc);
  return m;
}

ExperimentResult run_experiment(const TransferPlan& plan, TransferMode mode,
                                const EmbeddingProvider& provider,
                                ThresholdRule rule, Exec exec) {
  check_plan(plan, mode != TransferMode::target_only);
  if (plan.target_test.conversations.empty())
    throw std::invalid_argument("target test corpus is empty");
  const auto t0 = std::chrono::steady_clock::now();

  ExperimentResult result;
  result.mode = mode;
  result.seed = plan.seed;
  result.config_snapshot =
      config_snapshot(plan, mode, rule, provider.dim());
  result.config_hash = fnv1a64(result.config_snapshot);

  RecurrentChunkModel model(provider.dim(), plan.model.hidden_dim,
                            plan.model.attention);
  if (mode == TransferMode::target_only) {
    TrainConfig config = plan.pretrain;
    config.seed = derive_seed(plan.seed, "target-only");
    result.audit.push_back("train:target-train+target-valid");
    model = train_on_corpora(plan.target_train, plan.target_valid, provider,
                             plan.window, plan.stride, plan.model, config,
                             exec)
                .model;
  } else {
    result.audit.push_back("pretrain:source-train+source-valid");
    TrainedChunkModel pre = pretrain(plan, provider, exec);
    result.pretrain_param_hash = digest_doubles(pre.model.params());
    if (mode == TransferMode::source_finetune) {
      result.audit.push_back("finetune:target-train+target-valid");
      model = fine_tune(pre.model, plan, provider, exec).model;
    } else {
      model = std::move(pre.model);
    }
  }
  result.param_hash = digest_doubles(model.params());

  result.audit.push_back("calibrate:target-valid");
  const std::vector<ChunkPredictions> valid_preds = predict_corpus(
      model, plan.target_valid, provider, plan.window, plan.stride, exec);
  const CalibrationResult cal = calibrate_threshold(valid_preds, rule);
  result.t_best = cal.threshold;
  result.valid_accuracy = cal.accuracy;

  result.audit.push_back("evaluate:target-test");
  const std::vector<ChunkPredictions> test_preds = predict_corpus(
      model, plan.target_test, provider, plan.window, plan.stride, exec);
  std::vector<int> predictions, truths;
  predictions.reserve(test_preds.size());
  truths.reserve(test_preds.size());
  for (const ChunkPredictions& cp : test_preds) {
    predictions.push_back(classify_conversation(cp, cal.threshold, rule));
    truths.push_back(cp.label);
  }
  result.test = compute_metrics(predictions, truths);

  result.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

SearchResult random_search(const Corpus& train, const Corpus& valid,
                           const EmbeddingProvider& provider,
                           const SearchSpace& space, int budget,
                           std::uint64_t seed, const TrainConfig& base,
                           bool attention, int stride, Exec exec) {
  if (budget < 1) throw std::invalid_argument("search budget must be >= 1");
  if (space.lr_min <= 0.0 || space.lr_max < space.lr_min ||
      space.hidden_max < space.hidden_min || space.hidden_min < 1 ||
      space.window_max < space.window_min || space.window_min < 1 ||
      space.batch_max < space.batch_min || space.batch_min < 1)
    throw std::invalid_argument("empty or invalid search space");

  // All trial configurations are drawn up front from one stream, so the
  // sampled sequence is independent of evaluation timing.
  std::mt19937_64 rng(derive_seed(seed, "search"));
  std::vector<TrialResult> trials(static_cast<std::size_t>(budget));
  for (int i = 0; i < budget; ++i) {
    TrialResult& t = trials[i];
    t.index = i;
    t.config = base;
    t.config.learning_rate = std::exp(
        uniform_real(rng, std::log(space.lr_min), std::log(space.lr_max)));
    t.hidden_dim = static_cast<int>(
        uniform_int(rng, space.hidden_min, space.hidden_max));
    t.window =
        static_cast<int>(uniform_int(rng, space.window_min, space.window_max));
    t.config.batch_size =
        static_cast<int>(uniform_int(rng, space.batch_min, space.batch_max));
    t.config.seed = derive_seed(seed, "trial", static_cast<std::uint64_t>(i));
  }

  const EmbeddedCorpus etrain = embed_corpus(train, provider, exec);
  const EmbeddedCorpus evalid = embed_corpus(valid, provider, exec);
  for (TrialResult& t : trials) {
    const ChunkModelSpec spec{t.hidden_dim, attention};
    const TrainedChunkModel trained = train_chunk_model(
        etrain, make_chunk_refs(etrain, t.window, stride), evalid,
        make_chunk_refs(evalid, t.window, stride), spec, t.config, exec);
    const std::vector<ChunkPredictions> preds =
        predict_embedded(trained.model, evalid, t.window, stride, exec);
    const CalibrationResult cal = calibrate_threshold(preds);
    t.t_best = cal.threshold;
    std::vector<int> predictions, truths;
    for (const ChunkPredictions& cp : preds) {
      predictions.push_back(classify_conversation(cp, cal.threshold));
      truths.push_back(cp.label);
    }
    t.valid_uar = uar(confusion(predictions, truths));
  }

  SearchResult out;
  out.best = trials.front();
  for (const TrialResult& t : trials)
    if (t.valid_uar > out.best.valid_uar) out.best = t;
  out.trials = std::move(trials);
  return out;
}

std::string report_table(const std::vector<ExperimentResult>& results) {
  if (results.empty()) throw std::invalid_argument("no results to report");
  const TransferMode modes[3] = {TransferMode::target_only,
                                 TransferMode::source_no_finetune,
                                 TransferMode::source_finetune};
  std::set<std::uint64_t> seeds;
  for (const ExperimentResult& r : results) seeds.insert(r.seed);

  auto cell = [&](std::uint64_t seed, TransferMode mode) -> std::string {
    for (const ExperimentResult& r : results)
      if (r.seed == seed && r.mode == mode) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.3f", r.test.uar);
        return buf;
      }
    return "-";
  };

  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-12s %-12s %-19s %-16s\n", "seed",
                "target-only", "source-no-finetune", "source+finetune");
  out += line;
  for (std::uint64_t seed : seeds) {
    std::snprintf(line, sizeof(line), "%-12llu %-12s %-19s %-16s\n",
                  static_cast<unsigned long long>(seed),
                  cell(seed, modes[0]).c_str(), cell(seed, modes[1]).c_str(),
                  cell(seed, modes[2]).c_str());
    out += line;
  }
  std::string means[3];
  for (int m = 0; m < 3; ++m) {
    double sum = 0.0;
    int n = 0;
    for (const ExperimentResult& r : results)
      if (r.mode == modes[m]) {
        sum += r.test.uar;
        ++n;
      }
    if (n == 0) {
      means[m] = "-";
    } else {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.3f", sum / n);
      means[m] = buf;
    }
  }
  std::snprintf(line, sizeof(line), "%-12s %-12s %-19s %-16s\n", "mean",
                means[0].c_str(), means[1].c_str(), means[2].c_str());
  out += line;
  return out;
}

std::string report_records(const std::vector<ExperimentResult>& results) {
  std::string out;
  for (const ExperimentResult& r : results) {
    nlohmann::json rec;
    rec["mode"] = transfer_mode_name(r.mode);
    rec["seed"] = r.seed;
    rec["uar"] = r.test.uar;
    rec["uap"] = r.test.uap;
    rec["macro_f1"] = r.test.macro_f1;
    rec["accuracy"] = r.test.accuracy;
    rec["t_best"] = r.t_best;
    rec["valid_accuracy"] = r.valid_accuracy;
    rec["config"] = r.config_snapshot;
    rec["config_hash"] = hex64(r.config_hash);
    out += rec.dump();
    out += '\n';
  }
  return out;
}

}  // namespace convscreen
