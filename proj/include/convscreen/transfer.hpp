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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convscreen/corpus.hpp"
#include "convscreen/embeddings.hpp"
#include "convscreen/kernels.hpp"
#include "convscreen/metrics.hpp"
#include "convscreen/train.hpp"

namespace convscreen {

/// Two-phase sequential transfer: train to early stopping on the source,
/// continue on the target at a reduced learning rate. Embedding providers
/// are immutable, so the freeze flag is a documented invariant rather than
/// an option.
struct TransferPlan {
  Corpus source_train;
  Corpus source_valid;
  Corpus target_train;
  Corpus target_valid;
  Corpus target_test;
  ChunkModelSpec model;
  TrainConfig pretrain;
  double finetune_lr_factor = 0.1;  // in (0,1]
  bool freeze_embeddings = true;
  int window = 50;
  int stride = 1;
  std::uint64_t seed = 1;
};

enum class TransferMode { target_only, source_no_finetune, source_finetune };

const char* transfer_mode_name(TransferMode mode);
TransferMode transfer_mode_from_name(const std::string& name);

/// Train on the source corpora until early stopping.
TrainedChunkModel pretrain(const TransferPlan& plan,
                           const EmbeddingProvider& provider,
                           Exec exec = Exec::parallel);

/// Continue training `model` on the target corpora at
/// pretrain.learning_rate * finetune_lr_factor.
TrainedChunkModel fine_tune(const RecurrentChunkModel& model,
                            const TransferPlan& plan,
                            const EmbeddingProvider& provider,
                            Exec exec = Exec::parallel);

struct MetricSet {
  double uar = 0.0;
  double uap = 0.0;  // undefined per-class precision mapped to 0
  double macro_f1 = 0.0;
  double accuracy = 0.0;
};

MetricSet compute_metrics(const std::vector<int>& predictions,
                          const std::vector<int>& truths);

struct ExperimentResult {
  TransferMode mode = TransferMode::target_only;
  std::uint64_t seed = 0;
  MetricSet test;          // on the target test split
  double t_best = 0.0;
  double valid_accuracy = 0.0;  // calibration accuracy on target validation
  std::string config_snapshot;  // canonical key=value line
  std::uint64_t config_hash = 0;
  std::uint64_t param_hash = 0;           // final model parameters
  std::uint64_t pretrain_param_hash = 0;  // 0 for target-only
  double wall_clock_seconds = 0.0;        // informational; kept out of reports
  std::vector<std::string> audit;  // ordered data-access event trail
};

/// Run one transfer mode end to end. Every mode calibrates the threshold
/// on the target validation split only; the target test split is touched
/// exactly once, for the final evaluation (see the audit trail).
ExperimentResult run_experiment(const TransferPlan& plan, TransferMode mode,
                                const EmbeddingProvider& provider,
                                ThresholdRule rule = ThresholdRule::fraction,
                                Exec exec = Exec::parallel);

/// Seeded random hyperparameter search over the training pipeline,
/// scored by conversation-level validation UAR after calibration.
struct SearchSpace {
  double lr_min = 1e-4;  // learning rate is sampled log-uniformly
  double lr_max = 1e-2;
  int hidden_min = 16;
  int hidden_max = 64;
  int window_min = 5;
  int window_max = 20;
  int batch_min = 8;
  int batch_max = 64;
};

struct TrialResult {
  int index = 0;
  TrainConfig config;
  int hidden_dim = 0;
  int window = 0;
  double valid_uar = 0.0;
  double t_best = 0.0;
};

struct SearchResult {
  TrialResult best;
  std::vector<TrialResult> trials;
};

SearchResult random_search(const Corpus& train, const Corpus& valid,
                           const EmbeddingProvider& provider,
                           const SearchSpace& space, int budget,
                           std::uint64_t seed, const TrainConfig& base,
                           bool attention, int stride = 1,
                           Exec exec = Exec::parallel);

/// Fixed-width summary table: one row per seed, one column per mode,
/// UAR to 3 decimals, plus a mean row. Byte-identical for equal inputs.
std::string report_table(const std::vector<ExperimentResult>& results);

/// Machine-readable line-delimited report, one JSON record per result,
/// excluding wall-clock time so reruns reproduce bytes.
std::string report_records(const std::vector<ExperimentResult>& results);

}  // namespace convscreen
