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
#include <vector>

#include "convscreen/calibration.hpp"
#include "convscreen/chunking.hpp"
#include "convscreen/embeddings.hpp"
#include "convscreen/kernels.hpp"
#include "convscreen/rnn.hpp"

namespace convscreen {

struct TrainConfig {
  double learning_rate = 1e-3;
  int max_epochs = 100;
  int batch_size = 32;
  int patience = 5;      // tolerated non-improving validation epochs
  double clip_norm = 5.0;
  bool class_weighting = false;
  double l2 = 0.0;       // used by the bag-of-words baseline only
  std::uint64_t seed = 1;
};

struct ChunkModelSpec {
  int hidden_dim = 128;
  bool attention = false;
};

struct EpochStats {
  double train_loss = 0.0;
  double valid_loss = 0.0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;  // index into epochs, -1 when no epoch ran
  bool stopped_early = false;
};

struct TrainedChunkModel {
  RecurrentChunkModel model;
  TrainLog log;
};

/// Mini-batch adaptive-moment training of the chunk classifier with
/// global-norm gradient clipping and early stopping on validation loss.
/// Parameters start from seeded uniform(-0.08, 0.08), or from `initial`
/// when given (the fine-tuning path; shapes must match exactly). The
/// returned model carries the parameters of the best validation epoch.
/// Bit-reproducible for a fixed seed, config and build, independent of
/// `exec`.
TrainedChunkModel train_chunk_model(const EmbeddedCorpus& train,
                                    const std::vector<ChunkRef>& train_refs,
                                    const EmbeddedCorpus& valid,
                                    const std::vector<ChunkRef>& valid_refs,
                                    const ChunkModelSpec& spec,
                                    const TrainConfig& config,
                                    Exec exec = Exec::parallel,
                                    const RecurrentChunkModel* initial = nullptr);

/// Convenience wrapper over pre-sliced chunk sets; each chunk is embedded
/// independently through the provider.
TrainedChunkModel train_chunk_model(const ChunkSet& train_chunks,
                                    const ChunkSet& valid_chunks,
                                    const EmbeddingProvider& provider,
                                    const ChunkModelSpec& spec,
                                    const TrainConfig& config,
                                    Exec exec = Exec::parallel,
                                    const RecurrentChunkModel* initial = nullptr);

/// Embed both corpora, slice windows, train.
TrainedChunkModel train_on_corpora(const Corpus& train, const Corpus& valid,
                                   const EmbeddingProvider& provider,
                                   int window, int stride,
                                   const ChunkModelSpec& spec,
                                   const TrainConfig& config,
                                   Exec exec = Exec::parallel,
                                   const RecurrentChunkModel* initial = nullptr);

struct ChunkPredictionBatch {
  std::vector<int> predictions;       // 1 iff probability > 0.5
  std::vector<double> probabilities;  // chunk order preserved
};

/// Per-chunk verdicts for a pre-sliced chunk set.
ChunkPredictionBatch predict_chunks(const RecurrentChunkModel& model,
                                    const ChunkSet& chunks,
                                    const EmbeddingProvider& provider,
                                    Exec exec = Exec::parallel);

/// Slice every conversation and collect its chunk verdicts, one
/// ChunkPredictions per conversation in corpus order.
std::vector<ChunkPredictions> predict_corpus(const RecurrentChunkModel& model,
                                             const Corpus& corpus,
                                             const EmbeddingProvider& provider,
                                             int window, int stride,
                                             Exec exec = Exec::parallel);

/// Same, over an already-embedded corpus.
std::vector<ChunkPredictions> predict_embedded(
    const RecurrentChunkModel& model, const EmbeddedCorpus& corpus, int window,
    int stride, Exec exec = Exec::parallel);

}  // namespace convscreen
