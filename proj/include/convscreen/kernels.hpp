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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "convscreen/corpus.hpp"
#include "convscreen/embeddings.hpp"
#include "convscreen/rnn.hpp"

namespace convscreen {

/// Execution policy for the batch kernels. Both policies run the same
/// per-example code and reduce per-example results in example-index order,
/// so outputs are bit-identical; `parallel` only distributes the
/// independent per-example work across OpenMP threads.
enum class Exec { serial, parallel };

struct EmbeddedConversation {
  std::string id;
  int label = 0;
  int length = 0;
  std::vector<double> data;  // length x dim, row-major
};

struct EmbeddedCorpus {
  int dim = 0;
  std::vector<EmbeddedConversation> conversations;
};

/// Embed every utterance of every conversation through the provider.
EmbeddedCorpus embed_corpus(const Corpus& corpus,
                            const EmbeddingProvider& provider,
                            Exec exec = Exec::parallel);

/// A window into one embedded conversation.
struct ChunkRef {
  std::int32_t conversation = 0;
  std::int32_t start = 0;
  std::int32_t length = 0;
  std::int32_t label = 0;
};

/// Sliding-window refs over every conversation, conversation order then
/// window order. Conversations shorter than the window produce one
/// truncated ref.
std::vector<ChunkRef> make_chunk_refs(const EmbeddedCorpus& corpus,
                                      int window, int stride);

/// Class-1 probability for each ref, in ref order.
std::vector<double> chunk_probabilities(const RecurrentChunkModel& model,
                                        const EmbeddedCorpus& corpus,
                                        const std::vector<ChunkRef>& refs,
                                        Exec exec);

/// Mean weighted binary cross-entropy over the refs. `class_weights`
/// indexes by label; {1, 1} gives the plain mean.
double batch_loss(const RecurrentChunkModel& model,
                  const EmbeddedCorpus& corpus,
                  const std::vector<ChunkRef>& refs,
                  const std::array<double, 2>& class_weights, Exec exec);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Mean weighted binary cross-entropy and its gradient over the refs.
/// Per-example gradients are always summed in ref order.
LossGrad batch_loss_grad(const RecurrentChunkModel& model,
                         const EmbeddedCorpus& corpus,
                         const std::vector<ChunkRef>& refs,
                         const std::array<double, 2>& class_weights,
                         Exec exec);

}  // namespace convscreen
