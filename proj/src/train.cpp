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

#include "convscreen/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "convscreen/util.hpp"

namespace convscreen {

namespace {

std::array<double, 2> make_class_weights(const std::vector<ChunkRef>& refs,
                                         bool class_weighting) {
  std::array<double, 2> w = {1.0, 1.0};
  if (!class_weighting) return w;
  double n0 = 0.0, n1 = 0.0;
  for (const ChunkRef& r : refs) (r.label == 1 ? n1 : n0) += 1.0;
  const double n = n0 + n1;
  w[0] = n / (2.0 * n0);
  w[1] = n / (2.0 * n1);
  return w;
}

void check_both_classes(const std::vector<ChunkRef>& refs) {
  bool has0 = false, has1 = false;
  for (const ChunkRef& r : refs) (r.label == 1 ? has1 : has0) = true;
  if (!has0 || !has1)
    throw std::invalid_argument("training chunks contain a single class");
}

// Pseudo-corpus with one conversation per chunk, so pre-sliced chunk sets
// run through the same embedded-corpus kernels.
EmbeddedCorpus embed_chunkset(const ChunkSet& chunks,
                              const EmbeddingProvider& provider, Exec exec) {
  Corpus as_corpus;
  as_corpus.conversations.reserve(chunks.chunks.size());
  for (const Chunk& ch : chunks.chunks) {
    Conversation conv;
    conv.id = ch.conversation_id;
    conv.label = ch.label;
    conv.utterances = ch.utterances;
    as_corpus.conversations.push_back(std::move(conv));
  }
  return embed_corpus(as_corpus, provider, exec);
}

std::vector<ChunkRef> whole_conversation_refs(const EmbeddedCorpus& corpus) {
  std::vector<ChunkRef> refs;
  refs.reserve(corpus.conversations.size());
  for (std::size_t c = 0; c < corpus.conversations.size(); ++c) {
    const EmbeddedConversation& conv = corpus.conversations[c];
    ChunkRef ref;
    ref.conversation = static_cast<std::int32_t>(c);
    ref.start = 0;
    ref.length = conv.length;
    ref.label = conv.label;
    refs.push_back(ref);
  }
  return refs;
}

}  // namespace

TrainedChunkModel train_chunk_model(const EmbeddedCorpus& train,
                                    const std::vector<ChunkRef>& train_refs,
                                    const EmbeddedCorpus& valid,
                                    const std::vector<ChunkRef>& valid_refs,
                                    const ChunkModelSpec& spec,
                                    const TrainConfig& config, Exec exec,
                                    const RecurrentChunkModel* initial) {
  if (config.learning_rate <= 0.0)
    throw std::invalid_argument("learning rate must be positive");
  if (config.batch_size < 1)
    throw std::invalid_argument("batch size must be >= 1");
  if (config.max_epochs < 0)
    throw std::invalid_argument("max epochs must be >= 0");
  if (config.patience < 0)
    throw std::invalid_argument("patience must be >= 0");
  if (train_refs.empty())
    throw std::invalid_argument("no training chunks");
  if (valid_refs.empty())
    throw std::invalid_argument("no validation chunks");
  check_both_classes(train_refs);

  TrainedChunkModel out{
      RecurrentChunkModel(train.dim, spec.hidden_dim, spec.attention),
      TrainLog{}};
  RecurrentChunkModel& model = out.model;
  if (initial != nullptr) {
    if (initial->input_dim() != train.dim ||
        initial->hidden_dim() != spec.hidden_dim ||
        initial->attention() != spec.attention)
      throw std::invalid_argument("initial model shape mismatch");
    model.params() = initial->params();
  } else {
    model.init_params(derive_seed(config.seed, "init"));
  }

  const std::array<double, 2> weights =
      make_class_weights(train_refs, config.class_weighting);
  const std::size_t n_params = model.param_count();

  // Adaptive-moment state.
  std::vector<double> m(n_params, 0.0), v(n_params, 0.0);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  std::int64_t step = 0;

  std::vector<ChunkRef> order = train_refs;
  std::vector<double> best_params = model.params();
  double best_valid = std::numeric_limits<double>::infinity();
  int non_improving = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::mt19937_64 rng(derive_seed(config.seed, "epoch",
                                    static_cast<std::uint64_t>(epoch)));
    shuffle_inplace(order, rng);

    double loss_num = 0.0, loss_den = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.size(), begin + static_cast<std::size_t>(config.batch_size));
      const std::vector<ChunkRef> batch(order.begin() + begin,
                                        order.begin() + end);
      LossGrad lg;
      try {
        lg = batch_loss_grad(model, train, batch, weights, exec);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(
            std::string(e.what()) + " at epoch " + std::to_string(epoch + 1) +
            ", batch " + std::to_string(begin / config.batch_size + 1));
      }

      double batch_weight = 0.0;
      for (const ChunkRef& r : batch) batch_weight += weights[r.label];
      loss_num += lg.loss * batch_weight;
      loss_den += batch_weight;

      double sq = 0.0;
      for (double g : lg.grad) sq += g * g;
      const double norm = std::sqrt(sq);
      if (config.clip_norm > 0.0 && norm > config.clip_norm) {
        const double scale = config.clip_norm / norm;
        for (double& g : lg.grad) g *= scale;
      }

      ++step;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      std::vector<double>& params = model.params();
      for (std::size_t j = 0; j < n_params; ++j) {
        m[j] = beta1 * m[j] + (1.0 - beta1) * lg.grad[j];
        v[j] = beta2 * v[j] + (1.0 - beta2) * lg.grad[j] * lg.grad[j];
        params[j] -= config.learning_rate * (m[j] / bc1) /
                     (std::sqrt(v[j] / bc2) + adam_eps);
      }
    }

    EpochStats stats;
    stats.train_loss = loss_num / loss_den;
    stats.valid_loss = batch_loss(model, valid, valid_refs, weights, exec);
    out.log.epochs.push_back(stats);

    if (stats.valid_loss < best_valid) {
      best_valid = stats.valid_loss;
      best_params = model.params();
      out.log.best_epoch = epoch;
      non_improving = 0;
    } else {
      ++non_improving;
      if (non_improving > config.patience) {
        out.log.stopped_early = true;
        break;
      }
    }
  }

  if (!out.log.epochs.empty()) model.params() = best_params;
  return out;
}

TrainedChunkModel train_chunk_model(const ChunkSet& train_chunks,
                                    const ChunkSet& valid_chunks,
                                    const EmbeddingProvider& provider,
                                    const ChunkModelSpec& spec,
                                    const TrainConfig& config, Exec exec,
                                    const RecurrentChunkModel* initial) {
  const EmbeddedCorpus train = embed_chunkset(train_chunks, provider, exec);
  const EmbeddedCorpus valid = embed_chunkset(valid_chunks, provider, exec);
  return train_chunk_model(train, whole_conversation_refs(train), valid,
                           whole_conversation_refs(valid), spec, config, exec,
                           initial);
}

TrainedChunkModel train_on_corpora(const Corpus& train, const Corpus& valid,
                                   const EmbeddingProvider& provider,
                                   int window, int stride,
                                   const ChunkModelSpec& spec,
                                   const TrainConfig& config, Exec exec,
                                   const RecurrentChunkModel* initial) {
  const EmbeddedCorpus etrain = embed_corpus(train, provider, exec);
  const EmbeddedCorpus evalid = embed_corpus(valid, provider, exec);
  return train_chunk_model(etrain, make_chunk_refs(etrain, window, stride),
                           evalid, make_chunk_refs(evalid, window, stride),
                           spec, config, exec, initial);
}

ChunkPredictionBatch predict_chunks(const RecurrentChunkModel& model,
                                    const ChunkSet& chunks,
                                    const EmbeddingProvider& provider,
                                    Exec exec) {
  ChunkPredictionBatch out;
  if (chunks.chunks.empty()) return out;
  const EmbeddedCorpus embedded = embed_chunkset(chunks, provider, exec);
  const std::vector<ChunkRef> refs = whole_conversation_refs(embedded);
  out.probabilities = chunk_probabilities(model, embedded, refs, exec);
  out.predictions.reserve(out.probabilities.size());
  for (double p : out.probabilities) out.predictions.push_back(p > 0.5 ? 1 : 0);
  return out;
}

std::vector<ChunkPredictions> predict_embedded(const RecurrentChunkModel& model,
                                               const EmbeddedCorpus& corpus,
                                               int window, int stride,
                                               Exec exec) {
  const std::vector<ChunkRef> refs = make_chunk_refs(corpus, window, stride);
  const std::vector<double> probs =
      chunk_probabilities(model, corpus, refs, exec);
  std::vector<ChunkPredictions> out(corpus.conversations.size());
  for (std::size_t c = 0; c < corpus.conversations.size(); ++c) {
    out[c].conversation_id = corpus.conversations[c].id;
    out[c].label = corpus.conversations[c].label;
  }
  for (std::size_t i = 0; i < refs.size(); ++i)
    out[refs[i].conversation].predictions.push_back(probs[i] > 0.5 ? 1 : 0);
  return out;
}

std::vector<ChunkPredictions> predict_corpus(const RecurrentChunkModel& model,
                                             const Corpus& corpus,
                                             const EmbeddingProvider& provider,
                                             int window, int stride,
                                             Exec exec) {
  return predict_embedded(model, embed_corpus(corpus, provider, exec), window,
                          stride, exec);
}

}  // namespace convscreen
