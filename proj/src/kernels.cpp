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

#include "convscreen/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <exception>
#include <stdexcept>

#include "convscreen/chunking.hpp"

namespace convscreen {

namespace {

// Run f(0..n-1). Each call must touch only its own output slot; the
// parallel path then produces the same slots as the serial one.
template <typename F>
void for_each_index(std::size_t n, Exec exec, F&& f) {
  if (exec == Exec::parallel) {
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
      try {
        f(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (std::size_t i = 0; i < n; ++i) f(i);
  }
}

void check_refs(const RecurrentChunkModel& model, const EmbeddedCorpus& corpus,
                const std::vector<ChunkRef>& refs) {
  if (model.input_dim() != corpus.dim)
    throw std::invalid_argument("model input dim does not match corpus dim");
  if (refs.empty()) throw std::invalid_argument("no chunks given");
  for (const ChunkRef& ref : refs) {
    if (ref.conversation < 0 ||
        static_cast<std::size_t>(ref.conversation) >=
            corpus.conversations.size())
      throw std::out_of_range("chunk ref conversation out of range");
    const EmbeddedConversation& conv = corpus.conversations[ref.conversation];
    if (ref.length < 1 || ref.start < 0 || ref.start + ref.length > conv.length)
      throw std::out_of_range("chunk ref span out of range");
  }
}

}  // namespace

EmbeddedCorpus embed_corpus(const Corpus& corpus,
                            const EmbeddingProvider& provider, Exec exec) {
  EmbeddedCorpus out;
  out.dim = provider.dim();
  out.conversations.resize(corpus.conversations.size());
  for_each_index(corpus.conversations.size(), exec, [&](std::size_t i) {
    const Conversation& conv = corpus.conversations[i];
    EmbeddedConversation& dst = out.conversations[i];
    dst.id = conv.id;
    dst.label = conv.label;
    dst.length = static_cast<int>(conv.utterances.size());
    dst.data.resize(conv.utterances.size() * static_cast<std::size_t>(out.dim));
    for (std::size_t u = 0; u < conv.utterances.size(); ++u) {
      const std::vector<double> vec = provider.embed(conv.utterances[u], conv.id);
      if (static_cast<int>(vec.size()) != out.dim)
        throw std::runtime_error("embedding provider returned wrong dim");
      std::copy(vec.begin(), vec.end(),
                dst.data.begin() + u * static_cast<std::size_t>(out.dim));
    }
  });
  return out;
}

std::vector<ChunkRef> make_chunk_refs(const EmbeddedCorpus& corpus, int window,
                                      int stride) {
  std::vector<ChunkRef> refs;
  for (std::size_t c = 0; c < corpus.conversations.size(); ++c) {
    const EmbeddedConversation& conv = corpus.conversations[c];
    for (const auto& [start, len] : chunk_spans(conv.length, window, stride)) {
      ChunkRef ref;
      ref.conversation = static_cast<std::int32_t>(c);
      ref.start = start;
      ref.length = len;
      ref.label = conv.label;
      refs.push_back(ref);
    }
  }
  return refs;
}

std::vector<double> chunk_probabilities(const RecurrentChunkModel& model,
                                        const EmbeddedCorpus& corpus,
                                        const std::vector<ChunkRef>& refs,
                                        Exec exec) {
  check_refs(model, corpus, refs);
  std::vector<double> probs(refs.size());
  for_each_index(refs.size(), exec, [&](std::size_t i) {
    const ChunkRef& ref = refs[i];
    const EmbeddedConversation& conv = corpus.conversations[ref.conversation];
    const double* seq =
        conv.data.data() +
        static_cast<std::size_t>(ref.start) * static_cast<std::size_t>(corpus.dim);
    probs[i] = chunk_forward(model, seq, ref.length);
  });
  return probs;
}

double batch_loss(const RecurrentChunkModel& model, const EmbeddedCorpus& corpus,
                  const std::vector<ChunkRef>& refs,
                  const std::array<double, 2>& class_weights, Exec exec) {
  check_refs(model, corpus, refs);
  std::vector<double> losses(refs.size());
  for_each_index(refs.size(), exec, [&](std::size_t i) {
    const ChunkRef& ref = refs[i];
    const EmbeddedConversation& conv = corpus.conversations[ref.conversation];
    const double* seq =
        conv.data.data() +
        static_cast<std::size_t>(ref.start) * static_cast<std::size_t>(corpus.dim);
    const double p = chunk_forward(model, seq, ref.length);
    losses[i] = class_weights[ref.label] * bce_loss(p, ref.label);
  });
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    num += losses[i];
    den += class_weights[refs[i].label];
  }
  const double loss = num / den;
  if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss");
  return loss;
}

LossGrad batch_loss_grad(const RecurrentChunkModel& model,
                         const EmbeddedCorpus& corpus,
                         const std::vector<ChunkRef>& refs,
                         const std::array<double, 2>& class_weights,
                         Exec exec) {
  check_refs(model, corpus, refs);
  const std::size_t n = model.param_count();
  // One gradient buffer per example keeps the reduction order fixed; call
  // with mini-batches, not a whole corpus.
  std::vector<double> grads(refs.size() * n, 0.0);
  std::vector<double> losses(refs.size());
  for_each_index(refs.size(), exec, [&](std::size_t i) {
    const ChunkRef& ref = refs[i];
    const EmbeddedConversation& conv = corpus.conversations[ref.conversation];
    const double* seq =
        conv.data.data() +
        static_cast<std::size_t>(ref.start) * static_cast<std::size_t>(corpus.dim);
    RnnCache cache;
    const double p = chunk_forward_cached(model, seq, ref.length, cache);
    const double w = class_weights[ref.label];
    losses[i] = w * bce_loss(p, ref.label);
    chunk_backward(model, seq, ref.length, cache, w * (p - ref.label),
                   grads.data() + i * n);
  });

  LossGrad out;
  out.grad.assign(n, 0.0);
  double den = 0.0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    out.loss += losses[i];
    den += class_weights[refs[i].label];
    const double* g = grads.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) out.grad[j] += g[j];
  }
  out.loss /= den;
  const double inv = 1.0 / den;
  for (double& g : out.grad) g *= inv;
  if (!std::isfinite(out.loss)) throw std::runtime_error("non-finite loss");
  return out;
}

}  // namespace convscreen
