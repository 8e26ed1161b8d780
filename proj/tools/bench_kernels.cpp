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

// Times the serial reference kernels against the parallel ones on a
// synthetic workload and verifies that both produce bitwise-identical
// results.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "convscreen/corpus.hpp"
#include "convscreen/embeddings.hpp"
#include "convscreen/kernels.hpp"
#include "convscreen/rnn.hpp"
#include "convscreen/util.hpp"

using namespace convscreen;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

template <typename F>
double timed(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return seconds_since(start);
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return a.empty() ||
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main() {
  SynthSpec spec;
  spec.n_train = 120;
  spec.n_valid = 1;
  spec.n_test = 1;
  spec.seed = 7;
  const SynthCorpora corpora = synth_generate(spec);
  const HashedEmbedder embedder(64, 7);

  EmbeddedCorpus serial_embed, parallel_embed;
  const double t_embed_serial = timed([&] {
    serial_embed = embed_corpus(corpora.train, embedder, Exec::serial);
  });
  const double t_embed_parallel = timed([&] {
    parallel_embed = embed_corpus(corpora.train, embedder, Exec::parallel);
  });
  bool embed_equal = serial_embed.conversations.size() ==
                     parallel_embed.conversations.size();
  for (std::size_t i = 0; embed_equal && i < serial_embed.conversations.size();
       ++i)
    embed_equal = bitwise_equal(serial_embed.conversations[i].data,
                                parallel_embed.conversations[i].data);

  RecurrentChunkModel model(64, 32, /*attention=*/true);
  model.init_params(11);
  const std::vector<ChunkRef> refs = make_chunk_refs(serial_embed, 10, 1);
  std::printf("workload: %zu conversations, %zu chunks, %zu parameters\n",
              serial_embed.conversations.size(), refs.size(),
              model.param_count());

  std::vector<double> probs_serial, probs_parallel;
  const double t_prob_serial = timed([&] {
    probs_serial = chunk_probabilities(model, serial_embed, refs, Exec::serial);
  });
  const double t_prob_parallel = timed([&] {
    probs_parallel =
        chunk_probabilities(model, serial_embed, refs, Exec::parallel);
  });

  const std::array<double, 2> weights{1.0, 1.0};
  std::vector<ChunkRef> batch(refs.begin(),
                              refs.begin() + std::min<std::size_t>(64, refs.size()));
  LossGrad grad_serial, grad_parallel;
  const double t_grad_serial = timed([&] {
    grad_serial =
        batch_loss_grad(model, serial_embed, batch, weights, Exec::serial);
  });
  const double t_grad_parallel = timed([&] {
    grad_parallel =
        batch_loss_grad(model, serial_embed, batch, weights, Exec::parallel);
  });

  const bool probs_equal = bitwise_equal(probs_serial, probs_parallel);
  const bool grads_equal =
      grad_serial.loss == grad_parallel.loss &&
      bitwise_equal(grad_serial.grad, grad_parallel.grad);

  std::printf("embed     serial %8.3fs  parallel %8.3fs  speedup %5.2fx  %s\n",
              t_embed_serial, t_embed_parallel,
              t_embed_parallel > 0 ? t_embed_serial / t_embed_parallel : 0.0,
              embed_equal ? "bitwise-equal" : "MISMATCH");
  std::printf("predict   serial %8.3fs  parallel %8.3fs  speedup %5.2fx  %s\n",
              t_prob_serial, t_prob_parallel,
              t_prob_parallel > 0 ? t_prob_serial / t_prob_parallel : 0.0,
              probs_equal ? "bitwise-equal" : "MISMATCH");
  std::printf("gradient  serial %8.3fs  parallel %8.3fs  speedup %5.2fx  %s\n",
              t_grad_serial, t_grad_parallel,
              t_grad_parallel > 0 ? t_grad_serial / t_grad_parallel : 0.0,
              grads_equal ? "bitwise-equal" : "MISMATCH");
  return (embed_equal && probs_equal && grads_equal) ? 0 : 1;
}
