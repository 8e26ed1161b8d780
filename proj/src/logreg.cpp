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

#include "convscreen/logreg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "convscreen/util.hpp"

namespace convscreen {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double logreg_prob(const LogRegModel& model, const BowVector& bow) {
  if (bow.counts.size() != model.weights.size())
    throw std::invalid_argument("bag-of-words size does not match model");
  double z = model.bias;
  for (std::size_t i = 0; i < bow.counts.size(); ++i)
    z += model.weights[i] * static_cast<double>(bow.counts[i]);
  return sigmoid(z);
}

LogRegModel logreg_train(const std::vector<std::pair<BowVector, int>>& examples,
                         const TrainConfig& config) {
  if (examples.size() < 2)
    throw std::invalid_argument("need at least 2 examples");
  bool has0 = false, has1 = false;
  const std::size_t dim = examples.front().first.counts.size();
  for (const auto& [bow, label] : examples) {
    if (bow.counts.size() != dim)
      throw std::invalid_argument("inconsistent bag-of-words sizes");
    if (label != 0 && label != 1)
      throw std::invalid_argument("label outside {0,1}");
    (label == 1 ? has1 : has0) = true;
  }
  if (!has0 || !has1)
    throw std::invalid_argument("training data contains a single class");
  if (config.l2 < 0.0) throw std::invalid_argument("l2 must be >= 0");

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(config.seed, "order"));
  shuffle_inplace(order, rng);

  std::array<double, 2> weights = {1.0, 1.0};
  if (config.class_weighting) {
    double n0 = 0.0, n1 = 0.0;
    for (const auto& [bow, label] : examples) (label == 1 ? n1 : n0) += 1.0;
    weights[0] = (n0 + n1) / (2.0 * n0);
    weights[1] = (n0 + n1) / (2.0 * n1);
  }

  LogRegModel model;
  model.weights.assign(dim, 0.0);
  model.l2 = config.l2;

  std::vector<double> gw(dim);
  double prev_loss = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0, loss = 0.0, wsum = 0.0;
    for (std::size_t idx : order) {
      const auto& [bow, label] = examples[idx];
      const double w = weights[label];
      const double p = logreg_prob(model, bow);
      loss += w * bce_loss(p, label);
      wsum += w;
      const double err = w * (p - label);
      gb += err;
      for (std::size_t i = 0; i < dim; ++i)
        gw[i] += err * static_cast<double>(bow.counts[i]);
    }
    loss /= wsum;
    double reg = 0.0;
    for (double wv : model.weights) reg += wv * wv;
    loss += 0.5 * config.l2 * reg;
    if (!std::isfinite(loss))
      throw std::runtime_error("non-finite loss at epoch " +
                               std::to_string(epoch + 1));

    for (std::size_t i = 0; i < dim; ++i) {
      const double g = gw[i] / wsum + config.l2 * model.weights[i];
      model.weights[i] -= config.learning_rate * g;
    }
    model.bias -= config.learning_rate * gb / wsum;

    if (prev_loss - loss < 1e-6 && epoch > 0) break;
    prev_loss = loss;
  }
  return model;
}

TopWeights logreg_top_weights(const LogRegModel& model,
                              const Vocabulary& vocab, std::size_t k) {
  if (model.weights.size() != vocab.size())
    throw std::invalid_argument("model and vocabulary sizes differ");
  if (k > vocab.size())
    throw std::invalid_argument("k exceeds the vocabulary size");
  std::vector<std::size_t> idx(model.weights.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return model.weights[a] > model.weights[b];
  });
  TopWeights out;
  for (std::size_t i = 0; i < k; ++i)
    out.positive.push_back({vocab.words[idx[i]], model.weights[idx[i]]});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = idx[idx.size() - 1 - i];
    out.negative.push_back({vocab.words[j], model.weights[j]});
  }
  return out;
}

BowVector conversation_bow(const Conversation& conversation,
                           const Vocabulary& vocab) {
  BowVector total;
  total.counts.assign(vocab.size(), 0);
  for (const Utterance& u : conversation.utterances) {
    const BowVector part = bow_vectorize(u.text, vocab);
    for (std::size_t i = 0; i < total.counts.size(); ++i)
      total.counts[i] += part.counts[i];
  }
  return total;
}

std::vector<std::pair<BowVector, int>> corpus_bows(const Corpus& corpus,
                                                   const Vocabulary& vocab) {
  std::vector<std::pair<BowVector, int>> out;
  out.reserve(corpus.conversations.size());
  for (const Conversation& conv : corpus.conversations)
    out.emplace_back(conversation_bow(conv, vocab), conv.label);
  return out;
}

}  // namespace convscreen
