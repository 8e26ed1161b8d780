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

#include <string>
#include <utility>
#include <vector>

#include "convscreen/corpus.hpp"
#include "convscreen/features.hpp"
#include "convscreen/train.hpp"

namespace convscreen {

/// Conversation-level logistic regression over bag-of-words counts.
struct LogRegModel {
  std::vector<double> weights;  // one per vocabulary word
  double bias = 0.0;
  double l2 = 0.0;
};

/// Class-1 probability for one bag-of-words vector.
double logreg_prob(const LogRegModel& model, const BowVector& bow);

/// Full-batch gradient descent on L2-regularized binary cross-entropy
/// (bias unregularized), from zero initialization. Stops when the loss
/// improves by less than 1e-6 or at max_epochs. The seed only orders the
/// examples; with zero init the result is order-independent up to
/// floating-point association, so identical seeds reproduce bytes.
LogRegModel logreg_train(const std::vector<std::pair<BowVector, int>>& examples,
                         const TrainConfig& config);

struct WeightEntry {
  std::string word;
  double weight;
};

struct TopWeights {
  std::vector<WeightEntry> positive;  // descending weight
  std::vector<WeightEntry> negative;  // ascending weight
};

/// k strongest words in each direction. Throws when k exceeds the
/// vocabulary size.
TopWeights logreg_top_weights(const LogRegModel& model,
                              const Vocabulary& vocab, std::size_t k);

/// Sum of per-utterance bag-of-words counts, the conversation-level
/// feature the baseline trains on.
BowVector conversation_bow(const Conversation& conversation,
                           const Vocabulary& vocab);

std::vector<std::pair<BowVector, int>> corpus_bows(const Corpus& corpus,
                                                   const Vocabulary& vocab);

}  // namespace convscreen
