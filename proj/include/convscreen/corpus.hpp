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
#include <tuple>
#include <vector>

namespace convscreen {

enum class Split { train, valid, test };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

/// One turn of one speaker. `index` is the ordinal position within the
/// conversation; a conversation's utterances always carry indices 0..L-1.
struct Utterance {
  std::string speaker;
  std::string text;
  int index = 0;
};

struct Conversation {
  std::string id;
  int label = 0;  // 0 = non-depressed, 1 = depressed
  std::vector<Utterance> utterances;

  std::size_t length() const { return utterances.size(); }
};

struct Corpus {
  Split split = Split::train;
  std::string provenance;
  std::vector<Conversation> conversations;

  std::size_t size() const { return conversations.size(); }
};

/// Read a line-delimited corpus file: one JSON record per line with fields
/// id, label (0|1) and utterances [{speaker, text}, ...]. Utterance indices
/// are assigned in file order. Errors carry the offending line number;
/// duplicate conversation ids report both lines.
Corpus load_corpus(const std::string& path, Split split);

/// Write one JSON record per line, loadable by load_corpus.
void write_corpus(const Corpus& corpus, const std::string& path);

struct FilterResult {
  Corpus corpus;
  std::size_t dropped_conversations = 0;
};

/// Keep only utterances of `speaker`, re-indexing contiguously.
/// Conversations left empty are dropped and counted.
FilterResult filter_speaker(const Corpus& corpus, const std::string& speaker);

/// Deterministic participant-level partition. Fractions must be positive
/// and sum to 1 within 1e-9. Valid and test sizes are floored, the
/// remainder goes to train. Requires at least 3 conversations.
std::tuple<Corpus, Corpus, Corpus> split_corpus(const Corpus& corpus,
                                                double train_fraction,
                                                double valid_fraction,
                                                double test_fraction,
                                                std::uint64_t seed);

/// Parameters of the synthetic corpus generator. Label-1 participants draw
/// each token from the planted risk lexicon with probability
/// base_rate + signal_strength, label-0 participants with base_rate;
/// otherwise the token is uniform over the base vocabulary (the lexicon is
/// a subset of it). signal_strength = 0 therefore makes the two classes
/// generatively identical.
struct SynthSpec {
  std::size_t n_train = 200;
  std::size_t n_valid = 50;
  std::size_t n_test = 50;
  int utterances_min = 20;
  int utterances_max = 40;
  int tokens_min = 6;
  int tokens_max = 14;
  double signal_strength = 0.3;  // excess risk-token probability for label 1
  double base_rate = 0.05;       // risk-token probability for label 0
  std::size_t base_vocab_size = 200;
  std::size_t risk_lexicon_size = 20;
  double positive_ratio = 0.5;
  std::uint64_t seed = 1;
  // Overrides the seed used to pick the risk lexicon; 0 falls back to
  // `seed`. Two corpora generated with the same lexicon_seed share the
  // same risk words, which makes them related domains for transfer.
  std::uint64_t lexicon_seed = 0;
};

struct SynthCorpora {
  Corpus train;
  Corpus valid;
  Corpus test;
  std::vector<std::string> risk_lexicon;  // sorted
};

/// Generate train/valid/test corpora plus the planted risk lexicon.
/// Byte-identical output for identical specs.
SynthCorpora synth_generate(const SynthSpec& spec);

}  // namespace convscreen
