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
#include <string_view>
#include <unordered_map>
#include <vector>

#include "convscreen/corpus.hpp"

namespace convscreen {

/// Lowercase tokens split on maximal runs of non-alphanumeric characters.
/// ASCII alphanumerics only; anything else, including multi-byte UTF-8,
/// acts as a separator.
std::vector<std::string> tokenize(std::string_view text);

/// Frequency-ranked vocabulary. Words are ordered by descending training
/// frequency with lexicographic tie-break, so construction is
/// deterministic across runs and platforms.
struct Vocabulary {
  std::vector<std::string> words;
  std::unordered_map<std::string, std::size_t> rank;
  std::string source;

  std::size_t size() const { return words.size(); }
  /// FNV digest over the ranked word list; used to pin checkpoints to the
  /// vocabulary they were trained with.
  std::uint64_t content_hash() const;
};

/// Top-k vocabulary over every utterance of the corpus. Build from the
/// training split only. Throws on k = 0 or an empty corpus.
Vocabulary build_vocab(const Corpus& corpus, std::size_t k);

/// Raw term-frequency vector aligned to a vocabulary.
struct BowVector {
  std::vector<std::int64_t> counts;
};

/// Count in-vocabulary tokens; out-of-vocabulary tokens are dropped.
BowVector bow_vectorize(std::string_view text, const Vocabulary& vocab);

/// Word -> category multimap with a fixed category order (order of first
/// appearance in the source file).
struct LexiconSet {
  std::vector<std::string> categories;
  std::unordered_map<std::string, std::vector<std::size_t>> word_categories;

  std::size_t category_count() const { return categories.size(); }
};

/// Load a lexicon file: one `word<TAB>category` pair per line, UTF-8,
/// duplicate pairs ignored.
LexiconSet load_lexicons(const std::string& path);

/// Per-category token counts normalized by the token count of the text:
/// component c = (#tokens mapped to category c) / max(1, #tokens).
std::vector<double> lexicon_features(std::string_view text,
                                     const LexiconSet& lexicons);

/// Concatenate embedding-first. Throws std::invalid_argument on any
/// non-finite component.
std::vector<double> concat_features(const std::vector<double>& embedding,
                                    const std::vector<double>& extra);

}  // namespace convscreen
