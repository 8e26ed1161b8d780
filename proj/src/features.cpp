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

#include "convscreen/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "convscreen/util.hpp"

namespace convscreen {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                 (c >= 'A' && c <= 'Z');
    if (alnum) {
      current.push_back(
          c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::uint64_t Vocabulary::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const std::string& w : words) {
    h = fnv1a64(w, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

Vocabulary build_vocab(const Corpus& corpus, std::size_t k) {
  if (k == 0) throw std::invalid_argument("build_vocab: k must be positive");
  if (corpus.conversations.empty()) {
    throw std::invalid_argument("build_vocab: empty corpus");
  }
  std::unordered_map<std::string, std::int64_t> freq;
  for (const Conversation& conv : corpus.conversations) {
    for (const Utterance& utt : conv.utterances) {
      for (std::string& tok : tokenize(utt.text)) {
        freq[std::move(tok)] += 1;
      }
    }
  }
  std::vector<std::pair<std::string, std::int64_t>> ranked(freq.begin(),
                                                           freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab;
  vocab.source = corpus.provenance;
  std::size_t n = std::min(k, ranked.size());
  vocab.words.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    vocab.rank.emplace(ranked[i].first, i);
    vocab.words.push_back(std::move(ranked[i].first));
  }
  return vocab;
}

BowVector bow_vectorize(std::string_view text, const Vocabulary& vocab) {
  BowVector bow;
  bow.counts.assign(vocab.size(), 0);
  for (const std::string& tok : tokenize(text)) {
    auto it = vocab.rank.find(tok);
    if (it != vocab.rank.end()) {
      bow.counts[it->second] += 1;
    }
  }
  return bow;
}

LexiconSet load_lexicons(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open lexicon file: " + path);
  }
  LexiconSet set;
  std::unordered_map<std::string, std::size_t> category_index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw std::runtime_error("lexicon line " + std::to_string(line_no) +
                               ": expected word<TAB>category");
    }
    std::string word = line.substr(0, tab);
    std::string category = line.substr(tab + 1);
    auto [it, inserted] =
        category_index.emplace(category, set.categories.size());
    if (inserted) set.categories.push_back(category);
    std::vector<std::size_t>& cats = set.word_categories[word];
    if (std::find(cats.begin(), cats.end(), it->second) == cats.end()) {
      cats.push_back(it->second);
    }
  }
  return set;
}

std::vector<double> lexicon_features(std::string_view text,
                                     const LexiconSet& lexicons) {
  if (lexicons.categories.empty()) {
    throw std::invalid_argument("lexicon_features: no categories");
  }
  std::vector<double> features(lexicons.category_count(), 0.0);
  std::vector<std::string> tokens = tokenize(text);
  for (const std::string& tok : tokens) {
    auto it = lexicons.word_categories.find(tok);
    if (it == lexicons.word_categories.end()) continue;
    for (std::size_t cat : it->second) {
      features[cat] += 1.0;
    }
  }
  double denom = static_cast<double>(std::max<std::size_t>(1, tokens.size()));
  for (double& f : features) f /= denom;
  return features;
}

std::vector<double> concat_features(const std::vector<double>& embedding,
                                    const std::vector<double>& extra) {
  auto check = [](const std::vector<double>& v, const char* name) {
    for (double x : v) {
      if (!std::isfinite(x)) {
        throw std::invalid_argument(std::string("concat_features: non-finite ") +
                                    name + " component");
      }
    }
  };
  check(embedding, "embedding");
  check(extra, "extra");
  std::vector<double> out;
  out.reserve(embedding.size() + extra.size());
  out.insert(out.end(), embedding.begin(), embedding.end());
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

}  // namespace convscreen
