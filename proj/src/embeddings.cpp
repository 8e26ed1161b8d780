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

#include "convscreen/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "convscreen/util.hpp"

namespace convscreen {

HashedEmbedder::HashedEmbedder(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim_ < 1) throw std::invalid_argument("embedding dim must be >= 1");
}

std::vector<double> HashedEmbedder::embed_text(std::string_view text) const {
  std::vector<double> vec(dim_, 0.0);
  for (const std::string& tok : tokenize(text)) {
    std::uint64_t h = splitmix64(fnv1a64(tok, seed_));
    std::size_t bucket = static_cast<std::size_t>(h % dim_);
    vec[bucket] += (h >> 63) ? -1.0 : 1.0;
  }
  double norm_sq = 0.0;
  for (double v : vec) norm_sq += v * v;
  if (norm_sq > 0.0) {
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : vec) v *= inv;
  }
  return vec;
}

std::vector<double> HashedEmbedder::embed(const Utterance& utterance,
                                          const std::string&) const {
  return embed_text(utterance.text);
}

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
  if (dim_ < 1) throw std::invalid_argument("embedding dim must be >= 1");
}

void EmbeddingTable::insert(const std::string& conversation_id,
                            int utterance_index, std::vector<double> vec) {
  if (static_cast<int>(vec.size()) != dim_) {
    throw std::runtime_error(
        "embedding table: vector for (" + conversation_id + ", " +
        std::to_string(utterance_index) + ") has " +
        std::to_string(vec.size()) + " components, expected " +
        std::to_string(dim_));
  }
  for (double v : vec) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("embedding table: non-finite value for (" +
                               conversation_id + ", " +
                               std::to_string(utterance_index) + ")");
    }
  }
  auto key = std::make_pair(conversation_id, utterance_index);
  if (!entries_.emplace(key, std::move(vec)).second) {
    throw std::runtime_error("embedding table: duplicate key (" +
                             conversation_id + ", " +
                             std::to_string(utterance_index) + ")");
  }
}

std::vector<double> EmbeddingTable::embed(
    const Utterance& utterance, const std::string& conversation_id) const {
  auto it = entries_.find({conversation_id, utterance.index});
  if (it == entries_.end()) {
    throw std::runtime_error("embedding table: no entry for (" +
                             conversation_id + ", " +
                             std::to_string(utterance.index) + ")");
  }
  return it->second;
}

EmbeddingTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open embedding table: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("embedding table: missing header line");
  }
  int dim = 0;
  if (std::sscanf(line.c_str(), "dim\t%d", &dim) != 1 || dim < 1) {
    throw std::runtime_error("embedding table: bad header \"" + line + "\"");
  }
  EmbeddingTable table(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab1 = line.find('\t');
    auto tab2 = tab1 == std::string::npos ? std::string::npos
                                          : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw std::runtime_error("embedding table line " +
                               std::to_string(line_no) +
                               ": expected id<TAB>index<TAB>floats");
    }
    std::string id = line.substr(0, tab1);
    int index = 0;
    {
      const char* first = line.data() + tab1 + 1;
      const char* last = line.data() + tab2;
      auto [p, ec] = std::from_chars(first, last, index);
      if (ec != std::errc() || p != last) {
        throw std::runtime_error("embedding table line " +
                                 std::to_string(line_no) +
                                 ": bad utterance index");
      }
    }
    std::vector<double> vec;
    std::size_t pos = tab2 + 1;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      std::string field = line.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        std::size_t used = 0;
        double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        vec.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("embedding table line " +
                                 std::to_string(line_no) +
                                 ": bad float \"" + field + "\"");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (static_cast<int>(vec.size()) != dim) {
      throw std::runtime_error("embedding table line " +
                               std::to_string(line_no) + ": got " +
                               std::to_string(vec.size()) +
                               " floats, expected " + std::to_string(dim));
    }
    try {
      table.insert(id, index, std::move(vec));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("embedding table line " +
                               std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

void write_table_for_corpus(const EmbeddingProvider& provider,
                            const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path);
  }
  out << "dim\t" << provider.dim() << '\n';
  char buf[32];
  for (const Conversation& conv : corpus.conversations) {
    for (const Utterance& utt : conv.utterances) {
      out << conv.id << '\t' << utt.index << '\t';
      std::vector<double> vec = provider.embed(utt, conv.id);
      for (std::size_t i = 0; i < vec.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", vec[i]);
        if (i) out << ',';
        out << buf;
      }
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

FeatureAugmentedProvider::FeatureAugmentedProvider(
    std::shared_ptr<const EmbeddingProvider> base,
    std::shared_ptr<const LexiconSet> lexicons)
    : base_(std::move(base)), lexicons_(std::move(lexicons)) {
  if (!base_ || !lexicons_ || lexicons_->categories.empty()) {
    throw std::invalid_argument(
        "feature provider needs a base provider and a non-empty lexicon set");
  }
}

int FeatureAugmentedProvider::dim() const {
  return base_->dim() + static_cast<int>(lexicons_->category_count());
}

std::vector<double> FeatureAugmentedProvider::embed(
    const Utterance& utterance, const std::string& conversation_id) const {
  return concat_features(base_->embed(utterance, conversation_id),
                         lexicon_features(utterance.text, *lexicons_));
}

}  // namespace convscreen
