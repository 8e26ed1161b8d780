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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "convscreen/corpus.hpp"
#include "convscreen/features.hpp"

namespace convscreen {

/// Deterministic, non-trainable utterance encoder. Implementations are
/// immutable after construction; concurrent embed() calls are safe.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual int dim() const = 0;
  virtual std::vector<double> embed(const Utterance& utterance,
                                    const std::string& conversation_id)
      const = 0;
};

/// Signed feature hashing into `dim` buckets: each token lands in a
/// seed-hashed bucket with a hash-derived sign, and the signed counts are
/// L2-normalized (an empty text stays the zero vector).
class HashedEmbedder : public EmbeddingProvider {
 public:
  HashedEmbedder(int dim, std::uint64_t seed);

  int dim() const override { return dim_; }
  std::vector<double> embed(const Utterance& utterance,
                            const std::string& conversation_id) const override;

  std::vector<double> embed_text(std::string_view text) const;
  std::uint64_t seed() const { return seed_; }

 private:
  int dim_;
  std::uint64_t seed_;
};

/// Precomputed vectors keyed by (conversation_id, utterance_index), for
/// embeddings produced by an external encoder run.
class EmbeddingTable : public EmbeddingProvider {
 public:
  explicit EmbeddingTable(int dim);

  int dim() const override { return dim_; }
  std::vector<double> embed(const Utterance& utterance,
                            const std::string& conversation_id) const override;

  /// Throws on duplicate key, dimension mismatch, or non-finite value.
  void insert(const std::string& conversation_id, int utterance_index,
              std::vector<double> vec);
  std::size_t size() const { return entries_.size(); }

 private:
  int dim_;
  std::map<std::pair<std::string, int>, std::vector<double>> entries_;
};

/// Read an embedding table file: first line `dim<TAB>D`, then one row per
/// vector: `conversation_id<TAB>utterance_index<TAB>v1,v2,...,vD`.
EmbeddingTable load_table(const std::string& path);

/// Run a provider over a corpus and write the result in the load_table
/// format; used to produce table fixtures and to export embeddings.
void write_table_for_corpus(const EmbeddingProvider& provider,
                            const Corpus& corpus, const std::string& path);

/// Base embedding with per-utterance lexicon-category features appended.
/// Keeps the provider contract so the feature ablation runs through the
/// same pipeline.
class FeatureAugmentedProvider : public EmbeddingProvider {
 public:
  FeatureAugmentedProvider(std::shared_ptr<const EmbeddingProvider> base,
                           std::shared_ptr<const LexiconSet> lexicons);

  int dim() const override;
  std::vector<double> embed(const Utterance& utterance,
                            const std::string& conversation_id) const override;

 private:
  std::shared_ptr<const EmbeddingProvider> base_;
  std::shared_ptr<const LexiconSet> lexicons_;
};

}  // namespace convscreen
