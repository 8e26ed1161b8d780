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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "convscreen/calibration.hpp"
#include "convscreen/logreg.hpp"
#include "convscreen/rnn.hpp"

namespace convscreen {

/// On-disk model format: a text header (`key<TAB>value` lines, fixed
/// order) followed by named little-endian float64 blocks. Loading rejects
/// any header or shape mismatch rather than guessing.
struct Checkpoint {
  std::string kind;  // "chunk-bilstm" or "logreg"
  std::vector<std::pair<std::string, std::string>> fields;
  std::vector<std::pair<std::string, std::vector<double>>> blocks;

  const std::string* find(const std::string& key) const;
  /// Field lookup that throws on absence, naming the key.
  const std::string& at(const std::string& key) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Everything needed to rebuild the inference pipeline around a chunk
/// model: windowing, embedding configuration, and the calibrated
/// threshold once `calibrate` has written one.
struct ChunkModelMeta {
  int window = 50;
  int stride = 1;
  std::string embed_kind = "hash";  // "hash" or "table"
  int embed_dim = 64;               // base embedding width
  std::uint64_t embed_seed = 0;     // hash embedder only
  bool with_features = false;
  std::uint64_t lexicon_digest = 0;  // lexicon file digest, with_features only
  int feature_count = 0;             // appended feature width
  std::uint64_t seed = 0;
  std::optional<double> threshold;
  ThresholdRule threshold_rule = ThresholdRule::fraction;
};

Checkpoint make_chunk_checkpoint(const RecurrentChunkModel& model,
                                 const ChunkModelMeta& meta);
std::pair<RecurrentChunkModel, ChunkModelMeta> read_chunk_checkpoint(
    const Checkpoint& ckpt);

struct LogRegMeta {
  std::size_t vocab_size = 0;
  std::uint64_t vocab_hash = 0;  // Vocabulary::content_hash of training vocab
  double l2 = 0.0;
  std::uint64_t seed = 0;
};

Checkpoint make_logreg_checkpoint(const LogRegModel& model,
                                  const LogRegMeta& meta);
std::pair<LogRegModel, LogRegMeta> read_logreg_checkpoint(
    const Checkpoint& ckpt);

}  // namespace convscreen
