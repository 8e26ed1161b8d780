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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "convscreen/corpus.hpp"

namespace convscreen {

/// A window of consecutive utterances, carrying the conversation's label.
struct Chunk {
  std::string conversation_id;
  int start = 0;
  std::vector<Utterance> utterances;
  int label = 0;
};

struct ChunkSet {
  std::vector<Chunk> chunks;
  int window = 0;
  int stride = 0;
};

/// Window start/length pairs for a conversation of `length` utterances.
/// Starts advance by `stride`; only full windows are emitted, except that a
/// conversation shorter than the window yields one truncated span covering
/// all of it. Single source of truth for batch chunking, streaming
/// chunking and the training pipeline.
std::vector<std::pair<int, int>> chunk_spans(int length, int window,
                                             int stride);

/// Slice a conversation into overlapping chunks. window >= 1, stride >= 1.
ChunkSet make_chunks(const Conversation& conversation, int window,
                     int stride = 1);

/// Stamp every chunk with the conversation's label. Throws on a chunk
/// referencing a different conversation id.
ChunkSet label_chunks(ChunkSet chunkset, const Conversation& conversation);

/// Incremental chunker for live conversations. Utterances must be fed in
/// index order; a chunk is returned exactly when a window boundary
/// completes, so a full replay reproduces make_chunks for conversations at
/// least one window long. finish() yields the single truncated chunk for a
/// conversation that ended before the first window filled.
class StreamChunker {
 public:
  StreamChunker(int window, int stride, std::string conversation_id = "stream",
                int label = 0);

  std::optional<Chunk> feed(const Utterance& utterance);
  std::optional<Chunk> finish();

  int fed() const { return fed_; }

 private:
  int window_;
  int stride_;
  std::string conversation_id_;
  int label_;
  int fed_ = 0;
  bool emitted_ = false;
  std::vector<Utterance> buffer_;  // last `window` utterances, oldest first
};

}  // namespace convscreen
