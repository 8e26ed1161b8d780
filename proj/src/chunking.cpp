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

#include "convscreen/chunking.hpp"

#include <stdexcept>

namespace convscreen {

std::vector<std::pair<int, int>> chunk_spans(int length, int window,
                                             int stride) {
  if (window < 1) throw std::invalid_argument("chunk window must be >= 1");
  if (stride < 1) throw std::invalid_argument("chunk stride must be >= 1");
  if (length < 1) throw std::invalid_argument("conversation is empty");
  std::vector<std::pair<int, int>> spans;
  if (length < window) {
    spans.emplace_back(0, length);
    return spans;
  }
  for (int start = 0; start + window <= length; start += stride) {
    spans.emplace_back(start, window);
  }
  return spans;
}

ChunkSet make_chunks(const Conversation& conversation, int window,
                     int stride) {
  ChunkSet set;
  set.window = window;
  set.stride = stride;
  auto spans = chunk_spans(static_cast<int>(conversation.length()), window,
                           stride);
  for (auto [start, len] : spans) {
    Chunk chunk;
    chunk.conversation_id = conversation.id;
    chunk.start = start;
    chunk.label = conversation.label;
    chunk.utterances.assign(conversation.utterances.begin() + start,
                            conversation.utterances.begin() + start + len);
    set.chunks.push_back(std::move(chunk));
  }
  return set;
}

ChunkSet label_chunks(ChunkSet chunkset, const Conversation& conversation) {
  for (Chunk& chunk : chunkset.chunks) {
    if (chunk.conversation_id != conversation.id) {
      throw std::invalid_argument(
          "label_chunks: chunk belongs to conversation \"" +
          chunk.conversation_id + "\", not \"" + conversation.id + "\"");
    }
    chunk.label = conversation.label;
  }
  return chunkset;
}

StreamChunker::StreamChunker(int window, int stride,
                             std::string conversation_id, int label)
    : window_(window),
      stride_(stride),
      conversation_id_(std::move(conversation_id)),
      label_(label) {
  if (window_ < 1) throw std::invalid_argument("chunk window must be >= 1");
  if (stride_ < 1) throw std::invalid_argument("chunk stride must be >= 1");
}

std::optional<Chunk> StreamChunker::feed(const Utterance& utterance) {
  if (utterance.index != fed_) {
    throw std::invalid_argument(
        "stream chunker: expected utterance index " + std::to_string(fed_) +
        ", got " + std::to_string(utterance.index));
  }
  buffer_.push_back(utterance);
  if (static_cast<int>(buffer_.size()) > window_) {
    buffer_.erase(buffer_.begin());
  }
  ++fed_;
  if (fed_ >= window_ && (fed_ - window_) % stride_ == 0) {
    emitted_ = true;
    Chunk chunk;
    chunk.conversation_id = conversation_id_;
    chunk.start = fed_ - window_;
    chunk.label = label_;
    chunk.utterances = buffer_;
    return chunk;
  }
  return std::nullopt;
}

std::optional<Chunk> StreamChunker::finish() {
  if (emitted_ || fed_ == 0) return std::nullopt;
  Chunk chunk;
  chunk.conversation_id = conversation_id_;
  chunk.start = 0;
  chunk.label = label_;
  chunk.utterances = buffer_;
  return chunk;
}

}  // namespace convscreen
