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

#include "convscreen/checkpoint.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "convscreen/util.hpp"

namespace convscreen {

namespace {

constexpr const char* kMagic = "convscreen-checkpoint";
constexpr int kVersion = 1;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("checkpoint field " + key +
                             " is not a number: " + s);
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("checkpoint field " + key +
                             " is not an integer: " + s);
  }
}

int parse_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("checkpoint field " + key +
                             " is not an integer: " + s);
  }
}

}  // namespace

const std::string* Checkpoint::find(const std::string& key) const {
  for (const auto& [k, v] : fields)
    if (k == key) return &v;
  return nullptr;
}

const std::string& Checkpoint::at(const std::string& key) const {
  const std::string* v = find(key);
  if (v == nullptr)
    throw std::runtime_error("checkpoint is missing field " + key);
  return *v;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << kMagic << '\t' << kVersion << '\n';
  out << "kind\t" << ckpt.kind << '\n';
  for (const auto& [k, v] : ckpt.fields) out << k << '\t' << v << '\n';
  out << "blocks\t" << ckpt.blocks.size() << '\n';
  for (const auto& [name, data] : ckpt.blocks) {
    out << "block\t" << name << '\t' << data.size() << '\n';
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failed for checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty checkpoint " + path);
  {
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.substr(0, tab) != kMagic)
      throw std::runtime_error(path + " is not a checkpoint file");
    if (parse_int(line.substr(tab + 1), "version") != kVersion)
      throw std::runtime_error("unsupported checkpoint version in " + path);
  }
  Checkpoint ckpt;
  bool saw_blocks = false;
  std::size_t n_blocks = 0;
  while (std::getline(in, line)) {
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("malformed checkpoint header line: " + line);
    const std::string key = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    if (key == "kind") {
      ckpt.kind = value;
    } else if (key == "blocks") {
      n_blocks = parse_u64(value, "blocks");
      saw_blocks = true;
      break;
    } else {
      ckpt.fields.emplace_back(key, value);
    }
  }
  if (ckpt.kind.empty())
    throw std::runtime_error("checkpoint is missing its kind: " + path);
  if (!saw_blocks)
    throw std::runtime_error("checkpoint is missing its block table: " + path);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    if (!std::getline(in, line))
      throw std::runtime_error("truncated checkpoint block table: " + path);
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 =
        t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos ||
        line.substr(0, t1) != "block")
      throw std::runtime_error("malformed block line: " + line);
    const std::string name = line.substr(t1 + 1, t2 - t1 - 1);
    const std::size_t count = parse_u64(line.substr(t2 + 1), "block size");
    std::vector<double> data(count);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
      throw std::runtime_error("truncated block " + name + " in " + path);
    ckpt.blocks.emplace_back(name, std::move(data));
  }
  return ckpt;
}

Checkpoint make_chunk_checkpoint(const RecurrentChunkModel& model,
                                 const ChunkModelMeta& meta) {
  Checkpoint ckpt;
  ckpt.kind = "chunk-bilstm";
  ckpt.fields.emplace_back("input_dim", std::to_string(model.input_dim()));
  ckpt.fields.emplace_back("hidden_dim", std::to_string(model.hidden_dim()));
  ckpt.fields.emplace_back("attention", model.attention() ? "1" : "0");
  ckpt.fields.emplace_back("window", std::to_string(meta.window));
  ckpt.fields.emplace_back("stride", std::to_string(meta.stride));
  ckpt.fields.emplace_back("embed_kind", meta.embed_kind);
  ckpt.fields.emplace_back("embed_dim", std::to_string(meta.embed_dim));
  ckpt.fields.emplace_back("embed_seed", std::to_string(meta.embed_seed));
  ckpt.fields.emplace_back("with_features", meta.with_features ? "1" : "0");
  if (meta.with_features) {
    ckpt.fields.emplace_back("lexicon_digest", hex64(meta.lexicon_digest));
    ckpt.fields.emplace_back("feature_count",
                             std::to_string(meta.feature_count));
  }
  ckpt.fields.emplace_back("seed", std::to_string(meta.seed));
  if (meta.threshold.has_value()) {
    ckpt.fields.emplace_back("threshold", format_double(*meta.threshold));
    ckpt.fields.emplace_back("threshold_rule",
                             threshold_rule_name(meta.threshold_rule));
  }
  const std::vector<double>& params = model.params();
  for (const RecurrentChunkModel::Block& block : model.blocks())
    ckpt.blocks.emplace_back(
        block.name,
        std::vector<double>(params.begin() + block.offset,
                            params.begin() + block.offset + block.count));
  return ckpt;
}

std::pair<RecurrentChunkModel, ChunkModelMeta> read_chunk_checkpoint(
    const Checkpoint& ckpt) {
  if (ckpt.kind != "chunk-bilstm")
    throw std::runtime_error("expected a chunk-bilstm checkpoint, found " +
                             ckpt.kind);
  const int d = parse_int(ckpt.at("input_dim"), "input_dim");
  const int h = parse_int(ckpt.at("hidden_dim"), "hidden_dim");
  const bool attention = ckpt.at("attention") == "1";
  RecurrentChunkModel model(d, h, attention);

  ChunkModelMeta meta;
  meta.window = parse_int(ckpt.at("window"), "window");
  meta.stride = parse_int(ckpt.at("stride"), "stride");
  meta.embed_kind = ckpt.at("embed_kind");
  meta.embed_dim = parse_int(ckpt.at("embed_dim"), "embed_dim");
  meta.embed_seed = parse_u64(ckpt.at("embed_seed"), "embed_seed");
  meta.with_features = ckpt.at("with_features") == "1";
  if (meta.with_features) {
    meta.lexicon_digest =
        std::stoull(ckpt.at("lexicon_digest"), nullptr, 16);
    meta.feature_count = parse_int(ckpt.at("feature_count"), "feature_count");
  }
  meta.seed = parse_u64(ckpt.at("seed"), "seed");
  if (const std::string* t = ckpt.find("threshold")) {
    meta.threshold = parse_double(*t, "threshold");
    meta.threshold_rule = threshold_rule_from_name(ckpt.at("threshold_rule"));
  }
  const int expected_dim =
      meta.embed_dim + (meta.with_features ? meta.feature_count : 0);
  if (expected_dim != d)
    throw std::runtime_error(
        "checkpoint input_dim does not match its embedding configuration");

  std::vector<double>& params = model.params();
  std::vector<RecurrentChunkModel::Block> blocks = model.blocks();
  if (blocks.size() != ckpt.blocks.size())
    throw std::runtime_error("checkpoint block count mismatch");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& [name, data] = ckpt.blocks[i];
    if (name != blocks[i].name)
      throw std::runtime_error("checkpoint block " + name + " where " +
                               blocks[i].name + " was expected");
    if (data.size() != blocks[i].count)
      throw std::runtime_error("checkpoint block " + name + " has " +
                               std::to_string(data.size()) + " values, " +
                               std::to_string(blocks[i].count) + " expected");
    for (double v : data)
      if (!std::isfinite(v))
        throw std::runtime_error("checkpoint block " + name +
                                 " holds a non-finite value");
    std::copy(data.begin(), data.end(), params.begin() + blocks[i].offset);
  }
  return {std::move(model), meta};
}

Checkpoint make_logreg_checkpoint(const LogRegModel& model,
                                  const LogRegMeta& meta) {
  Checkpoint ckpt;
  ckpt.kind = "logreg";
  ckpt.fields.emplace_back("vocab_size", std::to_string(meta.vocab_size));
  ckpt.fields.emplace_back("vocab_hash", hex64(meta.vocab_hash));
  ckpt.fields.emplace_back("l2", format_double(meta.l2));
  ckpt.fields.emplace_back("seed", std::to_string(meta.seed));
  ckpt.blocks.emplace_back("weights", model.weights);
  ckpt.blocks.emplace_back("bias", std::vector<double>{model.bias});
  return ckpt;
}

std::pair<LogRegModel, LogRegMeta> read_logreg_checkpoint(
    const Checkpoint& ckpt) {
  if (ckpt.kind != "logreg")
    throw std::runtime_error("expected a logreg checkpoint, found " +
                             ckpt.kind);
  LogRegMeta meta;
  meta.vocab_size = parse_u64(ckpt.at("vocab_size"), "vocab_size");
  meta.vocab_hash = std::stoull(ckpt.at("vocab_hash"), nullptr, 16);
  meta.l2 = parse_double(ckpt.at("l2"), "l2");
  meta.seed = parse_u64(ckpt.at("seed"), "seed");

  if (ckpt.blocks.size() != 2 || ckpt.blocks[0].first != "weights" ||
      ckpt.blocks[1].first != "bias" || ckpt.blocks[1].second.size() != 1)
    throw std::runtime_error("malformed logreg checkpoint blocks");
  if (ckpt.blocks[0].second.size() != meta.vocab_size)
    throw std::runtime_error("logreg weight count does not match vocab_size");
  LogRegModel model;
  model.weights = ckpt.blocks[0].second;
  model.bias = ckpt.blocks[1].second[0];
  model.l2 = meta.l2;
  for (double v : model.weights)
    if (!std::isfinite(v))
      throw std::runtime_error("logreg checkpoint holds a non-finite weight");
  return {std::move(model), meta};
}

}  // namespace convscreen
