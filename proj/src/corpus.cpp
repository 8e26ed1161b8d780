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

#include "convscreen/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "convscreen/util.hpp"

namespace convscreen {

using nlohmann::json;

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "valid") return Split::valid;
  if (name == "test") return Split::test;
  throw std::invalid_argument("unknown split name: " + name);
}

namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

Conversation parse_record(const json& rec, std::size_t line) {
  if (!rec.is_object()) line_error(line, "record is not a JSON object");
  for (const char* field : {"id", "label", "utterances"}) {
    if (!rec.contains(field)) {
      line_error(line, std::string("missing field \"") + field + "\"");
    }
  }
  Conversation conv;
  if (!rec["id"].is_string()) line_error(line, "field \"id\" must be a string");
  conv.id = rec["id"].get<std::string>();
  if (!rec["label"].is_number_integer()) {
    line_error(line, "field \"label\" must be an integer");
  }
  int label = rec["label"].get<int>();
  if (label != 0 && label != 1) {
    line_error(line, "label outside {0,1}: " + std::to_string(label));
  }
  conv.label = label;
  const json& utts = rec["utterances"];
  if (!utts.is_array()) line_error(line, "field \"utterances\" must be an array");
  if (utts.empty()) line_error(line, "empty utterance list");
  int index = 0;
  for (const json& u : utts) {
    if (!u.is_object() || !u.contains("speaker") || !u.contains("text")) {
      line_error(line, "utterance " + std::to_string(index) +
                           " missing field \"speaker\" or \"text\"");
    }
    Utterance utt;
    utt.speaker = u["speaker"].get<std::string>();
    utt.text = u["text"].get<std::string>();
    if (blank(utt.text)) {
      line_error(line, "utterance " + std::to_string(index) + " has empty text");
    }
    utt.index = index++;
    conv.utterances.push_back(std::move(utt));
  }
  return conv;
}

}  // namespace

Corpus load_corpus(const std::string& path, Split split) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open corpus file: " + path);
  }
  Corpus corpus;
  corpus.split = split;
  corpus.provenance = path;
  std::unordered_map<std::string, std::size_t> first_line_of_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      line_error(line_no, std::string("malformed record: ") + e.what());
    }
    Conversation conv = parse_record(rec, line_no);
    auto [it, inserted] = first_line_of_id.emplace(conv.id, line_no);
    if (!inserted) {
      throw std::runtime_error("duplicate conversation id \"" + conv.id +
                               "\" (lines " + std::to_string(it->second) +
                               " and " + std::to_string(line_no) + ")");
    }
    corpus.conversations.push_back(std::move(conv));
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path);
  }
  for (const Conversation& conv : corpus.conversations) {
    json utts = json::array();
    for (const Utterance& u : conv.utterances) {
      utts.push_back({{"speaker", u.speaker}, {"text", u.text}});
    }
    json rec = {{"id", conv.id}, {"label", conv.label}, {"utterances", utts}};
    out << rec.dump() << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

FilterResult filter_speaker(const Corpus& corpus, const std::string& speaker) {
  if (speaker.empty()) {
    throw std::invalid_argument("filter_speaker: speaker must be non-empty");
  }
  FilterResult result;
  result.corpus.split = corpus.split;
  result.corpus.provenance = corpus.provenance;
  for (const Conversation& conv : corpus.conversations) {
    Conversation kept;
    kept.id = conv.id;
    kept.label = conv.label;
    for (const Utterance& u : conv.utterances) {
      if (u.speaker == speaker) {
        Utterance copy = u;
        copy.index = static_cast<int>(kept.utterances.size());
        kept.utterances.push_back(std::move(copy));
      }
    }
    if (kept.utterances.empty()) {
      result.dropped_conversations += 1;
    } else {
      result.corpus.conversations.push_back(std::move(kept));
    }
  }
  return result;
}

std::tuple<Corpus, Corpus, Corpus> split_corpus(const Corpus& corpus,
                                                double train_fraction,
                                                double valid_fraction,
                                                double test_fraction,
                                                std::uint64_t seed) {
  if (train_fraction <= 0 || valid_fraction <= 0 || test_fraction <= 0) {
    throw std::invalid_argument("split_corpus: fractions must be positive");
  }
  double sum = train_fraction + valid_fraction + test_fraction;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split_corpus: fractions must sum to 1");
  }
  std::size_t n = corpus.size();
  if (n < 3) {
    throw std::invalid_argument("split_corpus: need at least 3 conversations");
  }
  std::size_t n_valid = static_cast<std::size_t>(n * valid_fraction);
  std::size_t n_test = static_cast<std::size_t>(n * test_fraction);
  std::size_t n_train = n - n_valid - n_test;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  shuffle_inplace(order, rng);

  auto take = [&](Split split, std::size_t begin, std::size_t count) {
    Corpus part;
    part.split = split;
    part.provenance = corpus.provenance;
    for (std::size_t i = begin; i < begin + count; ++i) {
      part.conversations.push_back(corpus.conversations[order[i]]);
    }
    return part;
  };
  return {take(Split::train, 0, n_train),
          take(Split::valid, n_train, n_valid),
          take(Split::test, n_train + n_valid, n_test)};
}

namespace {

void validate(const SynthSpec& spec) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("synth_generate: " + what);
  };
  if (spec.n_train == 0 || spec.n_valid == 0 || spec.n_test == 0) {
    fail("participant counts must be positive");
  }
  if (spec.utterances_min < 1 || spec.utterances_max < spec.utterances_min) {
    fail("invalid utterances-per-conversation range");
  }
  if (spec.tokens_min < 1 || spec.tokens_max < spec.tokens_min) {
    fail("invalid tokens-per-utterance range");
  }
  if (spec.signal_strength < 0.0 || spec.signal_strength > 1.0) {
    fail("signal_strength must lie in [0,1]");
  }
  if (spec.base_rate < 0.0 || spec.base_rate >= 1.0) {
    fail("base_rate must lie in [0,1)");
  }
  if (spec.base_vocab_size == 0) fail("base_vocab_size must be positive");
  if (spec.risk_lexicon_size == 0) fail("risk_lexicon_size must be positive");
  if (spec.risk_lexicon_size >= spec.base_vocab_size) {
    fail("risk_lexicon_size must be smaller than base_vocab_size");
  }
  if (spec.positive_ratio <= 0.0 || spec.positive_ratio >= 1.0) {
    fail("positive_ratio must lie in (0,1)");
  }
}

Corpus synth_split(const SynthSpec& spec, Split split, std::size_t count,
                   const std::vector<std::string>& vocab,
                   const std::vector<std::string>& lexicon) {
  std::mt19937_64 rng(derive_seed(spec.seed, split_name(split)));
  double p0 = spec.base_rate;
  double p1 = std::min(1.0, spec.base_rate + spec.signal_strength);

  std::vector<int> labels(count, 0);
  std::size_t n_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(count) * spec.positive_ratio));
  n_pos = std::min(n_pos, count);
  for (std::size_t i = 0; i < n_pos; ++i) labels[i] = 1;
  shuffle_inplace(labels, rng);

  Corpus corpus;
  corpus.split = split;
  corpus.provenance = "synthetic seed=" + std::to_string(spec.seed);
  for (std::size_t i = 0; i < count; ++i) {
    Conversation conv;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "%s-%04zu", split_name(split), i);
    conv.id = idbuf;
    conv.label = labels[i];
    double risk_p = conv.label == 1 ? p1 : p0;
    int n_utt = static_cast<int>(
        uniform_int(rng, spec.utterances_min, spec.utterances_max));
    for (int u = 0; u < n_utt; ++u) {
      int n_tok = static_cast<int>(
          uniform_int(rng, spec.tokens_min, spec.tokens_max));
      std::string text;
      for (int t = 0; t < n_tok; ++t) {
        const std::string& word =
            uniform_real01(rng) < risk_p
                ? lexicon[uniform_below(rng, lexicon.size())]
                : vocab[uniform_below(rng, vocab.size())];
        if (t > 0) text += ' ';
        text += word;
      }
      conv.utterances.push_back({"P", std::move(text), u});
    }
    corpus.conversations.push_back(std::move(conv));
  }
  return corpus;
}

}  // namespace

SynthCorpora synth_generate(const SynthSpec& spec) {
  validate(spec);

  std::vector<std::string> vocab(spec.base_vocab_size);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    vocab[i] = "w" + std::to_string(i);
  }
  // The risk lexicon is a seeded sample of the base vocabulary.
  std::vector<std::size_t> order(vocab.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::uint64_t lex_seed =
      spec.lexicon_seed != 0 ? spec.lexicon_seed : spec.seed;
  std::mt19937_64 lex_rng(derive_seed(lex_seed, "lexicon"));
  shuffle_inplace(order, lex_rng);
  std::vector<std::string> lexicon;
  for (std::size_t i = 0; i < spec.risk_lexicon_size; ++i) {
    lexicon.push_back(vocab[order[i]]);
  }
  std::sort(lexicon.begin(), lexicon.end());

  SynthCorpora out;
  out.train = synth_split(spec, Split::train, spec.n_train, vocab, lexicon);
  out.valid = synth_split(spec, Split::valid, spec.n_valid, vocab, lexicon);
  out.test = synth_split(spec, Split::test, spec.n_test, vocab, lexicon);
  out.risk_lexicon = std::move(lexicon);
  return out;
}

}  // namespace convscreen
