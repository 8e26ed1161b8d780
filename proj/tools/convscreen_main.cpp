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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "convscreen/calibration.hpp"
#include "convscreen/checkpoint.hpp"
#include "convscreen/chunking.hpp"
#include "convscreen/corpus.hpp"
#include "convscreen/embeddings.hpp"
#include "convscreen/features.hpp"
#include "convscreen/kernels.hpp"
#include "convscreen/logreg.hpp"
#include "convscreen/manifest.hpp"
#include "convscreen/metrics.hpp"
#include "convscreen/rnn.hpp"
#include "convscreen/train.hpp"
#include "convscreen/transfer.hpp"
#include "convscreen/util.hpp"

namespace {

using namespace convscreen;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string corpus_path(const std::string& dir, Split split) {
  return dir + "/" + split_name(split) + ".jsonl";
}

Corpus load_split(const std::string& dir, Split split, RunManifest& manifest) {
  const std::string path = corpus_path(dir, split);
  manifest.inputs.emplace_back(path, hex64(digest_file(path)));
  return load_corpus(path, split);
}

// Shared embedding flags resolved into a provider. For hash embeddings the
// configuration is self-contained; table embeddings re-read the table file
// given on the command line.
struct ProviderConfig {
  std::string embed = "hash";  // "hash" or "table:<path>"
  int dim = 64;
  std::uint64_t embed_seed = 0;
  std::string lexicons;  // path, with_features only
  bool with_features = false;
};

struct BuiltProvider {
  std::shared_ptr<const EmbeddingProvider> provider;
  ChunkModelMeta meta;  // embedding-related fields filled in
};

BuiltProvider build_provider(const ProviderConfig& cfg, RunManifest& manifest) {
  BuiltProvider out;
  std::shared_ptr<const EmbeddingProvider> base;
  if (cfg.embed == "hash") {
    base = std::make_shared<HashedEmbedder>(cfg.dim, cfg.embed_seed);
    out.meta.embed_kind = "hash";
    out.meta.embed_dim = cfg.dim;
    out.meta.embed_seed = cfg.embed_seed;
  } else if (cfg.embed.rfind("table:", 0) == 0) {
    const std::string path = cfg.embed.substr(6);
    manifest.inputs.emplace_back(path, hex64(digest_file(path)));
    auto table = std::make_shared<EmbeddingTable>(load_table(path));
    out.meta.embed_kind = "table";
    out.meta.embed_dim = table->dim();
    out.meta.embed_seed = 0;
    base = table;
  } else {
    throw std::invalid_argument("--embed must be hash or table:<path>");
  }
  if (cfg.with_features) {
    if (cfg.lexicons.empty())
      throw std::invalid_argument("--with-features requires --lexicons");
    manifest.inputs.emplace_back(cfg.lexicons,
                                 hex64(digest_file(cfg.lexicons)));
    auto lex = std::make_shared<LexiconSet>(load_lexicons(cfg.lexicons));
    out.meta.with_features = true;
    out.meta.lexicon_digest = digest_file(cfg.lexicons);
    out.meta.feature_count = static_cast<int>(lex->category_count());
    out.provider = std::make_shared<FeatureAugmentedProvider>(base, lex);
  } else {
    out.provider = base;
  }
  return out;
}

// Rebuild the provider demanded by a chunk checkpoint, validating the
// supplied flags against the stored configuration.
std::shared_ptr<const EmbeddingProvider> provider_for_checkpoint(
    const ChunkModelMeta& meta, const ProviderConfig& cfg,
    RunManifest& manifest) {
  std::shared_ptr<const EmbeddingProvider> base;
  if (meta.embed_kind == "hash") {
    base = std::make_shared<HashedEmbedder>(meta.embed_dim, meta.embed_seed);
  } else {
    if (cfg.embed.rfind("table:", 0) != 0)
      throw std::runtime_error(
          "checkpoint was trained on a table embedding; pass --embed "
          "table:<path>");
    const std::string path = cfg.embed.substr(6);
    manifest.inputs.emplace_back(path, hex64(digest_file(path)));
    auto table = std::make_shared<EmbeddingTable>(load_table(path));
    if (table->dim() != meta.embed_dim)
      throw std::runtime_error("table dim does not match checkpoint");
    base = table;
  }
  if (!meta.with_features) return base;
  if (cfg.lexicons.empty())
    throw std::runtime_error(
        "checkpoint was trained with lexicon features; pass --lexicons");
  if (digest_file(cfg.lexicons) != meta.lexicon_digest)
    throw std::runtime_error(
        "lexicon file does not match the one the checkpoint was trained "
        "with");
  manifest.inputs.emplace_back(cfg.lexicons, hex64(digest_file(cfg.lexicons)));
  auto lex = std::make_shared<LexiconSet>(load_lexicons(cfg.lexicons));
  if (static_cast<int>(lex->category_count()) != meta.feature_count)
    throw std::runtime_error("lexicon category count mismatch");
  return std::make_shared<FeatureAugmentedProvider>(base, lex);
}

void add_provider_flags(CLI::App* cmd, ProviderConfig& cfg) {
  cmd->add_option("--embed", cfg.embed, "hash or table:<path>")
      ->default_str("hash");
  cmd->add_option("--dim", cfg.dim, "hashed embedding width")
      ->check(CLI::PositiveNumber)
      ->default_val(64);
  cmd->add_option("--lexicons", cfg.lexicons, "lexicon TSV path");
  cmd->add_flag("--with-features", cfg.with_features,
                "append lexicon-category features to each embedding");
}

// ---------------------------------------------------------------- gen-synth

struct GenSynthArgs {
  std::string out_dir;
  SynthSpec spec;
  std::string manifest_path;
};

int cmd_gen_synth(const GenSynthArgs& args) {
  RunManifest manifest;
  manifest.subcommand = "gen-synth";
  manifest.seed = args.spec.seed;
  const SynthSpec& s = args.spec;
  manifest.config = {
      {"out_dir", args.out_dir},
      {"n_train", std::to_string(s.n_train)},
      {"n_valid", std::to_string(s.n_valid)},
      {"n_test", std::to_string(s.n_test)},
      {"utterances_min", std::to_string(s.utterances_min)},
      {"utterances_max", std::to_string(s.utterances_max)},
      {"tokens_min", std::to_string(s.tokens_min)},
      {"tokens_max", std::to_string(s.tokens_max)},
      {"signal_strength", fmt17(s.signal_strength)},
      {"base_rate", fmt17(s.base_rate)},
      {"base_vocab_size", std::to_string(s.base_vocab_size)},
      {"risk_lexicon_size", std::to_string(s.risk_lexicon_size)},
      {"positive_ratio", fmt17(s.positive_ratio)},
      {"seed", std::to_string(s.seed)},
      {"lexicon_seed", std::to_string(s.lexicon_seed)},
  };
  const std::string manifest_path = args.manifest_path.empty()
                                        ? args.out_dir + "/manifest.json"
                                        : args.manifest_path;
  std::filesystem::create_directories(args.out_dir);
  write_manifest(manifest, manifest_path);

  const SynthCorpora corpora = synth_generate(args.spec);
  write_corpus(corpora.train, corpus_path(args.out_dir, Split::train));
  write_corpus(corpora.valid, corpus_path(args.out_dir, Split::valid));
  write_corpus(corpora.test, corpus_path(args.out_dir, Split::test));
  const std::string lexicon_path = args.out_dir + "/risk_lexicon.tsv";
  std::ofstream lex(lexicon_path, std::ios::binary);
  if (!lex) throw std::runtime_error("cannot write " + lexicon_path);
  for (const std::string& word : corpora.risk_lexicon)
    lex << word << "\trisk\n";
  if (!lex) throw std::runtime_error("write failed for " + lexicon_path);
  std::printf("wrote %zu/%zu/%zu conversations and %zu lexicon words to %s\n",
              corpora.train.size(), corpora.valid.size(), corpora.test.size(),
              corpora.risk_lexicon.size(), args.out_dir.c_str());
  return 0;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
  std::string corpus_dir;
  std::string model = "chunk-bilstm";
  bool attention = false;
  std::size_t vocab_size = 3000;
  int window = 50;
  int stride = 1;
  ProviderConfig provider;
  TrainConfig config;
  int hidden = 128;
  double l2 = 0.0;
  std::string checkpoint;
  std::string manifest_path;
  bool serial = false;
};

void fill_train_manifest(const TrainArgs& args, RunManifest& manifest) {
  manifest.config = {
      {"corpus_dir", args.corpus_dir},
      {"model", args.model},
      {"attention", args.attention ? "1" : "0"},
      {"vocab_size", std::to_string(args.vocab_size)},
      {"window", std::to_string(args.window)},
      {"stride", std::to_string(args.stride)},
      {"embed", args.provider.embed},
      {"dim", std::to_string(args.provider.dim)},
      {"with_features", args.provider.with_features ? "1" : "0"},
      {"lexicons", args.provider.lexicons},
      {"hidden", std::to_string(args.hidden)},
      {"lr", fmt17(args.config.learning_rate)},
      {"epochs", std::to_string(args.config.max_epochs)},
      {"batch", std::to_string(args.config.batch_size)},
      {"patience", std::to_string(args.config.patience)},
      {"clip", fmt17(args.config.clip_norm)},
      {"class_weighting", args.config.class_weighting ? "1" : "0"},
      {"l2", fmt17(args.l2)},
      {"seed", std::to_string(args.config.seed)},
      {"checkpoint", args.checkpoint},
  };
  manifest.seed = args.config.seed;
}

int cmd_train(TrainArgs args) {
  RunManifest manifest;
  manifest.subcommand = "train";
  fill_train_manifest(args, manifest);
  const Exec exec = args.serial ? Exec::serial : Exec::parallel;

  const Corpus train = load_split(args.corpus_dir, Split::train, manifest);
  const Corpus valid = load_split(args.corpus_dir, Split::valid, manifest);
  const std::string manifest_path = args.manifest_path.empty()
                                        ? args.checkpoint + ".manifest.json"
                                        : args.manifest_path;

  if (args.model == "logreg") {
    write_manifest(manifest, manifest_path);
    const Vocabulary vocab = build_vocab(train, args.vocab_size);
    TrainConfig config = args.config;
    config.l2 = args.l2;
    const LogRegModel model = logreg_train(corpus_bows(train, vocab), config);
    LogRegMeta meta;
    meta.vocab_size = vocab.size();
    meta.vocab_hash = vocab.content_hash();
    meta.l2 = args.l2;
    meta.seed = config.seed;
    save_checkpoint(make_logreg_checkpoint(model, meta), args.checkpoint);
    const std::vector<std::pair<BowVector, int>> vbows =
        corpus_bows(valid, vocab);
    std::vector<int> preds, truths;
    for (const auto& [bow, label] : vbows) {
      preds.push_back(logreg_prob(model, bow) > 0.5 ? 1 : 0);
      truths.push_back(label);
    }
    std::printf("valid_uar\t%.3f\n", uar(confusion(preds, truths)));
    return 0;
  }
  if (args.model != "chunk-bilstm")
    throw std::invalid_argument("--model must be logreg or chunk-bilstm");

  args.provider.embed_seed = derive_seed(args.config.seed, "embed");
  BuiltProvider built = build_provider(args.provider, manifest);
  write_manifest(manifest, manifest_path);

  const ChunkModelSpec spec{args.hidden, args.attention};
  const TrainedChunkModel trained =
      train_on_corpora(train, valid, *built.provider, args.window, args.stride,
                       spec, args.config, exec);
  built.meta.window = args.window;
  built.meta.stride = args.stride;
  built.meta.seed = args.config.seed;
  save_checkpoint(make_chunk_checkpoint(trained.model, built.meta),
                  args.checkpoint);
  for (std::size_t e = 0; e < trained.log.epochs.size(); ++e)
    std::fprintf(stderr, "epoch %zu train_loss %.6f valid_loss %.6f\n", e + 1,
                 trained.log.epochs[e].train_loss,
                 trained.log.epochs[e].valid_loss);
  std::printf("epochs\t%zu\nbest_epoch\t%d\n", trained.log.epochs.size(),
              trained.log.best_epoch + 1);
  return 0;
}

// ---------------------------------------------------- calibrate / evaluate

struct EvalArgs {
  std::string corpus_dir;
  std::string checkpoint;
  std::string split = "test";
  ProviderConfig provider;
  std::string rule = "fraction";
  std::string manifest_path;
  bool serial = false;
};

int cmd_calibrate(const EvalArgs& args) {
  RunManifest manifest;
  manifest.subcommand = "calibrate";
  manifest.config = {{"corpus_dir", args.corpus_dir},
                     {"checkpoint", args.checkpoint},
                     {"embed", args.provider.embed},
                     {"lexicons", args.provider.lexicons},
                     {"threshold_rule", args.rule}};
  manifest.inputs.emplace_back(args.checkpoint,
                               hex64(digest_file(args.checkpoint)));
  const Exec exec = args.serial ? Exec::serial : Exec::parallel;

  auto [model, meta] = read_chunk_checkpoint(load_checkpoint(args.checkpoint));
  manifest.seed = meta.seed;
  const auto provider = provider_for_checkpoint(meta, args.provider, manifest);
  const Corpus valid = load_split(args.corpus_dir, Split::valid, manifest);
  if (!args.manifest_path.empty()) write_manifest(manifest, args.manifest_path);

  const std::vector<ChunkPredictions> preds = predict_corpus(
      model, valid, *provider, meta.window, meta.stride, exec);
  const ThresholdRule rule = threshold_rule_from_name(args.rule);
  const CalibrationResult cal = calibrate_threshold(preds, rule);
  meta.threshold = cal.threshold;
  meta.threshold_rule = rule;
  save_checkpoint(make_chunk_checkpoint(model, meta), args.checkpoint);
  std::printf("t_best\t%s\nvalid_accuracy\t%.3f\n", fmt17(cal.threshold).c_str(),
              cal.accuracy);
  return 0;
}

int cmd_evaluate(const EvalArgs& args) {
  RunManifest manifest;
  manifest.subcommand = "evaluate";
  manifest.config = {{"corpus_dir", args.corpus_dir},
                     {"checkpoint", args.checkpoint},
                     {"split", args.split},
                     {"embed", args.provider.embed},
                     {"lexicons", args.provider.lexicons}};
  manifest.inputs.emplace_back(args.checkpoint,
                               hex64(digest_file(args.checkpoint)));
  const Exec exec = args.serial ? Exec::serial : Exec::parallel;
  const Split split = split_from_name(args.split);

  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  std::vector<int> preds, truths;
  std::optional<double> t_best;
  if (ckpt.kind == "logreg") {
    auto [model, meta] = read_logreg_checkpoint(ckpt);
    manifest.seed = meta.seed;
    const Corpus train = load_split(args.corpus_dir, Split::train, manifest);
    const Corpus eval_corpus = load_split(args.corpus_dir, split, manifest);
    const Vocabulary vocab = build_vocab(train, meta.vocab_size);
    if (vocab.content_hash() != meta.vocab_hash)
      throw std::runtime_error(
          "training vocabulary does not match the checkpoint");
    for (const auto& [bow, label] : corpus_bows(eval_corpus, vocab)) {
      preds.push_back(logreg_prob(model, bow) > 0.5 ? 1 : 0);
      truths.push_back(label);
    }
  } else {
    auto [model, meta] = read_chunk_checkpoint(ckpt);
    manifest.seed = meta.seed;
    if (!meta.threshold.has_value())
      throw std::runtime_error(
          "checkpoint is not calibrated; run the calibrate subcommand first");
    const auto provider =
        provider_for_checkpoint(meta, args.provider, manifest);
    const Corpus eval_corpus = load_split(args.corpus_dir, split, manifest);
    const std::vector<ChunkPredictions> chunk_preds = predict_corpus(
        model, eval_corpus, *provider, meta.window, meta.stride, exec);
    for (const ChunkPredictions& cp : chunk_preds) {
      preds.push_back(
          classify_conversation(cp, *meta.threshold, meta.threshold_rule));
      truths.push_back(cp.label);
    }
    t_best = meta.threshold;
  }
  if (!args.manifest_path.empty()) write_manifest(manifest, args.manifest_path);

  const ConfusionCounts cc = confusion(preds, truths);
  std::printf("split\t%s\n", args.split.c_str());
  std::printf("conversations\t%zu\n", preds.size());
  std::printf("uar\t%.3f\n", uar(cc));
  std::printf("uap\t%.3f\n", uap(cc, /*zero_for_undefined=*/true));
  std::printf("macro_f1\t%.3f\n", macro_f1(cc));
  std::printf("accuracy\t%.3f\n", accuracy(cc));
  if (t_best.has_value()) std::printf("t_best\t%s\n", fmt17(*t_best).c_str());
  return 0;
}

// ----------------------------------------------------------------- transfer

struct TransferArgs {
  std::string corpus_dir;  // target
  std::string source_dir;
  std::string mode = "all";
  std::vector<std::uint64_t> seeds;
  ProviderConfig provider;
  TrainConfig config;
  int hidden = 32;
  bool attention = false;
  int window = 10;
  int stride = 1;
  double finetune_factor = 0.1;
  std::string rule = "fraction";
  std::string report_path;
  std::string manifest_path;
  bool serial = false;
};

int cmd_transfer(TransferArgs args) {
  RunManifest manifest;
  manifest.subcommand = "transfer";
  if (args.seeds.empty()) args.seeds.push_back(args.config.seed);
  std::string seed_list;
  for (std::uint64_t s : args.seeds) {
    if (!seed_list.empty()) seed_list += ",";
    seed_list += std::to_string(s);
  }
  manifest.config = {{"corpus_dir", args.corpus_dir},
                     {"source_dir", args.source_dir},
                     {"mode", args.mode},
                     {"seeds", seed_list},
                     {"embed", args.provider.embed},
                     {"dim", std::to_string(args.provider.dim)},
                     {"with_features", args.provider.with_features ? "1" : "0"},
                     {"lexicons", args.provider.lexicons},
                     {"hidden", std::to_string(args.hidden)},
                     {"attention", args.attention ? "1" : "0"},
                     {"window", std::to_string(args.window)},
                     {"stride", std::to_string(args.stride)},
                     {"lr", fmt17(args.config.learning_rate)},
                     {"lr_finetune_factor", fmt17(args.finetune_factor)},
                     {"epochs", std::to_string(args.config.max_epochs)},
                     {"batch", std::to_string(args.config.batch_size)},
                     {"patience", std::to_string(args.config.patience)},
                     {"threshold_rule", args.rule},
                     {"report", args.report_path}};
  manifest.seed = args.seeds.front();

  TransferPlan plan;
  plan.target_train = load_split(args.corpus_dir, Split::train, manifest);
  plan.target_valid = load_split(args.corpus_dir, Split::valid, manifest);
  plan.target_test = load_split(args.corpus_dir, Split::test, manifest);
  plan.source_train = load_split(args.source_dir, Split::train, manifest);
  plan.source_valid = load_split(args.source_dir, Split::valid, manifest);
  plan.model = ChunkModelSpec{args.hidden, args.attention};
  plan.pretrain = args.config;
  plan.finetune_lr_factor = args.finetune_factor;
  plan.window = args.window;
  plan.stride = args.stride;

  args.provider.embed_seed = derive_seed(args.seeds.front(), "embed");
  const BuiltProvider built = build_provider(args.provider, manifest);
  if (!args.manifest_path.empty()) write_manifest(manifest, args.manifest_path);

  std::vector<TransferMode> modes;
  if (args.mode == "all") {
    modes = {TransferMode::target_only, TransferMode::source_no_finetune,
             TransferMode::source_finetune};
  } else {
    modes = {transfer_mode_from_name(args.mode)};
  }
  const ThresholdRule rule = threshold_rule_from_name(args.rule);
  const Exec exec = args.serial ? Exec::serial : Exec::parallel;

  std::vector<ExperimentResult> results;
  for (std::uint64_t seed : args.seeds) {
    plan.seed = seed;
    for (TransferMode mode : modes) {
      results.push_back(run_experiment(plan, mode, *built.provider, rule, exec));
      const ExperimentResult& r = results.back();
      std::fprintf(stderr, "done mode=%s seed=%llu uar=%.3f (%.1fs)\n",
                   transfer_mode_name(r.mode),
                   static_cast<unsigned long long>(r.seed), r.test.uar,
                   r.wall_clock_seconds);
    }
  }
  const std::string records = report_records(results);
  if (!args.report_path.empty()) {
    std::ofstream out(args.report_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + args.report_path);
    out << records;
  } else {
    std::fputs(records.c_str(), stdout);
  }
  std::fputs(report_table(results).c_str(), stdout);
  return 0;
}

// ------------------------------------------------------------------- search

struct SearchArgs {
  std::string corpus_dir;
  int budget = 10;
  SearchSpace space;
  TrainConfig config;
  bool attention = false;
  int stride = 1;
  ProviderConfig provider;
  std::string trials_path;
  std::string manifest_path;
  bool serial = false;
};

int cmd_search(SearchArgs args) {
  RunManifest manifest;
  manifest.subcommand = "search";
  manifest.seed = args.config.seed;
  manifest.config = {{"corpus_dir", args.corpus_dir},
                     {"budget", std::to_string(args.budget)},
                     {"lr_min", fmt17(args.space.lr_min)},
                     {"lr_max", fmt17(args.space.lr_max)},
                     {"hidden_min", std::to_string(args.space.hidden_min)},
                     {"hidden_max", std::to_string(args.space.hidden_max)},
                     {"window_min", std::to_string(args.space.window_min)},
                     {"window_max", std::to_string(args.space.window_max)},
                     {"batch_min", std::to_string(args.space.batch_min)},
                     {"batch_max", std::to_string(args.space.batch_max)},
                     {"embed", args.provider.embed},
                     {"dim", std::to_string(args.provider.dim)},
                     {"epochs", std::to_string(args.config.max_epochs)},
                     {"patience", std::to_string(args.config.patience)},
                     {"attention", args.attention ? "1" : "0"},
                     {"stride", std::to_string(args.stride)},
                     {"seed", std::to_string(args.config.seed)},
                     {"trials", args.trials_path}};

  const Corpus train = load_split(args.corpus_dir, Split::train, manifest);
  const Corpus valid = load_split(args.corpus_dir, Split::valid, manifest);
  args.provider.embed_seed = derive_seed(args.config.seed, "embed");
  const BuiltProvider built = build_provider(args.provider, manifest);
  if (!args.manifest_path.empty()) write_manifest(manifest, args.manifest_path);

  const SearchResult result = random_search(
      train, valid, *built.provider, args.space, args.budget, args.config.seed,
      args.config, args.attention, args.stride,
      args.serial ? Exec::serial : Exec::parallel);

  std::string trial_log;
  for (const TrialResult& t : result.trials) {
    char line[256];
    std::snprintf(line, sizeof(line),
                  "{\"trial\":%d,\"lr\":%.17g,\"hidden\":%d,\"window\":%d,"
                  "\"batch\":%d,\"valid_uar\":%.17g,\"t_best\":%.17g}\n",
                  t.index, t.config.learning_rate, t.hidden_dim, t.window,
                  t.config.batch_size, t.valid_uar, t.t_best);
    trial_log += line;
  }
  if (!args.trials_path.empty()) {
    std::ofstream out(args.trials_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + args.trials_path);
    out << trial_log;
  } else {
    std::fputs(trial_log.c_str(), stdout);
  }
  std::printf("best_trial\t%d\nbest_lr\t%s\nbest_hidden\t%d\nbest_window\t%d\n"
              "best_batch\t%d\nbest_valid_uar\t%.3f\n",
              result.best.index, fmt17(result.best.config.learning_rate).c_str(),
              result.best.hidden_dim, result.best.window,
              result.best.config.batch_size, result.best.valid_uar);
  return 0;
}

// ------------------------------------------------------------------- stream

struct StreamArgs {
  std::string checkpoint;
  ProviderConfig provider;
  std::string speaker = "stream";
};

int cmd_stream(const StreamArgs& args) {
  RunManifest manifest;  // stream writes no files; manifest only backs flags
  manifest.subcommand = "stream";
  auto [model, meta] = read_chunk_checkpoint(load_checkpoint(args.checkpoint));
  if (!meta.threshold.has_value())
    throw std::runtime_error(
        "checkpoint is not calibrated; run the calibrate subcommand first");
  const auto provider = provider_for_checkpoint(meta, args.provider, manifest);

  std::fputs(
      "notice: this tool is a screening aid, not a diagnostic instrument.\n"
      "notice: use it only under the supervision of a qualified therapist,\n"
      "notice: with the informed consent of everyone involved.\n",
      stderr);

  StreamChunker chunker(meta.window, meta.stride, "stream", 0);
  StreamVerdict verdict(*meta.threshold, meta.threshold_rule);
  int fed = 0;

  const auto classify_chunk = [&](const Chunk& chunk) {
    Corpus one;
    Conversation conv;
    conv.id = chunk.conversation_id;
    conv.label = 0;
    conv.utterances = chunk.utterances;
    one.conversations.push_back(std::move(conv));
    const EmbeddedCorpus embedded = embed_corpus(one, *provider, Exec::serial);
    const std::vector<ChunkRef> refs = make_chunk_refs(
        embedded, chunk.utterances.empty() ? 1
                                           : static_cast<int>(chunk.utterances.size()),
        1);
    const double p =
        chunk_probabilities(model, embedded, refs, Exec::serial).front();
    const StreamVerdict::State s = verdict.feed(p > 0.5 ? 1 : 0);
    std::printf("%d\t%.6f\t%s\n", s.chunks, s.fraction,
                s.verdict == 1 ? "depressed" : "non-depressed");
    std::fflush(stdout);
  };

  std::string line;
  while (std::getline(std::cin, line)) {
    Utterance utt;
    utt.speaker = args.speaker;
    utt.text = line;
    utt.index = fed++;
    if (const std::optional<Chunk> chunk = chunker.feed(utt))
      classify_chunk(*chunk);
  }
  if (const std::optional<Chunk> chunk = chunker.finish())
    classify_chunk(*chunk);
  return 0;
}

// ------------------------------------------------------------------ explain

struct ExplainArgs {
  std::string checkpoint;
  std::string corpus_dir;
  std::size_t k = 10;
};

int cmd_explain(const ExplainArgs& args) {
  RunManifest manifest;
  manifest.subcommand = "explain";
  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  if (ckpt.kind != "logreg")
    throw std::runtime_error(
        "explain requires a logreg checkpoint; got " + ckpt.kind);
  auto [model, meta] = read_logreg_checkpoint(ckpt);
  const Corpus train = load_split(args.corpus_dir, Split::train, manifest);
  const Vocabulary vocab = build_vocab(train, meta.vocab_size);
  if (vocab.content_hash() != meta.vocab_hash)
    throw std::runtime_error(
        "training vocabulary does not match the checkpoint");
  const TopWeights top = logreg_top_weights(model, vocab, args.k);
  for (const WeightEntry& e : top.positive)
    std::printf("%s (%+.1f)\n", e.word.c_str(), e.weight);
  for (const WeightEntry& e : top.negative)
    std::printf("%s (%+.1f)\n", e.word.c_str(), e.weight);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conversation screening toolkit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.set_config("--config", "", "key=value defaults file; flags win");
  app.require_subcommand(1);

  GenSynthArgs gen;
  CLI::App* cmd_gen = app.add_subcommand(
      "gen-synth", "generate a synthetic corpus with a planted risk lexicon");
  cmd_gen->add_option("--out-dir", gen.out_dir, "output directory")
      ->required();
  cmd_gen->add_option("--n-train", gen.spec.n_train, "train conversations");
  cmd_gen->add_option("--n-valid", gen.spec.n_valid, "valid conversations");
  cmd_gen->add_option("--n-test", gen.spec.n_test, "test conversations");
  cmd_gen->add_option("--utterances-min", gen.spec.utterances_min, "")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--utterances-max", gen.spec.utterances_max, "")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--tokens-min", gen.spec.tokens_min, "")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--tokens-max", gen.spec.tokens_max, "")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--signal", gen.spec.signal_strength,
                      "excess risk-token probability for label 1")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--base-rate", gen.spec.base_rate,
                      "risk-token probability for label 0")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--base-vocab", gen.spec.base_vocab_size,
                      "base vocabulary size");
  cmd_gen->add_option("--lexicon-size", gen.spec.risk_lexicon_size,
                      "planted risk lexicon size");
  cmd_gen->add_option("--positive-ratio", gen.spec.positive_ratio, "")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--seed", gen.spec.seed, "generator seed");
  cmd_gen->add_option("--lexicon-seed", gen.spec.lexicon_seed,
                      "separate seed for the risk lexicon (0 = --seed)");
  cmd_gen->add_option("--manifest", gen.manifest_path, "manifest path");

  TrainArgs train;
  CLI::App* cmd_tr = app.add_subcommand("train", "train a model");
  cmd_tr->add_option("--corpus-dir", train.corpus_dir, "corpus directory")
      ->required();
  cmd_tr->add_option("--model", train.model, "logreg or chunk-bilstm")
      ->check(CLI::IsMember({"logreg", "chunk-bilstm"}));
  cmd_tr->add_flag("--attention", train.attention, "enable attention readout");
  cmd_tr->add_option("--vocab-size", train.vocab_size,
                     "bag-of-words vocabulary size");
  cmd_tr->add_option("--window", train.window, "chunk window")
      ->check(CLI::PositiveNumber);
  cmd_tr->add_option("--stride", train.stride, "chunk stride")
      ->check(CLI::PositiveNumber);
  add_provider_flags(cmd_tr, train.provider);
  cmd_tr->add_option("--hidden", train.hidden, "recurrent state width")
      ->check(CLI::PositiveNumber);
  cmd_tr->add_option("--lr", train.config.learning_rate, "learning rate")
      ->check(CLI::PositiveNumber);
  cmd_tr->add_option("--epochs", train.config.max_epochs, "epoch cap")
      ->check(CLI::NonNegativeNumber);
  cmd_tr->add_option("--batch", train.config.batch_size, "batch size")
      ->check(CLI::PositiveNumber);
  cmd_tr->add_option("--patience", train.config.patience, "early-stop patience")
      ->check(CLI::NonNegativeNumber);
  cmd_tr->add_option("--clip", train.config.clip_norm, "gradient clip norm");
  cmd_tr->add_flag("--class-weighting", train.config.class_weighting,
                   "weight classes inversely to frequency");
  cmd_tr->add_option("--l2", train.l2, "L2 penalty (logreg)")
      ->check(CLI::NonNegativeNumber);
  cmd_tr->add_option("--seed", train.config.seed, "training seed");
  cmd_tr->add_option("--checkpoint", train.checkpoint, "checkpoint out path")
      ->required();
  cmd_tr->add_option("--manifest", train.manifest_path, "manifest path");
  cmd_tr->add_flag("--serial", train.serial, "disable parallel kernels");

  EvalArgs cal;
  CLI::App* cmd_cal = app.add_subcommand(
      "calibrate", "fit the conversation threshold on the validation split");
  cmd_cal->add_option("--corpus-dir", cal.corpus_dir, "corpus directory")
      ->required();
  cmd_cal->add_option("--checkpoint", cal.checkpoint, "checkpoint path")
      ->required();
  cmd_cal->add_option("--embed", cal.provider.embed, "hash or table:<path>");
  cmd_cal->add_option("--lexicons", cal.provider.lexicons, "lexicon TSV path");
  cmd_cal->add_option("--threshold-rule", cal.rule, "fraction or ratio")
      ->check(CLI::IsMember({"fraction", "ratio"}));
  cmd_cal->add_option("--manifest", cal.manifest_path, "manifest path");
  cmd_cal->add_flag("--serial", cal.serial, "disable parallel kernels");

  EvalArgs eval;
  CLI::App* cmd_ev = app.add_subcommand("evaluate", "report metrics on a split");
  cmd_ev->add_option("--corpus-dir", eval.corpus_dir, "corpus directory")
      ->required();
  cmd_ev->add_option("--checkpoint", eval.checkpoint, "checkpoint path")
      ->required();
  cmd_ev->add_option("--split", eval.split, "train, valid or test")
      ->check(CLI::IsMember({"train", "valid", "test"}));
  cmd_ev->add_option("--embed", eval.provider.embed, "hash or table:<path>");
  cmd_ev->add_option("--lexicons", eval.provider.lexicons, "lexicon TSV path");
  cmd_ev->add_option("--manifest", eval.manifest_path, "manifest path");
  cmd_ev->add_flag("--serial", eval.serial, "disable parallel kernels");

  TransferArgs transfer;
  CLI::App* cmd_tf = app.add_subcommand(
      "transfer", "run transfer-learning experiments source -> target");
  cmd_tf->add_option("--corpus-dir", transfer.corpus_dir, "target corpus")
      ->required();
  cmd_tf->add_option("--source-dir", transfer.source_dir, "source corpus")
      ->required();
  cmd_tf->add_option("--mode", transfer.mode,
                     "target-only, source-no-finetune, source+finetune or all")
      ->check(CLI::IsMember(
          {"target-only", "source-no-finetune", "source+finetune", "all"}));
  cmd_tf->add_option("--seeds", transfer.seeds, "seeds to run")
      ->delimiter(',');
  add_provider_flags(cmd_tf, transfer.provider);
  cmd_tf->add_option("--hidden", transfer.hidden, "recurrent state width")
      ->check(CLI::PositiveNumber);
  cmd_tf->add_flag("--attention", transfer.attention, "enable attention");
  cmd_tf->add_option("--window", transfer.window, "chunk window")
      ->check(CLI::PositiveNumber);
  cmd_tf->add_option("--stride", transfer.stride, "chunk stride")
      ->check(CLI::PositiveNumber);
  cmd_tf->add_option("--lr", transfer.config.learning_rate, "learning rate")
      ->check(CLI::PositiveNumber);
  cmd_tf->add_option("--lr-finetune-factor", transfer.finetune_factor,
                     "fine-tune learning-rate factor")
      ->check(CLI::Range(1e-9, 1.0));
  cmd_tf->add_option("--epochs", transfer.config.max_epochs, "epoch cap")
      ->check(CLI::NonNegativeNumber);
  cmd_tf->add_option("--batch", transfer.config.batch_size, "batch size")
      ->check(CLI::PositiveNumber);
  cmd_tf->add_option("--patience", transfer.config.patience, "patience")
      ->check(CLI::NonNegativeNumber);
  cmd_tf->add_option("--seed", transfer.config.seed, "seed when --seeds unset");
  cmd_tf->add_option("--threshold-rule", transfer.rule, "fraction or ratio")
      ->check(CLI::IsMember({"fraction", "ratio"}));
  cmd_tf->add_option("--report", transfer.report_path, "report records path");
  cmd_tf->add_option("--manifest", transfer.manifest_path, "manifest path");
  cmd_tf->add_flag("--serial", transfer.serial, "disable parallel kernels");

  SearchArgs search;
  CLI::App* cmd_se = app.add_subcommand(
      "search", "random hyperparameter search scored by validation UAR");
  cmd_se->add_option("--corpus-dir", search.corpus_dir, "corpus directory")
      ->required();
  cmd_se->add_option("--budget", search.budget, "number of trials")
      ->check(CLI::PositiveNumber);
  cmd_se->add_option("--lr-min", search.space.lr_min, "")
      ->check(CLI::PositiveNumber);
  cmd_se->add_option("--lr-max", search.space.lr_max, "")
      ->check(CLI::PositiveNumber);
  cmd_se->add_option("--hidden-min", search.space.hidden_min, "")
      ->check(CLI::PositiveNumber);
  cmd_se->add_option("--hidden-max", search.space.hidden_max, "")
      ->check(CLI::PositiveNumber);
  cmd_se->add_option("--window-min", search.space.window_min, "")
      ->check(CLI::PositiveNumber);
  cmd_se->add_option("--window-max", search.space.window_max, "")
      ->check(CLI::PositiveNumber);
  cmd_se->add_option("--batch-min", search.space.batch_min, "")
      ->check(CLI::PositiveNumber);
  cmd_se->add_option("--batch-max", search.space.batch_max, "")
      ->check(CLI::PositiveNumber);
  add_provider_flags(cmd_se, search.provider);
  cmd_se->add_flag("--attention", search.attention, "enable attention");
  cmd_se->add_option("--stride", search.stride, "chunk stride")
      ->check(CLI::PositiveNumber);
  cmd_se->add_option("--epochs", search.config.max_epochs, "epoch cap")
      ->check(CLI::NonNegativeNumber);
  cmd_se->add_option("--patience", search.config.patience, "patience")
      ->check(CLI::NonNegativeNumber);
  cmd_se->add_option("--seed", search.config.seed, "search seed");
  cmd_se->add_option("--trials", search.trials_path, "trial log path");
  cmd_se->add_option("--manifest", search.manifest_path, "manifest path");
  cmd_se->add_flag("--serial", search.serial, "disable parallel kernels");

  StreamArgs stream;
  CLI::App* cmd_st = app.add_subcommand(
      "stream", "classify a live conversation line by line from stdin");
  cmd_st->add_option("--checkpoint", stream.checkpoint, "calibrated checkpoint")
      ->required();
  cmd_st->add_option("--embed", stream.provider.embed, "hash or table:<path>");
  cmd_st->add_option("--lexicons", stream.provider.lexicons,
                     "lexicon TSV path");
  cmd_st->add_option("--speaker", stream.speaker, "speaker tag for input lines");

  ExplainArgs explain;
  CLI::App* cmd_ex = app.add_subcommand(
      "explain", "print the strongest bag-of-words weights");
  cmd_ex->add_option("--checkpoint", explain.checkpoint, "logreg checkpoint")
      ->required();
  cmd_ex->add_option("--corpus-dir", explain.corpus_dir, "corpus directory")
      ->required();
  cmd_ex->add_option("--k", explain.k, "words per direction")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(cmd_gen)) return cmd_gen_synth(gen);
    if (app.got_subcommand(cmd_tr)) return cmd_train(train);
    if (app.got_subcommand(cmd_cal)) return cmd_calibrate(cal);
    if (app.got_subcommand(cmd_ev)) return cmd_evaluate(eval);
    if (app.got_subcommand(cmd_tf)) return cmd_transfer(transfer);
    if (app.got_subcommand(cmd_se)) return cmd_search(search);
    if (app.got_subcommand(cmd_st)) return cmd_stream(stream);
    if (app.got_subcommand(cmd_ex)) return cmd_explain(explain);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::fprintf(stderr, "error: no subcommand\n");
  return 2;
}
