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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "convscreen/calibration.hpp"
#include "convscreen/checkpoint.hpp"
#include "convscreen/corpus.hpp"
#include "convscreen/embeddings.hpp"
#include "convscreen/kernels.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'')
      q += "'\\''";
    else
      q += c;
  }
  q += "'";
  return q;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

fs::path scratch_root() {
  static const fs::path root = [] {
    fs::path dir = fs::temp_directory_path() / "convscreen-cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
  }();
  return root;
}

RunResult run_cli(const std::vector<std::string>& args,
                  const fs::path& cwd = scratch_root(),
                  const std::string& stdin_file = "") {
  static int counter = 0;
  const fs::path out_file = scratch_root() / ("out." + std::to_string(counter));
  const fs::path err_file = scratch_root() / ("err." + std::to_string(counter));
  ++counter;

  std::string cmd = "cd " + shell_quote(cwd.string()) + " && " +
                    shell_quote(CONVSCREEN_CLI_PATH);
  for (const std::string& a : args) cmd += " " + shell_quote(a);
  if (!stdin_file.empty())
    cmd += " < " + shell_quote(stdin_file);
  else
    cmd += " < /dev/null";
  cmd += " > " + shell_quote(out_file.string()) + " 2> " +
         shell_quote(err_file.string());

  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

/// One shared corpus + trained checkpoints, built once via the binary
/// under test. The pipeline test asserts the build steps themselves.
struct CliFixture {
  fs::path corpus;        // short conversations, window-8 model
  fs::path long_corpus;   // 55+ utterance conversations, window-50 model
  fs::path chunk_uncal;   // trained, threshold never set
  fs::path chunk_cal;     // calibrated copy
  fs::path stream_ckpt;   // calibrated window-50 checkpoint
  fs::path bow_ckpt;      // logistic-regression baseline
  RunResult gen, gen_long, train_chunk, calibrate, train_stream,
      calibrate_stream, train_bow;
};

const CliFixture& fixture() {
  static const CliFixture fx = [] {
    CliFixture f;
    const fs::path root = scratch_root();
    f.corpus = root / "corpus";
    f.long_corpus = root / "long";
    f.chunk_uncal = root / "chunk-uncal.ckpt";
    f.chunk_cal = root / "chunk.ckpt";
    f.stream_ckpt = root / "stream.ckpt";
    f.bow_ckpt = root / "bow.ckpt";

    f.gen = run_cli({"gen-synth", "--out-dir", f.corpus.string(), "--n-train",
                     "20", "--n-valid", "8", "--n-test", "8",
                     "--utterances-min", "12", "--utterances-max", "16",
                     "--signal", "0.4", "--seed", "91"});
    f.gen_long = run_cli({"gen-synth", "--out-dir", f.long_corpus.string(),
                          "--n-train", "10", "--n-valid", "4", "--n-test", "4",
                          "--utterances-min", "55", "--utterances-max", "60",
                          "--signal", "0.4", "--seed", "17"});

    f.train_chunk = run_cli(
        {"train", "--corpus-dir", f.corpus.string(), "--model", "chunk-bilstm",
         "--window", "8", "--dim", "32", "--hidden", "8", "--lr", "0.05",
         "--epochs", "4", "--batch", "8", "--seed", "5", "--checkpoint",
         f.chunk_uncal.string()});
    fs::copy_file(f.chunk_uncal, f.chunk_cal,
                  fs::copy_options::overwrite_existing);
    f.calibrate = run_cli({"calibrate", "--corpus-dir", f.corpus.string(),
                           "--checkpoint", f.chunk_cal.string()});

    f.train_stream = run_cli(
        {"train", "--corpus-dir", f.long_corpus.string(), "--model",
         "chunk-bilstm", "--window", "50", "--dim", "16", "--hidden", "4",
         "--lr", "0.05", "--epochs", "2", "--batch", "8", "--seed", "6",
         "--checkpoint", f.stream_ckpt.string()});
    f.calibrate_stream =
        run_cli({"calibrate", "--corpus-dir", f.long_corpus.string(),
                 "--checkpoint", f.stream_ckpt.string()});

    f.train_bow = run_cli({"train", "--corpus-dir", f.corpus.string(),
                           "--model", "logreg", "--vocab-size", "200", "--lr",
                           "0.01", "--epochs", "150", "--seed", "5",
                           "--checkpoint", f.bow_ckpt.string()});
    return f;
  }();
  return fx;
}

}  // namespace

TEST_CASE("training pipeline runs end to end") {
  const CliFixture& fx = fixture();
  REQUIRE(fx.gen.code == 0);
  REQUIRE(fx.gen_long.code == 0);
  REQUIRE(fx.train_chunk.code == 0);
  REQUIRE(fx.calibrate.code == 0);
  REQUIRE(fx.train_stream.code == 0);
  REQUIRE(fx.calibrate_stream.code == 0);
  REQUIRE(fx.train_bow.code == 0);

  CHECK(fs::exists(fx.corpus / "train.jsonl"));
  CHECK(fs::exists(fx.corpus / "valid.jsonl"));
  CHECK(fs::exists(fx.corpus / "test.jsonl"));
  CHECK(fs::exists(fx.corpus / "risk_lexicon.tsv"));
  CHECK(fs::exists(fx.corpus / "manifest.json"));

  CHECK(fx.train_chunk.out.find("epochs\t") != std::string::npos);
  CHECK(fx.train_chunk.out.find("best_epoch\t") != std::string::npos);
  CHECK(fx.train_chunk.err.find("epoch 1 ") != std::string::npos);
  CHECK(fx.calibrate.out.find("t_best\t") != std::string::npos);
  CHECK(fx.calibrate.out.find("valid_accuracy\t") != std::string::npos);
  CHECK(fx.train_bow.out.find("valid_uar\t") != std::string::npos);

  // train writes the manifest next to the checkpoint by default
  CHECK(fs::exists(fs::path(fx.chunk_uncal.string() + ".manifest.json")));
}

TEST_CASE("evaluate reports all metrics and the threshold") {
  const CliFixture& fx = fixture();
  const RunResult r =
      run_cli({"evaluate", "--corpus-dir", fx.corpus.string(), "--checkpoint",
               fx.chunk_cal.string(), "--split", "test"});
  REQUIRE(r.code == 0);
  const std::vector<std::string> lines = split_lines(r.out);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "split\ttest");
  CHECK(lines[1] == "conversations\t8");
  for (const char* key : {"uar", "uap", "macro_f1", "accuracy"}) {
    bool found = false;
    for (const std::string& line : lines)
      if (line.rfind(std::string(key) + "\t", 0) == 0) {
        const double v = std::stod(line.substr(line.find('\t') + 1));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        found = true;
      }
    CHECK(found);
  }
  CHECK(lines[6].rfind("t_best\t", 0) == 0);

  // the planted signal carries most conversations even at this tiny scale
  const std::string uar_line = lines[2];
  REQUIRE(uar_line.rfind("uar\t", 0) == 0);
  CHECK(std::stod(uar_line.substr(4)) >= 0.75);

  const RunResult bow =
      run_cli({"evaluate", "--corpus-dir", fx.corpus.string(), "--checkpoint",
               fx.bow_ckpt.string(), "--split", "test"});
  REQUIRE(bow.code == 0);
  CHECK(bow.out.find("uar\t") != std::string::npos);
  CHECK(bow.out.find("t_best") == std::string::npos);
}

TEST_CASE("usage errors exit 2, help and version exit 0") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
  CHECK(run_cli({"no-such-command"}).code == 2);
  CHECK(run_cli({"gen-synth", "--no-such-flag"}).code == 2);
  CHECK(run_cli({"gen-synth", "--out-dir", "x", "--signal", "1.5"}).code == 2);
  CHECK(run_cli({"train", "--checkpoint", "x"}).code == 2);  // missing corpus

  const RunResult version = run_cli({"--version"});
  CHECK(version.code == 0);
  CHECK(version.out.find("convscreen") != std::string::npos);
}

TEST_CASE("runtime failures exit 1 with a single-line diagnostic") {
  const CliFixture& fx = fixture();

  const RunResult missing =
      run_cli({"train", "--corpus-dir", "/nonexistent", "--checkpoint",
               (scratch_root() / "x.ckpt").string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.rfind("error: ", 0) == 0);
  CHECK(split_lines(missing.err).size() == 1);

  const RunResult uncal =
      run_cli({"evaluate", "--corpus-dir", fx.corpus.string(), "--checkpoint",
               fx.chunk_uncal.string(), "--split", "test"});
  CHECK(uncal.code == 1);
  CHECK(uncal.err.rfind("error: ", 0) == 0);

  const RunResult stream_uncal =
      run_cli({"stream", "--checkpoint", fx.chunk_uncal.string()});
  CHECK(stream_uncal.code == 1);

  const RunResult explain_chunk =
      run_cli({"explain", "--checkpoint", fx.chunk_cal.string(),
               "--corpus-dir", fx.corpus.string()});
  CHECK(explain_chunk.code == 1);

  const RunResult huge_k =
      run_cli({"explain", "--checkpoint", fx.bow_ckpt.string(), "--corpus-dir",
               fx.corpus.string(), "--k", "100000"});
  CHECK(huge_k.code == 1);
}

TEST_CASE("identical runs produce byte-identical outputs") {
  const fs::path a = scratch_root() / "rerun-a";
  const fs::path b = scratch_root() / "rerun-b";
  fs::create_directories(a);
  fs::create_directories(b);

  // same relative flow in both directories; b additionally disables the
  // parallel kernels, which must not change a single byte
  for (const auto& [dir, serial] : {std::pair{a, false}, std::pair{b, true}}) {
    std::vector<std::string> gen = {
        "gen-synth",      "--out-dir", "corpus", "--n-train",
        "12",             "--n-valid", "6",      "--n-test",
        "6",              "--signal",  "0.4",    "--utterances-min",
        "12",             "--utterances-max",    "16",
        "--seed",         "7"};
    REQUIRE(run_cli(gen, dir).code == 0);
    std::vector<std::string> train = {
        "train",        "--corpus-dir", "corpus", "--model", "chunk-bilstm",
        "--window",     "6",            "--dim",  "16",      "--hidden",
        "4",            "--lr",         "0.05",   "--epochs", "2",
        "--batch",      "8",            "--seed",  "3",       "--checkpoint",
        "model.ckpt"};
    if (serial) train.push_back("--serial");
    REQUIRE(run_cli(train, dir).code == 0);
    std::vector<std::string> cal = {"calibrate", "--corpus-dir", "corpus",
                                    "--checkpoint", "model.ckpt"};
    if (serial) cal.push_back("--serial");
    REQUIRE(run_cli(cal, dir).code == 0);
  }

  for (const char* rel :
       {"corpus/train.jsonl", "corpus/valid.jsonl", "corpus/test.jsonl",
        "corpus/risk_lexicon.tsv", "corpus/manifest.json", "model.ckpt",
        "model.ckpt.manifest.json"}) {
    CHECK(slurp(a / rel) == slurp(b / rel));
  }

  const RunResult ea = run_cli({"evaluate", "--corpus-dir", "corpus",
                                "--checkpoint", "model.ckpt"},
                               a);
  const RunResult eb = run_cli({"evaluate", "--corpus-dir", "corpus",
                                "--checkpoint", "model.ckpt", "--serial"},
                               b);
  REQUIRE(ea.code == 0);
  REQUIRE(eb.code == 0);
  CHECK(ea.out == eb.out);
}

TEST_CASE("stream emits one record per filled window") {
  const CliFixture& fx = fixture();

  // pull a real conversation out of the long corpus
  std::ifstream in(fx.long_corpus / "test.jsonl");
  REQUIRE(in.good());
  std::string first_line;
  REQUIRE(std::getline(in, first_line).good());
  const nlohmann::json conv = nlohmann::json::parse(first_line);
  std::vector<std::string> texts;
  for (const auto& u : conv.at("utterances"))
    texts.push_back(u.at("text").get<std::string>());
  REQUIRE(texts.size() >= 55);
  const int label = conv.at("label").get<int>();

  const std::regex record_re(
      R"(^[0-9]+\t[01]\.[0-9]{6}\t(depressed|non-depressed)$)");

  auto feed = [&](std::size_t n) {
    const fs::path input = scratch_root() / ("stream-" + std::to_string(n));
    std::string body;
    for (std::size_t i = 0; i < n; ++i) body += texts[i] + "\n";
    spit(input, body);
    return run_cli({"stream", "--checkpoint", fx.stream_ckpt.string()},
                   scratch_root(), input.string());
  };

  SUBCASE("49 lines: only the end-of-input truncated record") {
    const RunResult r = feed(49);
    REQUIRE(r.code == 0);
    const std::vector<std::string> lines = split_lines(r.out);
    REQUIRE(lines.size() == 1);
    CHECK(std::regex_match(lines[0], record_re));
    CHECK(lines[0].rfind("1\t", 0) == 0);
    // ethics notice goes to stderr, not into the record stream
    int notices = 0;
    for (const std::string& e : split_lines(r.err))
      if (e.rfind("notice:", 0) == 0) ++notices;
    CHECK(notices == 3);
    CHECK(r.err.find("therapist") != std::string::npos);
  }

  SUBCASE("52 lines: three records, running chunk count") {
    const RunResult r = feed(52);
    REQUIRE(r.code == 0);
    const std::vector<std::string> lines = split_lines(r.out);
    REQUIRE(lines.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::regex_match(lines[i], record_re));
      CHECK(lines[i].rfind(std::to_string(i + 1) + "\t", 0) == 0);
    }
  }

  SUBCASE("final stream verdict equals the batch pipeline verdict") {
    const RunResult r = feed(texts.size());
    REQUIRE(r.code == 0);
    const std::vector<std::string> lines = split_lines(r.out);
    REQUIRE(lines.size() == texts.size() - 49);
    const std::string& last = lines.back();
    const bool stream_depressed =
        last.substr(last.rfind('\t') + 1) == "depressed";

    // batch verdict via the library on the same conversation
    const auto [model, meta] = convscreen::read_chunk_checkpoint(
        convscreen::load_checkpoint(fx.stream_ckpt.string()));
    REQUIRE(meta.threshold.has_value());
    REQUIRE(meta.embed_kind == "hash");
    convscreen::Corpus one = convscreen::load_corpus(
        (fx.long_corpus / "test.jsonl").string(), convscreen::Split::test);
    one.conversations.resize(1);
    const convscreen::EmbeddedCorpus emb = convscreen::embed_corpus(
        one, convscreen::HashedEmbedder(meta.embed_dim, meta.embed_seed));
    const std::vector<convscreen::ChunkRef> refs =
        convscreen::make_chunk_refs(emb, meta.window, meta.stride);
    const std::vector<double> probs = convscreen::chunk_probabilities(
        model, emb, refs, convscreen::Exec::serial);
    convscreen::ChunkPredictions preds;
    preds.conversation_id = one.conversations[0].id;
    preds.label = label;
    for (double p : probs) preds.predictions.push_back(p > 0.5 ? 1 : 0);
    const int batch = convscreen::classify_conversation(
        preds, *meta.threshold, meta.threshold_rule);
    CHECK(stream_depressed == (batch == 1));
  }
}

TEST_CASE("explain prints k positive then k negative weights") {
  const CliFixture& fx = fixture();
  const RunResult r =
      run_cli({"explain", "--checkpoint", fx.bow_ckpt.string(), "--corpus-dir",
               fx.corpus.string(), "--k", "3"});
  REQUIRE(r.code == 0);
  const std::vector<std::string> lines = split_lines(r.out);
  REQUIRE(lines.size() == 6);
  const std::regex entry_re(R"(^[^ ]+ \([+-][0-9]+\.[0-9]\)$)");
  for (const std::string& line : lines) CHECK(std::regex_match(line, entry_re));
  // first block carries the positive signs, second the negative
  CHECK(lines[0].find("(+") != std::string::npos);
  CHECK(lines[5].find("(-") != std::string::npos);
}

TEST_CASE("config file sets defaults and flags win") {
  const CliFixture& fx = fixture();
  const fs::path cfg = scratch_root() / "defaults.ini";
  spit(cfg, "[train]\nwindow=6\ndim=16\n");
  const fs::path ckpt = scratch_root() / "cfg.ckpt";
  const RunResult r = run_cli(
      {"--config", cfg.string(), "train", "--corpus-dir", fx.corpus.string(),
       "--model", "chunk-bilstm", "--window", "9", "--hidden", "4", "--lr",
       "0.05", "--epochs", "1", "--seed", "2", "--checkpoint", ckpt.string()});
  REQUIRE(r.code == 0);
  const nlohmann::json manifest =
      nlohmann::json::parse(slurp(ckpt.string() + ".manifest.json"));
  CHECK(manifest.at("config").at("window") == "9");   // flag beats config
  CHECK(manifest.at("config").at("dim") == "16");     // config beats default
  CHECK(manifest.at("config").at("stride") == "1");   // default materialized
}

TEST_CASE("gen-synth is deterministic per seed and writes a manifest first") {
  const fs::path a = scratch_root() / "gen-a";
  const fs::path b = scratch_root() / "gen-b";
  for (const fs::path& dir : {a, b}) {
    REQUIRE(run_cli({"gen-synth", "--out-dir", dir.string(), "--n-train", "6",
                     "--n-valid", "3", "--n-test", "3", "--seed", "123"})
                .code == 0);
  }
  for (const char* rel :
       {"train.jsonl", "valid.jsonl", "test.jsonl", "risk_lexicon.tsv"}) {
    CHECK(slurp(a / rel) == slurp(b / rel));
  }
  const nlohmann::json manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest.at("subcommand") == "gen-synth");
  CHECK(manifest.at("seed") == 123);

  const fs::path c = scratch_root() / "gen-c";
  REQUIRE(run_cli({"gen-synth", "--out-dir", c.string(), "--n-train", "6",
                   "--n-valid", "3", "--n-test", "3", "--seed", "124"})
              .code == 0);
  CHECK(slurp(a / "train.jsonl") != slurp(c / "train.jsonl"));
}
