#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include "bisent2vec/eval.h"
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/synthetic.h"
#include "support/tempdir.h"

namespace fs = std::filesystem;
using testsupport::TempDir;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

// Runs the CLI binary, capturing combined stdout/stderr.
RunResult run_cli(const TempDir& dir, const std::string& args) {
  std::string capture = dir.file("cli-capture.txt");
  std::string cmd = std::string(BISENT2VEC_CLI_PATH) + " " + args + " > " +
                    capture + " 2>&1";
  int status = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  res.output = testsupport::slurp(capture);
  return res;
}

struct CliFixture {
  TempDir dir;
  std::string l1, l2, model_dir;

  CliFixture() {
    auto corpus = testsupport::make_cipher_corpus(15, 60, 3, 6, 1.0, 101);
    l1 = dir.write("l1.txt", corpus.l1_text(0, corpus.sentences.size()));
    l2 = dir.write("l2.txt", corpus.l2_text(0, corpus.sentences.size()));
    dir.write("dict.txt", corpus.dictionary(true));
    model_dir = dir.file("model");
  }

  std::string train_flags(const std::string& out,
                          const std::string& extra = "") const {
    return "train --l1 " + l1 + " --l2 " + l2 + " --out " + out +
           " --dim 8 --epochs 2 --lr 0.2 --negatives 3 --min-count 1"
           " --t 0.05 --threads 1 --seed 5 " + extra;
  }
};

}  // namespace

TEST_CASE("cli: missing required flag is a usage error (exit 2)") {
  TempDir dir;
  auto res = run_cli(dir, "train --l1 whatever.txt");
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("--l2") != std::string::npos);

  auto unknown = run_cli(dir, "no-such-command");
  CHECK(unknown.exit_code == 2);
}

TEST_CASE("cli: runtime failures exit 1") {
  TempDir dir;
  auto res = run_cli(dir, "train --l1 " + dir.file("nope1.txt") + " --l2 " +
                              dir.file("nope2.txt") + " --out " +
                              dir.file("out"));
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("error:") != std::string::npos);
}

TEST_CASE("cli: train writes model, exports, config snapshot, and log") {
  CliFixture fx;
  auto res = run_cli(fx.dir, fx.train_flags(fx.model_dir));
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("epoch 1/2") != std::string::npos);
  CHECK(fs::exists(fs::path(fx.model_dir) / "model.bin"));
  CHECK(fs::exists(fs::path(fx.model_dir) / "vectors.l1.txt"));
  CHECK(fs::exists(fs::path(fx.model_dir) / "vectors.l2.txt"));
  CHECK(fs::exists(fs::path(fx.model_dir) / "train.log"));
  std::string snapshot =
      testsupport::slurp((fs::path(fx.model_dir) / "train-config.toml").string());
  CHECK(snapshot.find("dim=8") != std::string::npos);
  CHECK(snapshot.find("seed=5") != std::string::npos);

  SUBCASE("an identical second run reproduces the model bytes") {
    std::string second = fx.dir.file("model2");
    auto res2 = run_cli(fx.dir, fx.train_flags(second));
    REQUIRE(res2.exit_code == 0);
    CHECK(testsupport::slurp((fs::path(fx.model_dir) / "model.bin").string()) ==
          testsupport::slurp((fs::path(second) / "model.bin").string()));
  }

  SUBCASE("evaluations run against the trained model") {
    std::string model = (fs::path(fx.model_dir) / "model.bin").string();
    std::string report_dir = fx.dir.file("reports");

    auto wt = run_cli(fx.dir, "eval-wt --model " + model + " --dict " +
                                  fx.dir.file("dict.txt") +
                                  " --criterion csls --csls-k 3 --out " +
                                  report_dir);
    CHECK(wt.exit_code == 0);
    CHECK(wt.output.find("word_translation_p1") != std::string::npos);
    CHECK(fs::exists(fs::path(report_dir) / "eval-wt.jsonl"));

    auto sr = run_cli(fx.dir, "eval-sr --model " + model + " --l1 " + fx.l1 +
                                  " --l2 " + fx.l2 +
                                  " --criterion nn --queries 20"
                                  " --candidates 100 --out " +
                                  report_dir);
    CHECK(sr.exit_code == 0);
    CHECK(fs::exists(fs::path(report_dir) / "eval-sr.jsonl"));

    // Word-similarity dataset from the corpus surfaces; the reported value
    // must match an independent computation over the same model file.
    auto sim_path = fx.dir.write(
        "sim.txt", "w000 w001 0.9\nw000 w002 0.4\nw001 w003 0.2\n");
    auto ws = run_cli(fx.dir, "eval-ws --model " + model + " --dict " +
                                  sim_path + " --lang l1 --out " +
                                  report_dir);
    CHECK(ws.exit_code == 0);
    {
      bisent2vec::Model m = bisent2vec::load_model(model);
      auto vecs = bisent2vec::vectors_from_model(m, bisent2vec::Lang::L1);
      auto ds = bisent2vec::load_similarity_dataset(sim_path);
      auto expected = bisent2vec::word_similarity_eval(vecs, ds);
      std::ifstream jsonl(fs::path(report_dir) / "eval-ws.jsonl");
      nlohmann::json record;
      jsonl >> record;
      CHECK(record.at("value").get<double>() ==
            doctest::Approx(expected.pearson).epsilon(1e-9));
      CHECK(record.at("coverage").get<double>() == doctest::Approx(1.0));
    }

    auto exp = run_cli(fx.dir, "export --model " + model +
                                   " --lang l2 --which input --out " +
                                   fx.dir.file("l2.vec"));
    CHECK(exp.exit_code == 0);
    std::ifstream vec(fx.dir.file("l2.vec"));
    std::string header;
    std::getline(vec, header);
    CHECK(header.find(" 8") != std::string::npos);
  }
}

TEST_CASE("cli: --max-pairs restricts training and is recorded") {
  CliFixture fx;
  std::string out = fx.dir.file("ablate");
  auto res = run_cli(fx.dir, fx.train_flags(out, "--max-pairs 10"));
  REQUIRE(res.exit_code == 0);
  std::string snapshot =
      testsupport::slurp((fs::path(out) / "train-config.toml").string());
  CHECK(snapshot.find("max-pairs=10") != std::string::npos);
}

TEST_CASE("cli: config file supplies flags, command line wins") {
  CliFixture fx;
  std::string cfg_path = fx.dir.write(
      "train.toml", "l1=\"" + fx.l1 + "\"\nl2=\"" + fx.l2 +
                        "\"\ndim=6\nepochs=1\nmin-count=1\nt=0.05\nseed=9\n");
  std::string out = fx.dir.file("from-config");
  auto res = run_cli(fx.dir, "train --config " + cfg_path + " --out " + out +
                                 " --dim 4");
  REQUIRE(res.exit_code == 0);
  std::string snapshot =
      testsupport::slurp((fs::path(out) / "train-config.toml").string());
  CHECK(snapshot.find("dim=4") != std::string::npos);  // flag overrides file
  CHECK(snapshot.find("epochs=1") != std::string::npos);

  // Malformed similarity data names the offending line.
  std::string model = (fs::path(out) / "model.bin").string();
  fx.dir.write("badsim.txt", "w000 w001 0.5\nw000 w001\n");
  auto ws = run_cli(fx.dir, "eval-ws --model " + model + " --dict " +
                                fx.dir.file("badsim.txt") + " --out " +
                                fx.dir.file("r"));
  CHECK(ws.exit_code == 1);
  CHECK(ws.output.find(":2:") != std::string::npos);
}

TEST_CASE("cli: cipher-corpus word translation clears 0.9 end to end") {
  TempDir dir;
  auto corpus = testsupport::make_cipher_corpus(100, 5000, 5, 12, 1.0, 99);
  auto l1 = dir.write("c.l1", corpus.l1_text(0, 5000));
  auto l2 = dir.write("c.l2", corpus.l2_text(0, 5000));
  auto dict = dir.write("c.dict", corpus.dictionary(true));
  std::string out = dir.file("cipher-model");

  auto tr = run_cli(dir, "train --l1 " + l1 + " --l2 " + l2 + " --out " + out +
                             " --dim 50 --epochs 5 --lr 0.2 --negatives 10"
                             " --min-count 5 --t 1e-4 --threads 1 --seed 7");
  REQUIRE(tr.exit_code == 0);

  std::string report_dir = dir.file("cipher-report");
  auto wt = run_cli(dir, "eval-wt --model " + out + "/model.bin --dict " +
                             dict + " --criterion csls --out " + report_dir);
  REQUIRE(wt.exit_code == 0);
  std::ifstream jsonl(fs::path(report_dir) / "eval-wt.jsonl");
  nlohmann::json record;
  jsonl >> record;
  CHECK(record.at("name") == "word_translation_p1");
  CHECK(record.at("criterion") == "csls");
  CHECK(record.at("value").get<double>() >= 0.9);
  CHECK(record.at("coverage").get<double>() == 1.0);
}

TEST_CASE("cli: classifier train/eval roundtrip prints 4-decimal accuracy") {
  CliFixture fx;
  auto res = run_cli(fx.dir, fx.train_flags(fx.model_dir));
  REQUIRE(res.exit_code == 0);
  std::string model = (fs::path(fx.model_dir) / "model.bin").string();

  auto corpus = testsupport::make_cipher_corpus(15, 60, 3, 6, 1.0, 101);
  fx.dir.write("docs-l1.txt", testsupport::make_topic_docs(corpus, false, 2, 20, 55));
  fx.dir.write("docs-l2.txt", testsupport::make_topic_docs(corpus, true, 2, 10, 56));

  std::string clf_dir = fx.dir.file("clf");
  auto ct = run_cli(fx.dir, "classify-train --model " + model + " --docs " +
                                fx.dir.file("docs-l1.txt") +
                                " --lang l1 --epochs 30 --seed 3 --out " +
                                clf_dir);
  REQUIRE(ct.exit_code == 0);
  CHECK(fs::exists(fs::path(clf_dir) / "classifier.json"));

  auto ce = run_cli(fx.dir, "classify-eval --model " + model + " --docs " +
                                fx.dir.file("docs-l2.txt") +
                                " --lang l2 --classifier " +
                                (fs::path(clf_dir) / "classifier.json").string() +
                                " --out " + fx.dir.file("clf-report"));
  REQUIRE(ce.exit_code == 0);
  CHECK(ce.output.find("accuracy 0.") != std::string::npos);
  // Four decimals after the point.
  size_t pos = ce.output.find("accuracy ");
  REQUIRE(pos != std::string::npos);
  std::string rest = ce.output.substr(pos + 9);
  CHECK(rest.find(' ') == 6);  // "D.DDDD"
}
