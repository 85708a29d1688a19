#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bisent2vec/classifier.h"
#include "bisent2vec/eval.h"
#include "bisent2vec/model.h"
#include "bisent2vec/trainer.h"

namespace fs = std::filesystem;
using namespace bisent2vec;

namespace {

Lang parse_lang(const std::string& name) {
  if (name == "l1") return Lang::L1;
  if (name == "l2") return Lang::L2;
  throw CLI::ValidationError("--lang", "must be l1 or l2");
}

std::string strip(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

void add_config_option(CLI::App* cmd) {
  cmd->add_option("--config", "TOML-style config file merged under the flags")
      ->configurable(false);
}

// Merges a TOML-style "key = value" config file under the command line:
// every key becomes --key <value> unless that flag was given explicitly.
std::vector<std::string> merge_config_file(std::vector<std::string> args) {
  std::string path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = strip(line);
    if (trimmed.empty() || trimmed[0] == '#' || trimmed[0] == '[') continue;
    size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    }
    std::string key = strip(trimmed.substr(0, eq));
    std::string value = unquote(strip(trimmed.substr(eq + 1)));
    std::string flag = "--" + key;
    bool given = false;
    for (const std::string& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        given = true;
        break;
      }
    }
    if (given || key == "config") continue;
    if (value == "true") {
      args.push_back(flag);  // bare switch
    } else if (value == "false") {
      continue;
    } else {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

// Every run drops a resolved-config snapshot next to its outputs so it can be
// reproduced exactly.
void write_snapshot(CLI::App* cmd, const std::string& out_dir) {
  fs::create_directories(out_dir);
  fs::path path = fs::path(out_dir) / (cmd->get_name() + "-config.toml");
  std::ofstream out(path);
  out << cmd->config_to_str(true, false);
}

void write_report(const std::vector<MetricRecord>& records,
                  const std::string& out_dir, const std::string& name) {
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / (name + ".jsonl"));
  write_jsonl(records, out);
  print_table(records, std::cout);
}

struct TrainArgs {
  std::string l1, l2, out;
  TrainConfig cfg;
  int64_t max_pairs = -1;
  bool shuffle = false;
};

void add_train(CLI::App& app, TrainArgs& a) {
  CLI::App* cmd = app.add_subcommand(
      "train", "Train bilingual embeddings on a sentence-aligned corpus");
  add_config_option(cmd);
  cmd->add_option("--l1", a.l1, "First-language corpus file")->required();
  cmd->add_option("--l2", a.l2, "Second-language corpus file")->required();
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--dim", a.cfg.dim, "Embedding dimension")->capture_default_str();
  cmd->add_option("--epochs", a.cfg.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", a.cfg.lr0, "Initial learning rate")->capture_default_str();
  cmd->add_option("--negatives", a.cfg.negatives,
                  "Negative samples per target")->capture_default_str();
  cmd->add_option("--ngrams", a.cfg.max_n, "1 = unigrams, 2 = + bigrams")->capture_default_str()
      ->check(CLI::Range(1, 2));
  cmd->add_option("--buckets", a.cfg.buckets, "Bigram hash buckets")->capture_default_str();
  cmd->add_option("--dropout-k", a.cfg.dropout_k,
                  "N-grams dropped per context (-1 = auto)")->capture_default_str();
  cmd->add_option("--min-count", a.cfg.min_count, "Minimum token count")->capture_default_str();
  cmd->add_option("--t", a.cfg.t, "Target subsampling threshold")->capture_default_str();
  cmd->add_option("--threads", a.cfg.threads, "Trainer threads")->capture_default_str();
  cmd->add_option("--seed", a.cfg.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--max-pairs", a.max_pairs,
                  "Train on only the first N pairs (-1 = all)")->capture_default_str();
  cmd->add_flag("--shuffle", a.shuffle, "Seeded shuffle of pairs per epoch");

  cmd->callback([&a, cmd]() {
    if (a.max_pairs >= 0) a.cfg.max_pairs = a.max_pairs;
    a.cfg.shuffle = a.shuffle;
    a.cfg.validate();
    fs::create_directories(a.out);
    write_snapshot(cmd, a.out);

    std::ofstream log(fs::path(a.out) / "train.log");
    TrainResult result = train(a.l1, a.l2, a.cfg, &log);
    for (const EpochReport& e : result.epochs) {
      std::cout << "epoch " << e.epoch << "/" << a.cfg.epochs << "  avg_loss "
                << std::fixed << std::setprecision(6) << e.avg_loss
                << std::defaultfloat << "  targets " << e.targets << "\n";
    }
    save_model(result.model, (fs::path(a.out) / "model.bin").string());
    export_text(result.model, Lang::L1, ExportMatrix::InputUnigrams,
                (fs::path(a.out) / "vectors.l1.txt").string());
    export_text(result.model, Lang::L2, ExportMatrix::InputUnigrams,
                (fs::path(a.out) / "vectors.l2.txt").string());
    std::cout << "model written to " << a.out << "\n";
  });
}

struct EvalWtArgs {
  std::string model, dict, criterion = "csls", direction = "l1l2";
  std::string out = ".";
  int csls_k = 10;
  int64_t queries = 1500;
  int64_t candidates = 200000;
};

void add_eval_wt(CLI::App& app, EvalWtArgs& a) {
  CLI::App* cmd = app.add_subcommand(
      "eval-wt", "Word translation retrieval against a bilingual dictionary");
  add_config_option(cmd);
  cmd->add_option("--model", a.model, "Trained model file")->required();
  cmd->add_option("--dict", a.dict, "Dictionary, one \"source target\" per line")
      ->required();
  cmd->add_option("--criterion", a.criterion, "nn or csls")->capture_default_str()
      ->check(CLI::IsMember({"nn", "csls"}));
  cmd->add_option("--csls-k", a.csls_k, "CSLS neighborhood size")->capture_default_str();
  cmd->add_option("--queries", a.queries, "Max dictionary queries")->capture_default_str();
  cmd->add_option("--candidates", a.candidates,
                  "Candidate pool: most frequent target words")->capture_default_str();
  cmd->add_option("--direction", a.direction, "l1l2 or l2l1")->capture_default_str()
      ->check(CLI::IsMember({"l1l2", "l2l1"}));
  cmd->add_option("--out", a.out, "Report directory")->capture_default_str();

  cmd->callback([&a, cmd]() {
    Model model = load_model(a.model);
    bool fwd = a.direction == "l1l2";
    WordVectors src = vectors_from_model(model, fwd ? Lang::L1 : Lang::L2);
    WordVectors tgt = vectors_from_model(model, fwd ? Lang::L2 : Lang::L1);
    BilingualDictionary dict = load_dictionary(a.dict);
    WordTranslationResult res =
        word_translation_p1(src, tgt, dict, parse_criterion(a.criterion),
                            a.csls_k, a.queries, a.candidates);
    write_snapshot(cmd, a.out);
    write_report({{"word_translation_p1", fwd ? "l1->l2" : "l2->l1",
                   a.criterion, res.p1, res.coverage}},
                 a.out, "eval-wt");
  });
}

struct EvalSrArgs {
  std::string model, l1, l2, weight_l1, weight_l2, criterion = "csls";
  std::string out = ".";
  int csls_k = 10;
  int64_t queries = 2000;
  int64_t candidates = 200000;
};

void add_eval_sr(CLI::App& app, EvalSrArgs& a) {
  CLI::App* cmd = app.add_subcommand(
      "eval-sr", "Cross-lingual sentence retrieval over aligned sentences");
  add_config_option(cmd);
  cmd->add_option("--model", a.model, "Trained model file")->required();
  cmd->add_option("--l1", a.l1, "Aligned l1 evaluation sentences")->required();
  cmd->add_option("--l2", a.l2, "Aligned l2 evaluation sentences")->required();
  cmd->add_option("--weight-l1", a.weight_l1,
                  "l1 corpus for idf weights (default: --l1)");
  cmd->add_option("--weight-l2", a.weight_l2,
                  "l2 corpus for idf weights (default: --l2)");
  cmd->add_option("--criterion", a.criterion, "nn or csls")->capture_default_str()
      ->check(CLI::IsMember({"nn", "csls"}));
  cmd->add_option("--csls-k", a.csls_k, "CSLS neighborhood size")->capture_default_str();
  cmd->add_option("--queries", a.queries, "Max queries per direction")->capture_default_str();
  cmd->add_option("--candidates", a.candidates, "Max candidate sentences")->capture_default_str();
  cmd->add_option("--out", a.out, "Report directory")->capture_default_str();

  cmd->callback([&a, cmd]() {
    Model model = load_model(a.model);
    WordVectors l1_vecs = vectors_from_model(model, Lang::L1);
    WordVectors l2_vecs = vectors_from_model(model, Lang::L2);
    auto src = load_sentences(a.l1);
    auto tgt = load_sentences(a.l2);
    auto weight_src =
        a.weight_l1.empty() ? src : load_sentences(a.weight_l1);
    auto weight_tgt =
        a.weight_l2.empty() ? tgt : load_sentences(a.weight_l2);
    SentenceRetrievalResult res = sentence_retrieval_p1(
        src, tgt, weight_src, weight_tgt, l1_vecs, l2_vecs,
        parse_criterion(a.criterion), a.csls_k, a.queries, a.candidates);
    double cov =
        src.empty() ? 0.0
                    : 1.0 - double(res.excluded) / double(src.size());
    write_snapshot(cmd, a.out);
    write_report({{"sentence_retrieval_p1", "l1->l2", a.criterion, res.p1_fwd,
                   cov},
                  {"sentence_retrieval_p1", "l2->l1", a.criterion, res.p1_bwd,
                   cov}},
                 a.out, "eval-sr");
  });
}

struct EvalWsArgs {
  std::string model, dict, lang = "l1";
  std::string out = ".";
};

void add_eval_ws(CLI::App& app, EvalWsArgs& a) {
  CLI::App* cmd = app.add_subcommand(
      "eval-ws", "Monolingual word similarity (Pearson vs human scores)");
  add_config_option(cmd);
  cmd->add_option("--model", a.model, "Trained model file")->required();
  cmd->add_option("--dict", a.dict, "Dataset: \"word1 word2 score\" per line")
      ->required();
  cmd->add_option("--lang", a.lang, "l1 or l2")->capture_default_str()
      ->check(CLI::IsMember({"l1", "l2"}));
  cmd->add_option("--out", a.out, "Report directory")->capture_default_str();

  cmd->callback([&a, cmd]() {
    Model model = load_model(a.model);
    WordVectors vecs = vectors_from_model(model, parse_lang(a.lang));
    SimilarityDataset ds = load_similarity_dataset(a.dict);
    WordSimilarityResult res = word_similarity_eval(vecs, ds);
    write_snapshot(cmd, a.out);
    write_report({{"word_similarity_pearson", a.lang, "cosine", res.pearson,
                   res.coverage}},
                 a.out, "eval-ws");
  });
}

struct ClassifyTrainArgs {
  std::string model, docs, lang = "l1", out;
  ClassifierTrainConfig cfg;
};

void add_classify_train(CLI::App& app, ClassifyTrainArgs& a) {
  CLI::App* cmd = app.add_subcommand(
      "classify-train", "Train the document classifier on one language");
  add_config_option(cmd);
  cmd->add_option("--model", a.model, "Trained model file")->required();
  cmd->add_option("--docs", a.docs, "Labeled documents file")->required();
  cmd->add_option("--lang", a.lang, "Language of the documents")->capture_default_str()
      ->check(CLI::IsMember({"l1", "l2"}));
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--epochs", a.cfg.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--batch-size", a.cfg.batch_size, "Mini-batch size")->capture_default_str();
  cmd->add_option("--lr", a.cfg.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--seed", a.cfg.seed, "RNG seed")->capture_default_str();

  cmd->callback([&a, cmd]() {
    Model model = load_model(a.model);
    auto docs = load_documents(a.docs);
    MlpParams params = train_classifier(docs, model, parse_lang(a.lang), a.cfg);
    fs::create_directories(a.out);
    write_snapshot(cmd, a.out);
    save_classifier(params, (fs::path(a.out) / "classifier.json").string());
    std::cout << "classifier written to " << a.out << "\n";
  });
}

struct ClassifyEvalArgs {
  std::string model, docs, classifier, lang = "l2";
  std::string out = ".";
};

void add_classify_eval(CLI::App& app, ClassifyEvalArgs& a) {
  CLI::App* cmd = app.add_subcommand(
      "classify-eval", "Evaluate a trained classifier on another language");
  add_config_option(cmd);
  cmd->add_option("--model", a.model, "Trained model file")->required();
  cmd->add_option("--docs", a.docs, "Labeled documents file")->required();
  cmd->add_option("--classifier", a.classifier, "classifier.json path")
      ->required();
  cmd->add_option("--lang", a.lang, "Language of the documents")->capture_default_str()
      ->check(CLI::IsMember({"l1", "l2"}));
  cmd->add_option("--out", a.out, "Report directory")->capture_default_str();

  cmd->callback([&a, cmd]() {
    Model model = load_model(a.model);
    auto docs = load_documents(a.docs);
    MlpParams params = load_classifier(a.classifier);
    ClassifierEvalResult res =
        evaluate_classifier(params, docs, model, parse_lang(a.lang));
    double cov = res.total == 0
                     ? 0.0
                     : 1.0 - double(res.oov_docs) / double(res.total);
    std::cout << "accuracy " << std::fixed << std::setprecision(4)
              << res.accuracy << std::defaultfloat << " (" << res.correct
              << "/" << res.total << ", " << res.oov_docs
              << " OOV documents counted as errors)\n";
    write_snapshot(cmd, a.out);
    write_report({{"classification_accuracy", a.lang, "argmax", res.accuracy,
                   cov}},
                 a.out, "classify-eval");
  });
}

struct ExportArgs {
  std::string model, lang = "l1", which = "input", out;
};

void add_export(CLI::App& app, ExportArgs& a) {
  CLI::App* cmd = app.add_subcommand(
      "export", "Write word vectors in word2vec text format");
  add_config_option(cmd);
  cmd->add_option("--model", a.model, "Trained model file")->required();
  cmd->add_option("--lang", a.lang, "l1 or l2")->capture_default_str()
      ->check(CLI::IsMember({"l1", "l2"}));
  cmd->add_option("--which", a.which, "input (unigram rows) or output")->capture_default_str()
      ->check(CLI::IsMember({"input", "output"}));
  cmd->add_option("--out", a.out, "Output text file")->required();

  cmd->callback([&a, cmd]() {
    Model model = load_model(a.model);
    export_text(model, parse_lang(a.lang),
                a.which == "input" ? ExportMatrix::InputUnigrams
                                   : ExportMatrix::Output,
                a.out);
    fs::path dir = fs::path(a.out).parent_path();
    write_snapshot(cmd, dir.empty() ? "." : dir.string());
    std::cout << "vectors written to " << a.out << "\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilingual word and sentence embeddings from parallel corpora"};
  app.require_subcommand(1);

  TrainArgs train_args;
  EvalWtArgs wt_args;
  EvalSrArgs sr_args;
  EvalWsArgs ws_args;
  ClassifyTrainArgs ct_args;
  ClassifyEvalArgs ce_args;
  ExportArgs export_args;

  add_train(app, train_args);
  add_eval_wt(app, wt_args);
  add_eval_sr(app, sr_args);
  add_eval_ws(app, ws_args);
  add_classify_train(app, ct_args);
  add_classify_eval(app, ce_args);
  add_export(app, export_args);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config_file(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
