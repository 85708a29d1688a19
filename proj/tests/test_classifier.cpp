#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bisent2vec/classifier.h"
#include "support/tempdir.h"

using namespace bisent2vec;
using testsupport::TempDir;

namespace {

// A model whose l1 word vectors are handed in directly; l2 mirrors them.
Model fixed_vector_model(const std::vector<std::string>& words,
                         const std::vector<std::vector<float>>& rows) {
  Model m;
  std::vector<std::pair<std::string, int64_t>> l1, l2;
  for (const auto& w : words) {
    l1.emplace_back(w, 5);
    l2.emplace_back(w + "_2", 5);
  }
  m.vocab = Vocabulary::from_counts(l1, l2, 5 * int64_t(words.size()),
                                    5 * int64_t(words.size()), 1, 10.0);
  m.cfg = TrainConfig{};
  m.cfg.dim = int(rows[0].size());
  m.cfg.max_n = 1;
  m.cfg.min_count = 1;
  m.cfg.t = 10.0;
  m.mats.dim = m.cfg.dim;
  m.mats.input = Matrix(m.vocab.size(), m.cfg.dim);
  m.mats.output = Matrix(m.vocab.size(), m.cfg.dim);
  for (size_t i = 0; i < words.size(); ++i) {
    WordId w1 = m.vocab.find(Lang::L1, words[i]);
    WordId w2 = m.vocab.find(Lang::L2, words[i] + "_2");
    std::copy(rows[i].begin(), rows[i].end(), m.mats.input.row(w1).begin());
    std::copy(rows[i].begin(), rows[i].end(), m.mats.input.row(w2).begin());
  }
  return m;
}

LabeledDocument doc(int label, std::initializer_list<std::string> sents) {
  LabeledDocument d;
  d.label = label;
  for (const auto& line : sents) {
    std::vector<std::string> toks;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    d.sentences.push_back(std::move(toks));
  }
  return d;
}

}  // namespace

TEST_CASE("document file parsing") {
  TempDir dir;
  auto path = dir.write("docs.txt",
                        "0\n"
                        "a b c\n"
                        "d e\n"
                        "\n"
                        "2\n"
                        "f\n"
                        "\n"
                        "\n"
                        "1\n"
                        "g h\n");
  auto docs = load_documents(path);
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].label == 0);
  CHECK(docs[0].sentences.size() == 2);
  CHECK(docs[1].label == 2);
  CHECK(docs[2].label == 1);
  CHECK(docs[2].sentences[0] == std::vector<std::string>{"g", "h"});

  auto bad = dir.write("bad.txt", "not-a-label\nx\n");
  CHECK_THROWS_WITH_AS(load_documents(bad), doctest::Contains(":1:"),
                       std::runtime_error);
}

TEST_CASE("doc_embed sums sentence averages") {
  Model m = fixed_vector_model({"p", "q"}, {{2, 0}, {0, 4}});

  SUBCASE("one sentence is that sentence's embedding") {
    auto v = doc_embed(doc(0, {"p q"}), m, Lang::L1);
    REQUIRE(v);
    CHECK((*v)[0] == doctest::Approx(1.0));
    CHECK((*v)[1] == doctest::Approx(2.0));
  }
  SUBCASE("two identical sentences double it") {
    auto v = doc_embed(doc(0, {"p q", "p q"}), m, Lang::L1);
    REQUIRE(v);
    CHECK((*v)[0] == doctest::Approx(2.0));
    CHECK((*v)[1] == doctest::Approx(4.0));
  }
  SUBCASE("sentence order is irrelevant") {
    auto a = doc_embed(doc(0, {"p", "q q"}), m, Lang::L1);
    auto b = doc_embed(doc(0, {"q q", "p"}), m, Lang::L1);
    REQUIRE(a);
    REQUIRE(b);
    CHECK((*a)[0] == doctest::Approx((*b)[0]));
    CHECK((*a)[1] == doctest::Approx((*b)[1]));
  }
  SUBCASE("OOV sentences contribute nothing; fully OOV docs embed to nothing") {
    auto v = doc_embed(doc(0, {"p", "zzz"}), m, Lang::L1);
    REQUIRE(v);
    CHECK((*v)[0] == doctest::Approx(2.0));
    CHECK_FALSE(doc_embed(doc(0, {"zzz yyy"}), m, Lang::L1));
  }
  SUBCASE("l2 lookups use the l2 vocabulary") {
    auto v = doc_embed(doc(0, {"p_2"}), m, Lang::L2);
    REQUIRE(v);
    CHECK((*v)[0] == doctest::Approx(2.0));
    CHECK_FALSE(doc_embed(doc(0, {"p"}), m, Lang::L2));
  }
}

TEST_CASE("mlp forward properties") {
  MlpParams zero = init_mlp(4, 3, 1);
  for (auto* w : {&zero.w1, &zero.w2, &zero.w3}) {
    std::fill(w->begin(), w->end(), 0.0);
  }
  std::vector<double> x{0.3, -1.2, 0.5, 2.0};

  SUBCASE("all-zero parameters give the uniform distribution") {
    auto probs = mlp_forward(x, zero);
    for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("probabilities sum to 1 on random parameters") {
    MlpParams p = init_mlp(4, 3, 99);
    auto probs = mlp_forward(x, p);
    CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
    for (double v : probs) CHECK(v >= 0.0);
  }
  SUBCASE("adding a constant to every output bias changes nothing") {
    MlpParams p = init_mlp(4, 3, 99);
    auto before = mlp_forward(x, p);
    for (double& b : p.b3) b += 7.5;
    auto after = mlp_forward(x, p);
    for (size_t c = 0; c < before.size(); ++c) {
      CHECK(after[c] == doctest::Approx(before[c]).epsilon(1e-9));
    }
  }
}

TEST_CASE("mlp gradients match finite differences") {
  MlpParams p = init_mlp(5, 4, 7);
  Rng rng(3);
  std::vector<double> x(5);
  for (double& v : x) v = rng.uniform01() * 2.0 - 1.0;
  const int label = 2;

  MlpGrads grads(p);
  mlp_loss_grad(x, label, p, &grads);

  const double h = 1e-5;
  auto check = [&](std::vector<double>& theta, const std::vector<double>& g) {
    for (size_t i = 0; i < theta.size(); ++i) {
      double keep = theta[i];
      theta[i] = keep + h;
      double up = mlp_loss_grad(x, label, p, nullptr);
      theta[i] = keep - h;
      double down = mlp_loss_grad(x, label, p, nullptr);
      theta[i] = keep;
      double fd = (up - down) / (2.0 * h);
      double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-8});
      CHECK(std::abs(fd - g[i]) / denom < 1e-4);
    }
  };
  check(p.w1, grads.w1);
  check(p.b1, grads.b1);
  check(p.w2, grads.w2);
  check(p.b2, grads.b2);
  check(p.w3, grads.w3);
  check(p.b3, grads.b3);
}

TEST_CASE("adam steps") {
  MlpParams p = init_mlp(2, 2, 5);
  AdamState s(p, 1e-3);
  MlpGrads g(p);

  SUBCASE("zero gradient leaves parameters unchanged") {
    MlpParams before = p;
    adam_step(p, g, s);
    CHECK(p.w1 == before.w1);
    CHECK(p.b3 == before.b3);
  }
  SUBCASE("first step moves by about -lr * sign(g)") {
    for (size_t i = 0; i < g.w1.size(); ++i) g.w1[i] = (i % 2) ? 0.3 : -1.7;
    MlpParams before = p;
    adam_step(p, g, s);
    for (size_t i = 0; i < p.w1.size(); ++i) {
      double expected = (i % 2) ? -1e-3 : 1e-3;
      CHECK(p.w1[i] - before.w1[i] == doctest::Approx(expected).epsilon(1e-4));
    }
  }
  SUBCASE("a second identical step is no larger than the first") {
    for (size_t i = 0; i < g.w2.size(); ++i) g.w2[i] = 0.42;
    MlpParams p0 = p;
    adam_step(p, g, s);
    MlpParams p1 = p;
    adam_step(p, g, s);
    for (size_t i = 0; i < p.w2.size(); ++i) {
      double first = std::abs(p1.w2[i] - p0.w2[i]);
      double second = std::abs(p.w2[i] - p1.w2[i]);
      CHECK(second <= first + 1e-9);
    }
  }
}

TEST_CASE("training separates a linearly separable toy set") {
  Model m = fixed_vector_model({"pos", "neg"}, {{1, 0.2f}, {-1, -0.1f}});
  std::vector<LabeledDocument> docs;
  for (int i = 0; i < 8; ++i) {
    docs.push_back(doc(0, {"pos pos", "pos"}));
    docs.push_back(doc(1, {"neg", "neg neg"}));
  }
  ClassifierTrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 11;
  MlpParams p = train_classifier(docs, m, Lang::L1, cfg);
  auto res = evaluate_classifier(p, docs, m, Lang::L1);
  CHECK(res.accuracy == 1.0);

  SUBCASE("training is deterministic in the seed") {
    MlpParams q = train_classifier(docs, m, Lang::L1, cfg);
    CHECK(p.w1 == q.w1);
    CHECK(p.b3 == q.b3);
  }
}

TEST_CASE("training requires at least one embeddable document") {
  Model m = fixed_vector_model({"pos", "neg"}, {{1, 0.2f}, {-1, -0.1f}});
  ClassifierTrainConfig cfg;
  CHECK_THROWS_AS(train_classifier({}, m, Lang::L1, cfg), std::runtime_error);
  std::vector<LabeledDocument> oov{doc(0, {"zzz"})};
  CHECK_THROWS_AS(train_classifier(oov, m, Lang::L1, cfg), std::runtime_error);
}

TEST_CASE("a single document is overfit to high confidence") {
  Model m = fixed_vector_model({"pos", "neg"}, {{1, 0.2f}, {-1, -0.1f}});
  std::vector<LabeledDocument> docs{doc(1, {"pos neg", "pos"})};
  ClassifierTrainConfig cfg;
  cfg.epochs = 300;
  cfg.patience = 300;
  cfg.seed = 2;
  MlpParams p = train_classifier(docs, m, Lang::L1, cfg);
  auto x = doc_embed(docs[0], m, Lang::L1);
  REQUIRE(x);
  auto probs = mlp_forward(*x, p);
  CHECK(probs[1] > 0.9);
}

TEST_CASE("random parameters score about 1/C on random labels") {
  Rng rng(20);
  std::vector<std::string> words;
  std::vector<std::vector<float>> rows;
  for (int i = 0; i < 30; ++i) {
    words.push_back("w" + std::to_string(i));
    rows.push_back({float(rng.uniform01() - 0.5), float(rng.uniform01() - 0.5),
                    float(rng.uniform01() - 0.5)});
  }
  Model m = fixed_vector_model(words, rows);
  const int classes = 4;
  std::vector<LabeledDocument> docs;
  for (int i = 0; i < 2000; ++i) {
    LabeledDocument d;
    d.label = int(rng.uniform_below(classes));
    std::vector<std::string> sent;
    for (int k = 0; k < 5; ++k) sent.push_back(words[rng.uniform_below(30)]);
    d.sentences.push_back(std::move(sent));
    docs.push_back(std::move(d));
  }
  MlpParams p = init_mlp(3, classes, 123);
  auto res = evaluate_classifier(p, docs, m, Lang::L1);
  // 3 binomial sigma around 1/4 at n = 2000.
  double sigma = std::sqrt(0.25 * 0.75 / 2000.0);
  CHECK(std::abs(res.accuracy - 0.25) < 3.0 * sigma + 1e-9);
}

TEST_CASE("evaluation counts OOV documents as errors") {
  Model m = fixed_vector_model({"pos", "neg"}, {{1, 0}, {-1, 0}});
  std::vector<LabeledDocument> docs{doc(0, {"pos"}), doc(0, {"zzz"})};
  MlpParams p = init_mlp(2, 2, 1);
  auto res = evaluate_classifier(p, docs, m, Lang::L1);
  CHECK(res.total == 2);
  CHECK(res.oov_docs == 1);
  CHECK(res.accuracy <= 0.5);
  CHECK_THROWS_AS(evaluate_classifier(p, {}, m, Lang::L1), std::runtime_error);
}

TEST_CASE("classifier parameters roundtrip through JSON") {
  TempDir dir;
  MlpParams p = init_mlp(6, 3, 77);
  auto path = dir.file("clf.json");
  save_classifier(p, path);
  MlpParams q = load_classifier(path);
  CHECK(q.dim == p.dim);
  CHECK(q.classes == p.classes);
  CHECK(q.w1 == p.w1);
  CHECK(q.b1 == p.b1);
  CHECK(q.w3 == p.w3);
}
