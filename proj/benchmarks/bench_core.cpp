#include <benchmark/benchmark.h>

#include <vector>

#include "bisent2vec/corpus.h"
#include "bisent2vec/eval.h"
#include "bisent2vec/model.h"
#include "bisent2vec/trainer.h"

using namespace bisent2vec;

namespace {

Vocabulary bench_vocab(int words_per_lang) {
  std::vector<std::pair<std::string, int64_t>> l1, l2;
  Rng rng(7);
  int64_t tot = 0;
  for (int i = 0; i < words_per_lang; ++i) {
    int64_t c = 1 + int64_t(rng.uniform_below(5000));
    l1.emplace_back("a" + std::to_string(i), c);
    l2.emplace_back("b" + std::to_string(i), c);
    tot += c;
  }
  return Vocabulary::from_counts(l1, l2, tot, tot, 1, 1e-3);
}

struct StepBench {
  Vocabulary vocab = bench_vocab(1000);
  TrainConfig cfg;
  NegativeTable tables[2];
  EmbeddingMatrices mats;
  std::vector<SentencePair> pairs;

  explicit StepBench(int dim, int max_n) {
    cfg.dim = dim;
    cfg.max_n = max_n;
    cfg.buckets = 1 << 16;
    cfg.negatives = 10;
    cfg.t = 1e-3;
    cfg.min_count = 1;
    tables[0] = build_negative_table(vocab, Lang::L1, 100000);
    tables[1] = build_negative_table(vocab, Lang::L2, 100000);
    mats = init_matrices(vocab.size(), cfg, 3);
    Rng rng(11);
    auto [b1, e1] = vocab.lang_range(Lang::L1);
    auto [b2, e2] = vocab.lang_range(Lang::L2);
    for (int i = 0; i < 64; ++i) {
      SentencePair p;
      for (int j = 0; j < 10; ++j) {
        p.l1.push_back(WordId(b1 + rng.uniform_below(uint64_t(e1 - b1))));
        p.l2.push_back(WordId(b2 + rng.uniform_below(uint64_t(e2 - b2))));
      }
      pairs.push_back(std::move(p));
    }
  }
};

void BM_StepPair(benchmark::State& state) {
  StepBench bench(int(state.range(0)), int(state.range(1)));
  ProgressState progress;
  progress.total = 1 << 30;
  Rng rng(5);
  size_t i = 0;
  int64_t targets = 0;
  for (auto _ : state) {
    StepStats st = step_pair(bench.pairs[i++ % bench.pairs.size()], bench.mats,
                             bench.vocab, bench.tables, bench.cfg, progress,
                             rng);
    targets += st.targets;
    benchmark::DoNotOptimize(st.loss);
  }
  state.SetItemsProcessed(targets);
}
BENCHMARK(BM_StepPair)->Args({100, 1})->Args({100, 2})->Args({300, 1});

void BM_Compose(benchmark::State& state) {
  Matrix input(4096, 300);
  Rng rng(9);
  for (size_t i = 0; i < input.size(); ++i) {
    input.data()[i] = float(rng.uniform01() - 0.5);
  }
  ContextIndices ctx;
  for (int i = 0; i < state.range(0); ++i) {
    ctx.indices.push_back(RowIndex(rng.uniform_below(4096)));
  }
  std::vector<float> out(300);
  for (auto _ : state) {
    compose(ctx, input, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Compose)->Arg(8)->Arg(32)->Arg(128);

void BM_SampleNegative(benchmark::State& state) {
  Vocabulary vocab = bench_vocab(int(state.range(0)));
  NegativeTable table = build_negative_table(vocab, Lang::L1, 1000000);
  Rng rng(13);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_negative(table, 0, rng));
  }
}
BENCHMARK(BM_SampleNegative)->Arg(100)->Arg(10000);

void BM_CslsRetrieve(benchmark::State& state) {
  int n = int(state.range(0));
  Rng rng(21);
  Matrix src(n, 64), tgt(n, 64);
  for (size_t i = 0; i < src.size(); ++i) {
    src.data()[i] = float(rng.uniform01() - 0.5);
    tgt.data()[i] = float(rng.uniform01() - 0.5);
  }
  std::vector<std::string> sw(n), tw(n);
  for (int i = 0; i < n; ++i) {
    sw[i] = "s" + std::to_string(i);
    tw[i] = "t" + std::to_string(i);
  }
  EmbeddingSet sources = normalize_rows(sw, src);
  EmbeddingSet targets = normalize_rows(tw, tgt);
  for (auto _ : state) {
    CslsRanking r = csls_retrieve(sources, targets, 10, 1);
    benchmark::DoNotOptimize(r.topk.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * n);
}
BENCHMARK(BM_CslsRetrieve)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
