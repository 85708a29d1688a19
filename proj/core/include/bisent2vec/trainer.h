#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <unordered_map>
#include <vector>

#include "bisent2vec/config.h"
#include "bisent2vec/corpus.h"
#include "bisent2vec/model.h"

namespace bisent2vec {

// Linearly decaying learning rate, floored at zero.
double lr_at(double progress, double lr0);

double exact_sigmoid(double x);
// Logistic loss l(x) = log(1 + exp(-x)), computed without overflow.
double exact_logloss(double x);

// 512-entry sigmoid and logistic-loss tables over scores clipped to [-8, 8].
class Lut {
 public:
  static const Lut& instance();

  float sigmoid(double x) const;
  float logloss(double x) const;

 private:
  Lut();
  static constexpr int kTableSize = 512;
  static constexpr double kMaxScore = 8.0;
  float sigmoid_[kTableSize + 1];
  float logloss_[kTableSize + 1];
};

// Accumulates exact loss derivatives instead of applying updates. Keys are
// matrix row indices; values are d(loss)/d(row).
struct GradTape {
  std::unordered_map<RowIndex, std::vector<double>> input;
  std::unordered_map<RowIndex, std::vector<double>> output;

  void add(std::unordered_map<RowIndex, std::vector<double>>& m, RowIndex row,
           double scale, std::span<const float> vec);
};

// One negative-sampling step against a fixed context vector. For the target
// (label 1) and each negative (label 0): g = lr * weight * (label - sigmoid),
// grad_ctx += g * u with the pre-update output row, then u += g * ctx_vec.
// Returns the weighted loss l(u_t.v) + sum l(-u_n.v). When `tape` is given,
// output rows are left untouched and d(loss)/d(u) is recorded instead (lr is
// not folded into tape entries).
double binary_logistic_update(std::span<const float> ctx_vec, WordId target,
                              std::span<const WordId> negatives, double lr,
                              double weight, Matrix& output,
                              std::span<float> grad_ctx, const Lut* lut,
                              GradTape* tape = nullptr);

// Shared training progress. `processed` counts kept targets across all
// workers; the log hook fires each time it crosses a multiple of log_every.
struct ProgressState {
  std::atomic<int64_t> processed{0};
  int64_t total = 1;
  std::atomic<double> loss_sum{0.0};
  std::atomic<int64_t> updates{0};

  int64_t log_every = 0;
  std::function<void(int64_t)> log_fn;

  double progress() const {
    double p = double(processed.load(std::memory_order_relaxed)) / double(total);
    return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
  }
  double average_loss() const {
    int64_t n = updates.load(std::memory_order_relaxed);
    return n == 0 ? 0.0 : loss_sum.load(std::memory_order_relaxed) / double(n);
  }
};

struct StepStats {
  double loss = 0.0;
  int64_t updates = 0;
  int64_t targets = 0;
};

// Processes one sentence pair: every token of each side kept by target
// subsampling gets a monolingual update (context = its own sentence with that
// occurrence removed; skipped for single-token sentences) and a cross-lingual
// update (context = the full other side), each against `negatives` fresh
// negatives from the target's own language. Pairs with an empty side are
// skipped. With `tape` set, parameters are left untouched and exact gradients
// are accumulated instead.
StepStats step_pair(const SentencePair& pair, EmbeddingMatrices& mats,
                    const Vocabulary& vocab, const NegativeTable tables[2],
                    const TrainConfig& cfg, ProgressState& progress, Rng& rng,
                    GradTape* tape = nullptr);

struct EpochReport {
  int epoch = 0;
  double avg_loss = 0.0;
  int64_t updates = 0;
  int64_t targets = 0;
};

struct TrainResult {
  Model model;
  std::vector<EpochReport> epochs;
};

// Full training run: builds the vocabulary and negative tables, loads the
// pair list (honoring cfg.max_pairs), then runs cfg.epochs passes with
// cfg.threads hogwild workers over disjoint contiguous chunks. Single-thread
// runs are bit-reproducible for a fixed seed. Progress lines (one per 10k
// targets) and epoch summaries go to `log` when given.
TrainResult train(const std::string& l1_path, const std::string& l2_path,
                  const TrainConfig& cfg, std::ostream* log = nullptr);

}  // namespace bisent2vec
