#include "bisent2vec/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace bisent2vec {

double lr_at(double progress, double lr0) {
  double lr = lr0 * (1.0 - progress);
  return lr > 0.0 ? lr : 0.0;
}

double exact_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double exact_logloss(double x) {
  // log(1 + exp(-x)) without overflow on either tail.
  if (x >= 0.0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

Lut::Lut() {
  for (int i = 0; i <= kTableSize; ++i) {
    double x = (double(i) * 2.0 * kMaxScore) / kTableSize - kMaxScore;
    sigmoid_[i] = float(exact_sigmoid(x));
    logloss_[i] = float(exact_logloss(x));
  }
}

const Lut& Lut::instance() {
  static const Lut lut;
  return lut;
}

namespace {
inline int lut_index(double x, double max_score, int table_size) {
  if (x < -max_score) x = -max_score;
  if (x > max_score) x = max_score;
  return int((x + max_score) * table_size / (2.0 * max_score));
}
}  // namespace

float Lut::sigmoid(double x) const {
  return sigmoid_[lut_index(x, kMaxScore, kTableSize)];
}

float Lut::logloss(double x) const {
  return logloss_[lut_index(x, kMaxScore, kTableSize)];
}

void GradTape::add(std::unordered_map<RowIndex, std::vector<double>>& m,
                   RowIndex row, double scale, std::span<const float> vec) {
  auto& g = m[row];
  if (g.empty()) g.assign(vec.size(), 0.0);
  for (size_t d = 0; d < vec.size(); ++d) g[d] += scale * vec[d];
}

double binary_logistic_update(std::span<const float> ctx_vec, WordId target,
                              std::span<const WordId> negatives, double lr,
                              double weight, Matrix& output,
                              std::span<float> grad_ctx, const Lut* lut,
                              GradTape* tape) {
  double loss = 0.0;
  auto one = [&](WordId row_id, double label) {
    auto u = output.row(row_id);
    double score = dot(u, ctx_vec);
    if (!std::isfinite(score)) {
      throw std::runtime_error("non-finite score for output row " +
                               std::to_string(row_id));
    }
    double sig = lut ? lut->sigmoid(score) : exact_sigmoid(score);
    double margin = label > 0.0 ? score : -score;
    loss += weight * (lut ? lut->logloss(margin) : exact_logloss(margin));
    double coeff = weight * (label - sig);
    float g = float(lr * coeff);
    // Accumulate against the pre-update row.
    for (size_t d = 0; d < grad_ctx.size(); ++d) grad_ctx[d] += g * u[d];
    if (tape) {
      tape->add(tape->output, row_id, -coeff, ctx_vec);
    } else {
      for (size_t d = 0; d < u.size(); ++d) u[d] += g * ctx_vec[d];
    }
  };
  one(target, 1.0);
  for (WordId neg : negatives) one(neg, 0.0);
  return loss;
}

namespace {

// Distributes grad_ctx through the averaging composition: each contributing
// input row moves by grad_ctx / |R|.
void apply_context_grad(const ContextIndices& ctx,
                        std::span<const float> grad_ctx, Matrix& input,
                        GradTape* tape) {
  const float inv = 1.0f / float(ctx.size());
  if (tape) {
    for (RowIndex r : ctx.indices) tape->add(tape->input, r, -inv, grad_ctx);
    return;
  }
  for (RowIndex r : ctx.indices) {
    auto row = input.row(r);
    for (size_t d = 0; d < row.size(); ++d) row[d] += inv * grad_ctx[d];
  }
}

}  // namespace

StepStats step_pair(const SentencePair& pair, EmbeddingMatrices& mats,
                    const Vocabulary& vocab, const NegativeTable tables[2],
                    const TrainConfig& cfg, ProgressState& progress, Rng& rng,
                    GradTape* tape) {
  StepStats st;
  if (!pair.trainable()) return st;

  // Tape mode wants the exact smooth loss and a fixed parameter point.
  const double lr = tape ? 1.0 : lr_at(progress.progress(), cfg.lr0);
  const Lut* lut = (cfg.use_lut && !tape) ? &Lut::instance() : nullptr;
  const NgramConfig ncfg = cfg.ngram_config();
  const RowIndex n_words = vocab.size();

  std::vector<float> ctx_vec(mats.dim);
  std::vector<float> grad_ctx(mats.dim);
  std::vector<WordId> reduced;
  std::vector<WordId> negs;
  ContextIndices ctx;

  auto update = [&](const ContextIndices& context, WordId target,
                    const NegativeTable& table, double weight) {
    compose(context, mats.input, ctx_vec);
    sample_negatives_into(table, cfg.negatives, target, rng, negs);
    std::fill(grad_ctx.begin(), grad_ctx.end(), 0.0f);
    st.loss += binary_logistic_update(ctx_vec, target, negs, lr, weight,
                                      mats.output, grad_ctx, lut, tape);
    apply_context_grad(context, grad_ctx, mats.input, tape);
    ++st.updates;
  };

  for (int li = 0; li < kNumLangs; ++li) {
    Lang lang = static_cast<Lang>(li);
    const auto& sent = pair.side(lang);
    const auto& other = pair.side(other_lang(lang));
    const NegativeTable& table = tables[li];

    for (size_t pos = 0; pos < sent.size(); ++pos) {
      WordId target = sent[pos];
      if (rng.uniform01() > vocab.entry(target).keep_prob) continue;
      ++st.targets;

      // Monolingual: predict the target from the rest of its own sentence.
      if (sent.size() > 1) {
        reduced.clear();
        reduced.insert(reduced.end(), sent.begin(), sent.begin() + pos);
        reduced.insert(reduced.end(), sent.begin() + pos + 1, sent.end());
        extract_context(reduced, lang, ncfg, n_words, &rng, ctx);
        update(ctx, target, table, cfg.mono_weight);
      }

      // Cross-lingual: predict the target from the whole other side.
      extract_context(other, other_lang(lang), ncfg, n_words, &rng, ctx);
      update(ctx, target, table, cfg.cross_weight);

      int64_t seen =
          progress.processed.fetch_add(1, std::memory_order_relaxed) + 1;
      if (progress.log_every > 0 && seen % progress.log_every == 0 &&
          progress.log_fn) {
        progress.log_fn(seen);
      }
    }
  }

  progress.loss_sum.fetch_add(st.loss, std::memory_order_relaxed);
  progress.updates.fetch_add(st.updates, std::memory_order_relaxed);
  return st;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (dim < 1) fail("dim must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(lr0 > 0.0)) fail("lr must be > 0");
  if (negatives < 1) fail("negatives must be >= 1");
  if (max_n != 1 && max_n != 2) fail("ngrams must be 1 or 2");
  if (buckets < 1) fail("buckets must be >= 1");
  if (min_count < 1) fail("min-count must be >= 1");
  if (!(t > 0.0)) fail("t must be > 0");
  if (threads < 1) fail("threads must be >= 1");
  if (table_size < 1) fail("negative table size must be >= 1");
  if (max_pairs && *max_pairs < 1) fail("max-pairs must be >= 1");
  if (mono_weight < 0.0 || cross_weight < 0.0) {
    fail("loss weights must be non-negative");
  }
}

TrainResult train(const std::string& l1_path, const std::string& l2_path,
                  const TrainConfig& cfg, std::ostream* log) {
  cfg.validate();
  Vocabulary vocab = build_vocab(l1_path, l2_path, cfg.min_count, cfg.t);
  std::vector<SentencePair> pairs =
      load_pairs(l1_path, l2_path, vocab, cfg.max_pairs);

  int64_t trainable = 0;
  double expected_targets = 0.0;
  for (const SentencePair& p : pairs) {
    if (!p.trainable()) continue;
    ++trainable;
    for (WordId w : p.l1) expected_targets += vocab.entry(w).keep_prob;
    for (WordId w : p.l2) expected_targets += vocab.entry(w).keep_prob;
  }
  if (trainable == 0) {
    throw std::runtime_error("no trainable sentence pairs (all sides empty after vocabulary filtering)");
  }

  NegativeTable tables[2];
  tables[0] = build_negative_table(vocab, Lang::L1, cfg.table_size);
  tables[1] = build_negative_table(vocab, Lang::L2, cfg.table_size);

  EmbeddingMatrices mats = init_matrices(vocab.size(), cfg, cfg.seed);

  ProgressState progress;
  progress.total = std::max<int64_t>(
      1, llround(expected_targets * double(cfg.epochs)));

  std::mutex log_mutex;
  if (log) {
    progress.log_every = 10000;
    progress.log_fn = [&](int64_t seen) {
      std::scoped_lock lock(log_mutex);
      *log << "targets " << seen << "  progress "
           << std::fixed << std::setprecision(1) << 100.0 * progress.progress()
           << "%  lr " << std::setprecision(4)
           << lr_at(progress.progress(), cfg.lr0) << "  loss "
           << progress.average_loss() << std::defaultfloat << "\n";
    };
  }

  TrainResult result;
  const int64_t n = static_cast<int64_t>(pairs.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      std::mt19937_64 gen(mix_seed(cfg.seed ^ (0x5851f42d4c957f2dULL * (epoch + 1))));
      std::shuffle(pairs.begin(), pairs.end(), gen);
    }
    double loss_before = progress.loss_sum.load();
    int64_t updates_before = progress.updates.load();
    int64_t targets_before = progress.processed.load();

    auto worker = [&](int w) {
      Rng rng(mix_seed(cfg.seed + 0x9e3779b97f4a7c15ULL *
                                      (uint64_t(epoch) * cfg.threads + w + 1)));
      int64_t begin = n * w / cfg.threads;
      int64_t end = n * (w + 1) / cfg.threads;
      for (int64_t i = begin; i < end; ++i) {
        step_pair(pairs[i], mats, vocab, tables, cfg, progress, rng);
      }
    };

    if (cfg.threads == 1) {
      worker(0);
    } else {
      std::vector<std::thread> workers;
      workers.reserve(cfg.threads);
      for (int w = 0; w < cfg.threads; ++w) workers.emplace_back(worker, w);
      for (auto& th : workers) th.join();
    }

    EpochReport report;
    report.epoch = epoch + 1;
    report.updates = progress.updates.load() - updates_before;
    report.targets = progress.processed.load() - targets_before;
    double loss = progress.loss_sum.load() - loss_before;
    report.avg_loss = report.updates > 0 ? loss / double(report.updates) : 0.0;
    result.epochs.push_back(report);
    if (log) {
      std::scoped_lock lock(log_mutex);
      *log << "epoch " << report.epoch << "/" << cfg.epochs << "  avg_loss "
           << std::fixed << std::setprecision(6) << report.avg_loss
           << std::defaultfloat << "  targets " << report.targets << "\n";
    }
  }

  result.model.vocab = std::move(vocab);
  result.model.cfg = cfg;
  result.model.mats = std::move(mats);
  return result;
}

}  // namespace bisent2vec
