#pragma once

#include <cstdint>
#include <optional>

#include "bisent2vec/ngrams.h"

namespace bisent2vec {

struct TrainConfig {
  int dim = 300;
  int epochs = 5;
  double lr0 = 0.2;
  int negatives = 10;
  int max_n = 1;  // 1 = unigrams, 2 = unigrams + bigrams
  int64_t buckets = 2000000;
  int dropout_k = -1;  // -1 resolves to 2 when max_n = 2, else 0
  int min_count = 5;
  double t = 1e-5;
  int threads = 1;
  uint64_t seed = 1;

  int64_t table_size = 10000000;
  std::optional<int64_t> max_pairs;
  bool shuffle = false;  // seeded per-epoch shuffle of the pair list

  // Loss-term weighting hook; both components weigh equally by default.
  double mono_weight = 1.0;
  double cross_weight = 1.0;

  // Sigmoid/log lookup tables with scores clipped to [-8, 8]. Turned off by
  // gradient tests, which need the exact smooth loss.
  bool use_lut = true;

  int resolved_dropout_k() const {
    if (dropout_k >= 0) return dropout_k;
    return max_n >= 2 ? 2 : 0;
  }

  // Bucket rows exist only when bigrams are in play.
  int64_t bucket_rows() const { return max_n >= 2 ? buckets : 0; }

  NgramConfig ngram_config() const {
    return {max_n, buckets, resolved_dropout_k()};
  }

  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

}  // namespace bisent2vec
