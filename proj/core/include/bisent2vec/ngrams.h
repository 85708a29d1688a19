#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bisent2vec/types.h"

namespace bisent2vec {

struct NgramConfig {
  int max_n = 1;              // 1 = unigrams only, 2 = unigrams + bigrams
  int64_t buckets = 2000000;  // hashed bigram rows
  int dropout_k = 0;          // n-grams dropped per training context
};

// Row indices into the input matrix selected for one composition context:
// unigram ids first, then bucket ids offset by n_words.
struct ContextIndices {
  std::vector<RowIndex> indices;

  size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

// Bucket index of a token bigram: FNV-1a 64 over 17 bytes (language tag byte,
// then each id as 8-byte little-endian), reduced mod buckets. Stable across
// runs and platforms.
int64_t hash_bigram(WordId id1, WordId id2, Lang lang, int64_t buckets);

// Collects the n-gram row set of a token sequence: all unigrams plus, when
// max_n = 2, one hashed bucket per adjacent bigram. When dropout_k > 0 and an
// rng is supplied, removes min(dropout_k, |R|-1) elements uniformly; the
// result is never empty for non-empty input. Throws on empty input.
void extract_context(std::span<const WordId> tokens, Lang lang,
                     const NgramConfig& cfg, RowIndex n_words, Rng* rng,
                     ContextIndices& out);

ContextIndices extract_context(std::span<const WordId> tokens, Lang lang,
                               const NgramConfig& cfg, RowIndex n_words,
                               Rng* rng = nullptr);

}  // namespace bisent2vec
