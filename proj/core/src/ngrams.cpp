#include "bisent2vec/ngrams.h"

#include <cstring>
#include <stdexcept>

namespace bisent2vec {

namespace {

constexpr uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr uint64_t kFnvPrime = 1099511628211ULL;

inline uint64_t fnv1a_byte(uint64_t h, uint8_t b) {
  h ^= b;
  return h * kFnvPrime;
}

inline uint64_t fnv1a_le64(uint64_t h, uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h = fnv1a_byte(h, static_cast<uint8_t>(v >> (8 * i)));
  }
  return h;
}

}  // namespace

int64_t hash_bigram(WordId id1, WordId id2, Lang lang, int64_t buckets) {
  // 17-byte message: language tag, then each id as 8-byte little-endian.
  uint64_t h = kFnvOffset;
  h = fnv1a_byte(h, static_cast<uint8_t>(lang));
  h = fnv1a_le64(h, static_cast<uint64_t>(id1));
  h = fnv1a_le64(h, static_cast<uint64_t>(id2));
  return static_cast<int64_t>(h % static_cast<uint64_t>(buckets));
}

void extract_context(std::span<const WordId> tokens, Lang lang,
                     const NgramConfig& cfg, RowIndex n_words, Rng* rng,
                     ContextIndices& out) {
  if (tokens.empty()) {
    throw std::invalid_argument("cannot extract a context from an empty token sequence");
  }
  out.indices.clear();
  out.indices.reserve(tokens.size() * 2);
  for (WordId w : tokens) out.indices.push_back(w);
  if (cfg.max_n >= 2) {
    for (size_t i = 0; i + 1 < tokens.size(); ++i) {
      out.indices.push_back(
          n_words + hash_bigram(tokens[i], tokens[i + 1], lang, cfg.buckets));
    }
  }
  if (cfg.dropout_k > 0 && rng != nullptr) {
    size_t drops = std::min<size_t>(cfg.dropout_k, out.indices.size() - 1);
    // Partial Fisher-Yates: move a uniform victim to the tail and cut it.
    for (size_t d = 0; d < drops; ++d) {
      size_t remaining = out.indices.size();
      size_t victim = rng->uniform_below(remaining);
      std::swap(out.indices[victim], out.indices[remaining - 1]);
      out.indices.pop_back();
    }
  }
}

ContextIndices extract_context(std::span<const WordId> tokens, Lang lang,
                               const NgramConfig& cfg, RowIndex n_words,
                               Rng* rng) {
  ContextIndices out;
  extract_context(tokens, lang, cfg, n_words, rng, out);
  return out;
}

}  // namespace bisent2vec
