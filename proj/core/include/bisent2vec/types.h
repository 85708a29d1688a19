#pragma once

#include <cstdint>
#include <random>

namespace bisent2vec {

enum class Lang : uint8_t { L1 = 0, L2 = 1 };

inline constexpr int kNumLangs = 2;

inline int lang_index(Lang l) { return static_cast<int>(l); }

inline Lang other_lang(Lang l) { return l == Lang::L1 ? Lang::L2 : Lang::L1; }

inline const char* lang_name(Lang l) { return l == Lang::L1 ? "l1" : "l2"; }

// Index into the vocabulary entry table (spans both languages).
using WordId = int32_t;

// Row index into an embedding matrix (word rows followed by bucket rows).
using RowIndex = int64_t;

// Deterministic RNG. mt19937_64 output is pinned by the standard; the value
// mappings below avoid std:: distributions, whose results differ between
// standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform real in [0, 1).
  double uniform01() {
    return (engine_() >> 11) * (1.0 / 9007199254740992.0);  // 53-bit mantissa
  }

  // Uniform integer in [0, n). Modulo bias is ~n/2^64, negligible.
  uint64_t uniform_below(uint64_t n) { return engine_() % n; }

  uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 step, used to derive independent worker seeds from one seed.
inline uint64_t mix_seed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace bisent2vec
