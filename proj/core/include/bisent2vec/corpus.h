#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "bisent2vec/types.h"
#include "bisent2vec/vocab.h"

namespace bisent2vec {

struct SentencePair {
  std::vector<WordId> l1;
  std::vector<WordId> l2;

  const std::vector<WordId>& side(Lang lang) const {
    return lang == Lang::L1 ? l1 : l2;
  }
  // Pairs with an empty side are yielded by the stream but skipped by the
  // trainer.
  bool trainable() const { return !l1.empty() && !l2.empty(); }
};

// Streams aligned sentence pairs from two files, mapping tokens to vocabulary
// ids and dropping OOV tokens. Single consumer. Throws if one file ends
// before the other.
class PairStream {
 public:
  PairStream(const std::string& l1_path, const std::string& l2_path,
             const Vocabulary& vocab,
             std::optional<int64_t> max_pairs = std::nullopt);

  // Fills `out` with the next pair; returns false at end of input.
  bool next(SentencePair& out);

  int64_t pairs_read() const { return pairs_read_; }

 private:
  std::ifstream l1_in_;
  std::ifstream l2_in_;
  const Vocabulary& vocab_;
  std::optional<int64_t> max_pairs_;
  int64_t pairs_read_ = 0;
};

std::vector<SentencePair> load_pairs(
    const std::string& l1_path, const std::string& l2_path,
    const Vocabulary& vocab, std::optional<int64_t> max_pairs = std::nullopt);

// Multinomial table for negative sampling: word w owns a number of slots
// proportional to sqrt(count(w)), apportioned to within one slot, and every
// word of the language owns at least one. Slots are grouped by word id in
// ascending order (draws are uniform, so order is irrelevant for sampling
// but makes per-word slot counts searchable).
struct NegativeTable {
  Lang lang = Lang::L1;
  std::vector<WordId> slots;

  int64_t slot_count(WordId w) const;
};

// Throws if the language has no entries or table_size is smaller than the
// language's vocabulary.
NegativeTable build_negative_table(const Vocabulary& vocab, Lang lang,
                                   int64_t table_size);

// Pass as `exclude` to draw from the raw slot distribution.
inline constexpr WordId kNoExclude = -1;

// Draws one index uniformly from the slots, resampling while it equals
// `exclude`. Throws if every slot is `exclude`.
WordId sample_negative(const NegativeTable& table, WordId exclude, Rng& rng);

std::vector<WordId> sample_negatives(const NegativeTable& table, int n,
                                     WordId exclude, Rng& rng);

void sample_negatives_into(const NegativeTable& table, int n, WordId exclude,
                           Rng& rng, std::vector<WordId>& out);

}  // namespace bisent2vec
