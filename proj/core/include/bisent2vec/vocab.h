#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bisent2vec/types.h"

namespace bisent2vec {

struct VocabEntry {
  std::string surface;
  Lang lang = Lang::L1;
  int64_t count = 0;
  double keep_prob = 1.0;
};

// Probability of keeping a word occurrence as a prediction target:
// min(1, sqrt(t/f) + t/f) with f = count/total.
double keep_prob(int64_t count, int64_t total, double t);

// Bilingual vocabulary. Entries are keyed by (language, surface) so the same
// surface in both languages gets two distinct ids. Entries are laid out as
// one contiguous block per language, sorted by descending count, so row i of
// a per-language export is the i-th most frequent word of that language.
class Vocabulary {
 public:
  Vocabulary() = default;

  WordId size() const { return static_cast<WordId>(entries_.size()); }
  const VocabEntry& entry(WordId id) const { return entries_[id]; }
  const std::vector<VocabEntry>& entries() const { return entries_; }

  // Returns the id of (lang, surface), or -1 if absent.
  WordId find(Lang lang, std::string_view surface) const;

  // Contiguous id range [begin, end) of one language's entries.
  std::pair<WordId, WordId> lang_range(Lang lang) const {
    int i = lang_index(lang);
    return {lang_begin_[i], lang_begin_[i] + lang_size_[i]};
  }
  WordId lang_size(Lang lang) const { return lang_size_[lang_index(lang)]; }

  // Total token occurrences read for one language (before min_count pruning).
  int64_t total_tokens(Lang lang) const {
    return total_tokens_[lang_index(lang)];
  }

  double subsample_t() const { return t_; }
  int32_t min_count() const { return min_count_; }

  // Assembles a vocabulary from per-language (surface -> count) tables.
  // Exposed for tests and model deserialization; build_vocab is the normal
  // entry point.
  static Vocabulary from_counts(
      const std::vector<std::pair<std::string, int64_t>>& l1_counts,
      const std::vector<std::pair<std::string, int64_t>>& l2_counts,
      int64_t l1_total, int64_t l2_total, int32_t min_count, double t);

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, WordId> lookup_[kNumLangs];
  WordId lang_begin_[kNumLangs] = {0, 0};
  WordId lang_size_[kNumLangs] = {0, 0};
  int64_t total_tokens_[kNumLangs] = {0, 0};
  double t_ = 1e-5;
  int32_t min_count_ = 5;
};

// Reads two aligned corpus files (one sentence per line, whitespace-separated
// tokens, line i of each file aligned) and builds the vocabulary of all
// tokens with count >= min_count. Throws on unreadable files, unequal line
// counts, or an empty corpus.
Vocabulary build_vocab(const std::string& l1_path, const std::string& l2_path,
                       int32_t min_count, double t);

}  // namespace bisent2vec
