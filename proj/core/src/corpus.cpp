#include "bisent2vec/corpus.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bisent2vec {

PairStream::PairStream(const std::string& l1_path, const std::string& l2_path,
                       const Vocabulary& vocab,
                       std::optional<int64_t> max_pairs)
    : l1_in_(l1_path), l2_in_(l2_path), vocab_(vocab), max_pairs_(max_pairs) {
  if (!l1_in_) throw std::runtime_error("cannot open corpus file: " + l1_path);
  if (!l2_in_) throw std::runtime_error("cannot open corpus file: " + l2_path);
}

namespace {

void map_line(const std::string& line, Lang lang, const Vocabulary& vocab,
              std::vector<WordId>& out) {
  out.clear();
  std::istringstream ls(line);
  std::string token;
  while (ls >> token) {
    WordId id = vocab.find(lang, token);
    if (id >= 0) out.push_back(id);  // OOV dropped
  }
}

}  // namespace

bool PairStream::next(SentencePair& out) {
  if (max_pairs_ && pairs_read_ >= *max_pairs_) return false;
  std::string l1_line, l2_line;
  bool got1 = static_cast<bool>(std::getline(l1_in_, l1_line));
  bool got2 = static_cast<bool>(std::getline(l2_in_, l2_line));
  if (got1 != got2) {
    throw std::runtime_error("corpus files are not aligned: one side ended at pair " +
                             std::to_string(pairs_read_));
  }
  if (!got1) return false;
  map_line(l1_line, Lang::L1, vocab_, out.l1);
  map_line(l2_line, Lang::L2, vocab_, out.l2);
  ++pairs_read_;
  return true;
}

std::vector<SentencePair> load_pairs(const std::string& l1_path,
                                     const std::string& l2_path,
                                     const Vocabulary& vocab,
                                     std::optional<int64_t> max_pairs) {
  PairStream stream(l1_path, l2_path, vocab, max_pairs);
  std::vector<SentencePair> pairs;
  SentencePair pair;
  while (stream.next(pair)) pairs.push_back(std::move(pair));
  return pairs;
}

int64_t NegativeTable::slot_count(WordId w) const {
  // Slots are grouped by ascending word id.
  auto range = std::equal_range(slots.begin(), slots.end(), w);
  return range.second - range.first;
}

NegativeTable build_negative_table(const Vocabulary& vocab, Lang lang,
                                   int64_t table_size) {
  auto [begin, end] = vocab.lang_range(lang);
  int64_t n = end - begin;
  if (n == 0) {
    throw std::invalid_argument("no vocabulary entries for language " +
                                std::string(lang_name(lang)));
  }
  if (table_size < n) {
    throw std::invalid_argument(
        "negative table size " + std::to_string(table_size) +
        " is smaller than the " + std::to_string(n) + "-word vocabulary");
  }

  double z = 0.0;
  for (WordId w = begin; w < end; ++w) z += std::sqrt(double(vocab.entry(w).count));

  // Largest-remainder apportionment of table_size slots to sqrt(count)
  // shares, then a minimum of one slot per word; every allocation stays
  // within one slot of its ideal share.
  std::vector<int64_t> slots_per(n, 0);
  std::vector<std::pair<double, int64_t>> remainders(n);
  int64_t assigned = 0;
  for (int64_t i = 0; i < n; ++i) {
    double ideal = table_size * std::sqrt(double(vocab.entry(begin + i).count)) / z;
    slots_per[i] = static_cast<int64_t>(ideal);
    remainders[i] = {ideal - double(slots_per[i]), i};
    assigned += slots_per[i];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int64_t k = 0; assigned < table_size; ++k) {
    ++slots_per[remainders[k % n].second];
    ++assigned;
  }
  for (int64_t i = 0; i < n; ++i) {
    if (slots_per[i] > 0) continue;
    auto donor = std::max_element(slots_per.begin(), slots_per.end());
    --*donor;
    slots_per[i] = 1;
  }

  NegativeTable table;
  table.lang = lang;
  table.slots.reserve(table_size);
  for (int64_t i = 0; i < n; ++i) {
    table.slots.insert(table.slots.end(), slots_per[i],
                       static_cast<WordId>(begin + i));
  }
  return table;
}

WordId sample_negative(const NegativeTable& table, WordId exclude, Rng& rng) {
  const size_t n = table.slots.size();
  for (int attempt = 0; attempt < 64; ++attempt) {
    WordId w = table.slots[rng.uniform_below(n)];
    if (w != exclude) return w;
  }
  // 64 straight hits on the excluded word: either it owns the whole table or
  // we are astronomically unlucky. Check before continuing.
  if (table.slot_count(exclude) == static_cast<int64_t>(n)) {
    throw std::runtime_error("cannot exclude word " + std::to_string(exclude) +
                             ": it owns every negative-table slot");
  }
  for (;;) {
    WordId w = table.slots[rng.uniform_below(n)];
    if (w != exclude) return w;
  }
}

void sample_negatives_into(const NegativeTable& table, int n, WordId exclude,
                           Rng& rng, std::vector<WordId>& out) {
  out.clear();
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(sample_negative(table, exclude, rng));
}

std::vector<WordId> sample_negatives(const NegativeTable& table, int n,
                                     WordId exclude, Rng& rng) {
  std::vector<WordId> out;
  sample_negatives_into(table, n, exclude, rng, out);
  return out;
}

}  // namespace bisent2vec
