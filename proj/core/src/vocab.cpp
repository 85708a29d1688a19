#include "bisent2vec/vocab.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bisent2vec {

double keep_prob(int64_t count, int64_t total, double t) {
  double f = double(count) / double(total);
  double p = std::sqrt(t / f) + t / f;
  return p < 1.0 ? p : 1.0;
}

WordId Vocabulary::find(Lang lang, std::string_view surface) const {
  const auto& map = lookup_[lang_index(lang)];
  auto it = map.find(std::string(surface));
  return it == map.end() ? -1 : it->second;
}

Vocabulary Vocabulary::from_counts(
    const std::vector<std::pair<std::string, int64_t>>& l1_counts,
    const std::vector<std::pair<std::string, int64_t>>& l2_counts,
    int64_t l1_total, int64_t l2_total, int32_t min_count, double t) {
  Vocabulary v;
  v.t_ = t;
  v.min_count_ = min_count;
  v.total_tokens_[0] = l1_total;
  v.total_tokens_[1] = l2_total;

  const std::vector<std::pair<std::string, int64_t>>* per_lang[kNumLangs] = {
      &l1_counts, &l2_counts};
  for (int li = 0; li < kNumLangs; ++li) {
    Lang lang = static_cast<Lang>(li);
    std::vector<std::pair<std::string, int64_t>> kept;
    kept.reserve(per_lang[li]->size());
    for (const auto& [surface, count] : *per_lang[li]) {
      if (count >= min_count) kept.emplace_back(surface, count);
    }
    // Frequency order; stable so equal counts keep first-seen order.
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) {
                       return a.second > b.second;
                     });
    v.lang_begin_[li] = static_cast<WordId>(v.entries_.size());
    v.lang_size_[li] = static_cast<WordId>(kept.size());
    for (auto& [surface, count] : kept) {
      WordId id = static_cast<WordId>(v.entries_.size());
      double kp = keep_prob(count, v.total_tokens_[li], t);
      v.lookup_[li].emplace(surface, id);
      v.entries_.push_back({std::move(surface), lang, count, kp});
    }
  }
  return v;
}

namespace {

struct CountPass {
  std::unordered_map<std::string, int64_t> counts;
  std::vector<std::string> order;  // first-seen order, for determinism
  int64_t total = 0;
  int64_t lines = 0;
};

void count_file(const std::string& path, CountPass& pass) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::string line, token;
  while (std::getline(in, line)) {
    ++pass.lines;
    std::istringstream ls(line);
    while (ls >> token) {
      ++pass.total;
      auto [it, inserted] = pass.counts.emplace(token, 0);
      if (inserted) pass.order.push_back(token);
      ++it->second;
    }
  }
  if (in.bad()) throw std::runtime_error("I/O error reading: " + path);
}

std::vector<std::pair<std::string, int64_t>> ordered_counts(CountPass& pass) {
  std::vector<std::pair<std::string, int64_t>> out;
  out.reserve(pass.order.size());
  for (auto& surface : pass.order) {
    int64_t count = pass.counts[surface];
    out.emplace_back(std::move(surface), count);
  }
  return out;
}

}  // namespace

Vocabulary build_vocab(const std::string& l1_path, const std::string& l2_path,
                       int32_t min_count, double t) {
  CountPass l1, l2;
  count_file(l1_path, l1);
  count_file(l2_path, l2);
  if (l1.lines != l2.lines) {
    throw std::runtime_error(
        "corpus files are not aligned: " + l1_path + " has " +
        std::to_string(l1.lines) + " lines, " + l2_path + " has " +
        std::to_string(l2.lines));
  }
  if (l1.total == 0 && l2.total == 0) {
    throw std::runtime_error("empty corpus: no tokens in either file");
  }
  auto l1_counts = ordered_counts(l1);
  auto l2_counts = ordered_counts(l2);
  return Vocabulary::from_counts(l1_counts, l2_counts, l1.total, l2.total,
                                 min_count, t);
}

}  // namespace bisent2vec
