#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "bisent2vec/eval.h"

namespace bisent2vec {

std::vector<std::vector<std::string>> load_sentences(
    const std::string& path, std::optional<int64_t> max_lines) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sentence file: " + path);
  std::vector<std::vector<std::string>> sentences;
  std::string line, token;
  while ((!max_lines || static_cast<int64_t>(sentences.size()) < *max_lines) &&
         std::getline(in, line)) {
    std::vector<std::string> tokens;
    std::istringstream ls(line);
    while (ls >> token) tokens.push_back(token);
    sentences.push_back(std::move(tokens));
  }
  return sentences;
}

IdfTable build_idf(const std::vector<std::vector<std::string>>& sentences) {
  if (sentences.empty()) {
    throw std::invalid_argument("cannot build idf weights from an empty corpus");
  }
  std::unordered_map<std::string, int64_t> df;
  std::unordered_set<std::string> seen;
  for (const auto& sent : sentences) {
    seen.clear();
    for (const auto& w : sent) {
      if (seen.insert(w).second) ++df[w];
    }
  }
  IdfTable table;
  table.n_sentences = static_cast<int64_t>(sentences.size());
  double log_n = std::log(double(table.n_sentences));
  table.default_idf = log_n;  // unseen words: df treated as 1
  table.idf.reserve(df.size());
  for (const auto& [w, count] : df) {
    table.idf.emplace(w, std::log(double(table.n_sentences) / double(count)));
  }
  return table;
}

std::optional<std::vector<float>> sentence_embed_tfidf(
    const std::vector<std::string>& tokens, const IdfTable& idf,
    const WordVectors& vecs) {
  std::vector<float> sum(vecs.dim(), 0.0f);
  double weight_sum = 0.0;
  for (const auto& w : tokens) {
    int32_t row = vecs.find(w);
    if (row < 0) continue;  // OOV
    double weight = idf.lookup(w);  // per-occurrence, so tf is the raw count
    if (weight == 0.0) continue;
    weight_sum += weight;
    auto v = vecs.vecs.row(row);
    for (size_t d = 0; d < sum.size(); ++d) sum[d] += float(weight) * v[d];
  }
  if (!(weight_sum > 0.0)) return std::nullopt;
  for (float& x : sum) x = float(x / weight_sum);
  return sum;
}

namespace {

struct EmbeddedCorpus {
  std::vector<std::vector<float>> vecs;  // aligned, only kept pairs
};

double retrieval_p1(const EmbeddingSet& queries, const EmbeddingSet& candidates,
                    Criterion criterion, int csls_k) {
  int64_t correct = 0;
  if (criterion == Criterion::NN) {
    for (size_t q = 0; q < queries.size(); ++q) {
      if (nn_retrieve(queries.mat.row(q), candidates, 1)[0] ==
          static_cast<int32_t>(q)) {
        ++correct;
      }
    }
  } else {
    CslsRanking ranking = csls_retrieve(queries, candidates, csls_k, 1);
    for (size_t q = 0; q < queries.size(); ++q) {
      if (ranking.argmax(q) == static_cast<int32_t>(q)) ++correct;
    }
  }
  return double(correct) / double(queries.size());
}

EmbeddingSet sentence_set(const std::vector<std::vector<float>>& vecs,
                          size_t count, int dim) {
  Matrix rows(count, dim);
  std::vector<std::string> labels(count);
  for (size_t i = 0; i < count; ++i) {
    std::copy(vecs[i].begin(), vecs[i].end(), rows.row(i).begin());
    labels[i] = std::to_string(i);
  }
  return normalize_rows(std::move(labels), rows);
}

}  // namespace

SentenceRetrievalResult sentence_retrieval_p1(
    const std::vector<std::vector<std::string>>& src_sents,
    const std::vector<std::vector<std::string>>& tgt_sents,
    const std::vector<std::vector<std::string>>& src_weight_corpus,
    const std::vector<std::vector<std::string>>& tgt_weight_corpus,
    const WordVectors& src_vecs, const WordVectors& tgt_vecs,
    Criterion criterion, int csls_k, int64_t max_queries,
    int64_t max_candidates) {
  if (src_sents.size() != tgt_sents.size()) {
    throw std::invalid_argument(
        "sentence retrieval needs aligned sets: got " +
        std::to_string(src_sents.size()) + " vs " +
        std::to_string(tgt_sents.size()) + " sentences");
  }
  IdfTable src_idf = build_idf(src_weight_corpus);
  IdfTable tgt_idf = build_idf(tgt_weight_corpus);

  // Keep only pairs where both sides embed to a usable (nonzero) vector.
  SentenceRetrievalResult res;
  std::vector<std::vector<float>> src_kept, tgt_kept;
  for (size_t i = 0; i < src_sents.size(); ++i) {
    auto s = sentence_embed_tfidf(src_sents[i], src_idf, src_vecs);
    auto t = sentence_embed_tfidf(tgt_sents[i], tgt_idf, tgt_vecs);
    bool usable = s && t && norm2(*s) > 0.0 && norm2(*t) > 0.0;
    if (!usable) {
      ++res.excluded;
      continue;
    }
    src_kept.push_back(std::move(*s));
    tgt_kept.push_back(std::move(*t));
  }
  if (src_kept.empty()) {
    throw std::runtime_error("no sentence pair could be embedded");
  }

  const int dim = src_vecs.dim();
  size_t n_candidates =
      std::min<size_t>(src_kept.size(), static_cast<size_t>(max_candidates));
  size_t n_queries =
      std::min<size_t>(n_candidates, static_cast<size_t>(max_queries));

  EmbeddingSet src_all = sentence_set(src_kept, n_candidates, dim);
  EmbeddingSet tgt_all = sentence_set(tgt_kept, n_candidates, dim);
  EmbeddingSet src_queries = sentence_set(src_kept, n_queries, dim);
  EmbeddingSet tgt_queries = sentence_set(tgt_kept, n_queries, dim);

  res.p1_fwd = retrieval_p1(src_queries, tgt_all, criterion, csls_k);
  res.p1_bwd = retrieval_p1(tgt_queries, src_all, criterion, csls_k);
  res.queries_fwd = static_cast<int64_t>(n_queries);
  res.queries_bwd = static_cast<int64_t>(n_queries);
  return res;
}

}  // namespace bisent2vec
