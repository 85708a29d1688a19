#include "bisent2vec/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bisent2vec {

Criterion parse_criterion(const std::string& name) {
  if (name == "nn") return Criterion::NN;
  if (name == "csls") return Criterion::CSLS;
  throw std::invalid_argument("unknown retrieval criterion: " + name);
}

WordVectors vectors_from_model(const Model& model, Lang lang,
                               ExportMatrix which) {
  auto [begin, end] = model.vocab.lang_range(lang);
  WordVectors out;
  out.words.reserve(end - begin);
  out.vecs = Matrix(end - begin, model.mats.dim);
  const Matrix& m = which == ExportMatrix::InputUnigrams ? model.mats.input
                                                         : model.mats.output;
  for (WordId w = begin; w < end; ++w) {
    int32_t row = w - begin;
    out.words.push_back(model.vocab.entry(w).surface);
    out.index.emplace(out.words.back(), row);
    auto src = m.row(w);
    std::copy(src.begin(), src.end(), out.vecs.row(row).begin());
  }
  return out;
}

WordVectors load_word_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vector file: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty vector file: " + path);
  }
  int64_t n_words = 0;
  int dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> n_words >> dim) || n_words < 0 || dim < 1) {
      throw std::runtime_error(path + ":1: bad header (want \"n_words dim\")");
    }
  }
  WordVectors out;
  out.words.reserve(n_words);
  out.vecs = Matrix(n_words, dim);
  for (int64_t i = 0; i < n_words; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error(path + ": truncated after " +
                               std::to_string(i) + " of " +
                               std::to_string(n_words) + " words");
    }
    size_t space = line.find(' ');
    if (space == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(i + 2) +
                               ": missing vector values");
    }
    out.words.push_back(line.substr(0, space));
    out.index.emplace(out.words.back(), static_cast<int32_t>(i));
    auto row = out.vecs.row(i);
    const char* p = line.c_str() + space;
    char* next = nullptr;
    for (int d = 0; d < dim; ++d) {
      row[d] = std::strtof(p, &next);
      if (next == p) {
        throw std::runtime_error(path + ":" + std::to_string(i + 2) +
                                 ": expected " + std::to_string(dim) +
                                 " values");
      }
      p = next;
    }
  }
  return out;
}

EmbeddingSet normalize_rows(std::vector<std::string> words, const Matrix& rows) {
  EmbeddingSet out;
  out.words = std::move(words);
  out.mat = Matrix(rows.rows(), rows.cols());
  for (int64_t i = 0; i < rows.rows(); ++i) {
    auto src = rows.row(i);
    double norm = std::sqrt(norm2(src));
    if (!(norm > 0.0)) {
      throw std::invalid_argument("zero vector for \"" + out.words[i] +
                                  "\" cannot be normalized");
    }
    auto dst = out.mat.row(i);
    for (size_t d = 0; d < src.size(); ++d) dst[d] = float(src[d] / norm);
  }
  out.index.reserve(out.words.size());
  for (size_t i = 0; i < out.words.size(); ++i) {
    out.index.emplace(out.words[i], static_cast<int32_t>(i));
  }
  return out;
}

EmbeddingSet normalize(const WordVectors& raw) {
  return normalize_rows(raw.words, raw.vecs);
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double na = std::sqrt(norm2(a));
  double nb = std::sqrt(norm2(b));
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw std::invalid_argument("cosine of a zero vector is undefined");
  }
  return dot(a, b) / (na * nb);
}

namespace {

// Indices of the k largest scores, ties to the lower index.
std::vector<int32_t> topk_indices(std::span<const double> scores, int k) {
  std::vector<int32_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto better = [&](int32_t a, int32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  if (static_cast<size_t>(k) < idx.size()) {
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), better);
    idx.resize(k);
  } else {
    std::sort(idx.begin(), idx.end(), better);
  }
  return idx;
}

double topk_mean(std::vector<double>& vals, int k) {
  std::nth_element(vals.begin(), vals.begin() + (k - 1), vals.end(),
                   std::greater<double>());
  double sum = std::accumulate(vals.begin(), vals.begin() + k, 0.0);
  return sum / double(k);
}

}  // namespace

std::vector<int32_t> nn_retrieve(std::span<const float> query,
                                 const EmbeddingSet& targets, int k) {
  if (targets.size() == 0) {
    throw std::invalid_argument("cannot retrieve from an empty target set");
  }
  if (k < 0 || static_cast<size_t>(k) > targets.size()) {
    throw std::invalid_argument("k out of range for target set");
  }
  double qnorm = std::sqrt(norm2(query));
  if (!(qnorm > 0.0)) {
    throw std::invalid_argument("cannot retrieve with a zero query vector");
  }
  std::vector<double> scores(targets.size());
  for (size_t t = 0; t < targets.size(); ++t) {
    scores[t] = dot(query, targets.mat.row(t)) / qnorm;
  }
  return topk_indices(scores, k);
}

CslsRanking csls_retrieve(const EmbeddingSet& sources,
                          const EmbeddingSet& targets, int k_neighborhood,
                          int topk) {
  const size_t ns = sources.size();
  const size_t nt = targets.size();
  if (ns == 0 || nt == 0) {
    throw std::invalid_argument("CSLS needs non-empty source and target sets");
  }
  if (k_neighborhood < 1 ||
      static_cast<size_t>(k_neighborhood) > std::min(ns, nt)) {
    throw std::invalid_argument(
        "CSLS neighborhood size must be in [1, min(|sources|, |targets|)]");
  }

  CslsRanking out;
  out.r_src.resize(nt);
  out.r_tgt.resize(ns);

  // Hub penalty of each target: mean cosine to its K nearest sources.
  std::vector<double> cos_buf;
  for (size_t t = 0; t < nt; ++t) {
    auto trow = targets.mat.row(t);
    cos_buf.resize(ns);
    for (size_t s = 0; s < ns; ++s) cos_buf[s] = dot(sources.mat.row(s), trow);
    out.r_src[t] = topk_mean(cos_buf, k_neighborhood);
  }

  out.topk.resize(ns);
  std::vector<double> scores(nt);
  for (size_t s = 0; s < ns; ++s) {
    auto srow = sources.mat.row(s);
    cos_buf.resize(nt);
    for (size_t t = 0; t < nt; ++t) cos_buf[t] = dot(srow, targets.mat.row(t));
    std::vector<double> top = cos_buf;
    out.r_tgt[s] = topk_mean(top, k_neighborhood);
    for (size_t t = 0; t < nt; ++t) {
      scores[t] = 2.0 * cos_buf[t] - out.r_tgt[s] - out.r_src[t];
    }
    out.topk[s] = topk_indices(scores, topk);
  }
  return out;
}

BilingualDictionary load_dictionary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dictionary: " + path);
  BilingualDictionary dict;
  std::unordered_map<std::string, size_t> seen;
  std::string line, src, tgt;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (!(ls >> src >> tgt)) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected \"source target\"");
    }
    auto [it, inserted] = seen.emplace(src, dict.entries.size());
    if (inserted) {
      dict.entries.push_back({src, {tgt}});
    } else {
      auto& gold = dict.entries[it->second].second;
      if (std::find(gold.begin(), gold.end(), tgt) == gold.end()) {
        gold.push_back(tgt);
      }
    }
  }
  return dict;
}

WordTranslationResult word_translation_p1(const WordVectors& src,
                                          const WordVectors& tgt,
                                          const BilingualDictionary& dict,
                                          Criterion criterion, int csls_k,
                                          int64_t max_queries,
                                          int64_t max_targets) {
  // Candidate pool: most frequent target words (vector files are stored in
  // frequency order).
  int64_t pool = std::min<int64_t>(max_targets, tgt.vecs.rows());
  Matrix pool_rows(pool, tgt.vecs.cols());
  std::vector<std::string> pool_words(tgt.words.begin(),
                                      tgt.words.begin() + pool);
  for (int64_t i = 0; i < pool; ++i) {
    auto s = tgt.vecs.row(i);
    std::copy(s.begin(), s.end(), pool_rows.row(i).begin());
  }
  EmbeddingSet candidates = normalize_rows(std::move(pool_words), pool_rows);

  WordTranslationResult res;
  std::vector<const std::vector<std::string>*> gold;
  std::vector<int32_t> query_rows;
  for (const auto& [source, targets] : dict.entries) {
    if (static_cast<int64_t>(query_rows.size()) >= max_queries) break;
    int32_t row = src.find(source);
    if (row < 0) {
      ++res.skipped;
      continue;
    }
    query_rows.push_back(row);
    gold.push_back(&targets);
  }
  res.evaluated = static_cast<int64_t>(query_rows.size());
  if (res.evaluated == 0) {
    throw std::runtime_error(
        "no dictionary source word is present in the embeddings");
  }

  std::vector<int32_t> best(query_rows.size());
  if (criterion == Criterion::NN) {
    for (size_t q = 0; q < query_rows.size(); ++q) {
      best[q] = nn_retrieve(src.vecs.row(query_rows[q]), candidates, 1)[0];
    }
  } else {
    Matrix qrows(query_rows.size(), src.vecs.cols());
    std::vector<std::string> qwords(query_rows.size());
    for (size_t q = 0; q < query_rows.size(); ++q) {
      auto s = src.vecs.row(query_rows[q]);
      std::copy(s.begin(), s.end(), qrows.row(q).begin());
      qwords[q] = src.words[query_rows[q]];
    }
    EmbeddingSet queries = normalize_rows(std::move(qwords), qrows);
    CslsRanking ranking = csls_retrieve(queries, candidates, csls_k, 1);
    for (size_t q = 0; q < query_rows.size(); ++q) best[q] = ranking.argmax(q);
  }

  int64_t correct = 0;
  for (size_t q = 0; q < query_rows.size(); ++q) {
    const std::string& predicted = candidates.words[best[q]];
    const auto& golds = *gold[q];
    if (std::find(golds.begin(), golds.end(), predicted) != golds.end()) {
      ++correct;
    }
  }
  res.p1 = double(correct) / double(res.evaluated);
  res.coverage = dict.entries.empty()
                     ? 0.0
                     : double(res.evaluated) / double(dict.entries.size());
  return res;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("pearson: length mismatch");
  }
  const size_t n = xs.size();
  if (n < 2) throw std::invalid_argument("pearson needs at least 2 points");
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / double(n);
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / double(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw std::invalid_argument("pearson is undefined for zero variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

SimilarityDataset load_similarity_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open similarity dataset: " + path);
  SimilarityDataset ds;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), '\t', ' ');
    std::istringstream ls(line);
    SimilarityDataset::Row row;
    if (!(ls >> row.w1 >> row.w2 >> row.score) ||
        !std::isfinite(row.score)) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected \"word1 word2 score\"");
    }
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

WordSimilarityResult word_similarity_eval(const WordVectors& vecs,
                                          const SimilarityDataset& ds) {
  std::vector<double> predicted, human;
  WordSimilarityResult res;
  for (const auto& row : ds.rows) {
    int32_t a = vecs.find(row.w1);
    int32_t b = vecs.find(row.w2);
    if (a < 0 || b < 0) {
      ++res.skipped;
      continue;
    }
    predicted.push_back(cosine(vecs.vecs.row(a), vecs.vecs.row(b)));
    human.push_back(row.score);
  }
  res.used = static_cast<int64_t>(predicted.size());
  res.coverage =
      ds.rows.empty() ? 0.0 : double(res.used) / double(ds.rows.size());
  if (res.used < 2) {
    throw std::runtime_error(
        "fewer than 2 similarity rows are covered by the vocabulary");
  }
  res.pearson = pearson(predicted, human);
  return res;
}

void write_jsonl(std::span<const MetricRecord> records, std::ostream& out) {
  for (const MetricRecord& r : records) {
    nlohmann::json j{{"name", r.name},
                     {"direction", r.direction},
                     {"criterion", r.criterion},
                     {"value", r.value},
                     {"coverage", r.coverage}};
    out << j.dump() << "\n";
  }
}

void print_table(std::span<const MetricRecord> records, std::ostream& out) {
  size_t name_w = 6, dir_w = 9, crit_w = 9;
  for (const MetricRecord& r : records) {
    name_w = std::max(name_w, r.name.size());
    dir_w = std::max(dir_w, r.direction.size());
    crit_w = std::max(crit_w, r.criterion.size());
  }
  out << std::left << std::setw(int(name_w) + 2) << "metric"
      << std::setw(int(dir_w) + 2) << "direction" << std::setw(int(crit_w) + 2)
      << "criterion" << std::right << std::setw(10) << "value"
      << std::setw(10) << "coverage" << "\n";
  for (const MetricRecord& r : records) {
    out << std::left << std::setw(int(name_w) + 2) << r.name
        << std::setw(int(dir_w) + 2) << r.direction
        << std::setw(int(crit_w) + 2) << r.criterion << std::right
        << std::fixed << std::setprecision(4) << std::setw(10) << r.value
        << std::setw(10) << r.coverage << std::defaultfloat << "\n";
  }
}

}  // namespace bisent2vec
