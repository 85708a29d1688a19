#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bisent2vec/matrix.h"
#include "bisent2vec/model.h"

namespace bisent2vec {

enum class Criterion { NN, CSLS };

Criterion parse_criterion(const std::string& name);  // "nn" | "csls"

// Raw (unnormalized) word vectors for one language, most frequent word first.
struct WordVectors {
  std::vector<std::string> words;
  Matrix vecs;
  std::unordered_map<std::string, int32_t> index;

  int32_t find(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? -1 : it->second;
  }
  int dim() const { return static_cast<int>(vecs.cols()); }
};

WordVectors vectors_from_model(const Model& model, Lang lang,
                               ExportMatrix which = ExportMatrix::InputUnigrams);
// Parses word2vec text format (the export_text layout).
WordVectors load_word_vectors(const std::string& path);

// Unit-normalized copies of word vectors; retrieval operates on these.
// Throws on a zero vector.
struct EmbeddingSet {
  std::vector<std::string> words;
  Matrix mat;  // rows have unit L2 norm
  std::unordered_map<std::string, int32_t> index;

  int32_t find(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? -1 : it->second;
  }
  size_t size() const { return words.size(); }
};

EmbeddingSet normalize(const WordVectors& raw);
EmbeddingSet normalize_rows(std::vector<std::string> words, const Matrix& rows);

double cosine(std::span<const float> a, std::span<const float> b);

// Top-k target indices by cosine, descending; ties broken by lower index.
std::vector<int32_t> nn_retrieve(std::span<const float> query,
                                 const EmbeddingSet& targets, int k);

// CSLS(x, y) = 2 cos(x, y) - r_tgt(x) - r_src(y), where r_tgt(x) is the mean
// cosine of x to its K nearest targets and r_src(y) the mean cosine of y to
// its K nearest sources, both over the full sets.
struct CslsRanking {
  std::vector<std::vector<int32_t>> topk;  // per source, best first
  std::vector<double> r_tgt;               // per source
  std::vector<double> r_src;               // per target

  int32_t argmax(size_t source) const { return topk[source][0]; }
};

CslsRanking csls_retrieve(const EmbeddingSet& sources,
                          const EmbeddingSet& targets, int k_neighborhood,
                          int topk = 1);

// MUSE text format: one "source target" pair per line; duplicate sources
// merged into one gold set.
struct BilingualDictionary {
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;
};

BilingualDictionary load_dictionary(const std::string& path);

struct WordTranslationResult {
  double p1 = 0.0;
  double coverage = 0.0;  // evaluated / dictionary entries
  int64_t evaluated = 0;
  int64_t skipped = 0;  // sources missing from the embedding set
};

// P@1 of dictionary translation over the `max_targets` most frequent target
// words. Sources absent from the source vectors are skipped and reported via
// coverage. Throws when no dictionary source is present at all.
WordTranslationResult word_translation_p1(const WordVectors& src,
                                          const WordVectors& tgt,
                                          const BilingualDictionary& dict,
                                          Criterion criterion, int csls_k,
                                          int64_t max_queries,
                                          int64_t max_targets);

// Sample Pearson correlation. Throws on length < 2 or zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct SimilarityDataset {
  struct Row {
    std::string w1;
    std::string w2;
    double score = 0.0;
  };
  std::vector<Row> rows;
};

// "w1 w2 score" per line, tab- or space-separated.
SimilarityDataset load_similarity_dataset(const std::string& path);

struct WordSimilarityResult {
  double pearson = 0.0;
  double coverage = 0.0;
  int64_t used = 0;
  int64_t skipped = 0;
};

WordSimilarityResult word_similarity_eval(const WordVectors& vecs,
                                          const SimilarityDataset& ds);

// idf(w) = ln(N / df(w)) over N sentences; unseen words get ln(N).
struct IdfTable {
  std::unordered_map<std::string, double> idf;
  double default_idf = 0.0;
  int64_t n_sentences = 0;

  double lookup(const std::string& w) const {
    auto it = idf.find(w);
    return it == idf.end() ? default_idf : it->second;
  }
};

IdfTable build_idf(const std::vector<std::vector<std::string>>& sentences);

// tf-idf weighted average of word vectors; OOV tokens skipped. Returns
// nullopt when nothing contributes (all OOV or all weights zero).
std::optional<std::vector<float>> sentence_embed_tfidf(
    const std::vector<std::string>& tokens, const IdfTable& idf,
    const WordVectors& vecs);

// Whitespace tokenization, one sentence per line.
std::vector<std::vector<std::string>> load_sentences(
    const std::string& path, std::optional<int64_t> max_lines = std::nullopt);

struct SentenceRetrievalResult {
  double p1_fwd = 0.0;  // l1 queries -> l2 candidates
  double p1_bwd = 0.0;
  int64_t queries_fwd = 0;
  int64_t queries_bwd = 0;
  int64_t excluded = 0;  // aligned pairs dropped (un-embeddable side)
};

// Aligned sentence retrieval: sentence i of `src_sents` translates sentence i
// of `tgt_sents`. Sentences are embedded by tf-idf weighted averaging (idf
// per language from the weighting corpora), unit-normalized, and retrieved by
// NN or CSLS in both directions. P@1 counts queries whose top-1 is their
// aligned index. The first max_queries pairs are queried against the first
// max_candidates candidates (clamped to the data).
SentenceRetrievalResult sentence_retrieval_p1(
    const std::vector<std::vector<std::string>>& src_sents,
    const std::vector<std::vector<std::string>>& tgt_sents,
    const std::vector<std::vector<std::string>>& src_weight_corpus,
    const std::vector<std::vector<std::string>>& tgt_weight_corpus,
    const WordVectors& src_vecs, const WordVectors& tgt_vecs,
    Criterion criterion, int csls_k, int64_t max_queries,
    int64_t max_candidates);

struct MetricRecord {
  std::string name;
  std::string direction;
  std::string criterion;
  double value = 0.0;
  double coverage = 1.0;
};

// One JSON object per line: name, direction, criterion, value, coverage.
void write_jsonl(std::span<const MetricRecord> records, std::ostream& out);
// Aligned human-readable table.
void print_table(std::span<const MetricRecord> records, std::ostream& out);

}  // namespace bisent2vec
