#include "bisent2vec/model.h"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace bisent2vec {

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

EmbeddingMatrices init_matrices(RowIndex n_words, const TrainConfig& cfg,
                                uint64_t seed) {
  EmbeddingMatrices m;
  m.dim = cfg.dim;
  m.input = Matrix(n_words + cfg.bucket_rows(), cfg.dim);
  m.output = Matrix(n_words, cfg.dim);
  Rng rng(seed);
  const float scale = 1.0f / float(cfg.dim);
  float* p = m.input.data();
  for (size_t i = 0; i < m.input.size(); ++i) {
    p[i] = float(rng.uniform01() * 2.0 - 1.0) * scale;
  }
  return m;
}

void compose(const ContextIndices& ctx, const Matrix& input,
             std::span<float> out) {
  if (ctx.empty()) throw std::invalid_argument("cannot compose an empty context");
  // Double accumulator: rounds once per entry, which keeps the loss smooth
  // enough for finite-difference gradient checks.
  thread_local std::vector<double> sums;
  const size_t dim = out.size();
  sums.assign(dim, 0.0);
  for (RowIndex r : ctx.indices) {
    auto row = input.row(r);
    for (size_t d = 0; d < dim; ++d) sums[d] += row[d];
  }
  const double inv = 1.0 / double(ctx.size());
  for (size_t d = 0; d < dim; ++d) out[d] = float(sums[d] * inv);
}

std::vector<float> compose(const ContextIndices& ctx, const Matrix& input) {
  std::vector<float> out(input.cols());
  compose(ctx, input, out);
  return out;
}

namespace {

constexpr char kMagic[4] = {'B', 'S', '2', 'V'};

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    path_ = path;
  }
  void bytes(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), n);
    if (!out_) throw std::runtime_error("write failed: " + path_);
  }
  template <typename T>
  void value(T v) {
    bytes(&v, sizeof(T));
  }
  void str(const std::string& s) {
    value<uint32_t>(static_cast<uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open model file: " + path);
    path_ = path;
  }
  void bytes(void* p, size_t n, const char* what) {
    in_.read(static_cast<char*>(p), n);
    if (static_cast<size_t>(in_.gcount()) != n) {
      throw std::runtime_error("truncated model file " + path_ + ": expected " +
                               std::to_string(n) + " bytes for " + what +
                               ", got " + std::to_string(in_.gcount()));
    }
  }
  template <typename T>
  T value(const char* what) {
    T v;
    bytes(&v, sizeof(T), what);
    return v;
  }
  std::string str(const char* what) {
    auto n = value<uint32_t>(what);
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }

 private:
  std::ifstream in_;
  std::string path_;
};

void write_config(Writer& w, const TrainConfig& c) {
  w.value<int32_t>(c.dim);
  w.value<int32_t>(c.epochs);
  w.value<double>(c.lr0);
  w.value<int32_t>(c.negatives);
  w.value<int32_t>(c.max_n);
  w.value<int64_t>(c.buckets);
  w.value<int32_t>(c.dropout_k);
  w.value<int32_t>(c.min_count);
  w.value<double>(c.t);
  w.value<int32_t>(c.threads);
  w.value<uint64_t>(c.seed);
  w.value<int64_t>(c.table_size);
  w.value<int64_t>(c.max_pairs.value_or(-1));
  w.value<uint8_t>(c.shuffle ? 1 : 0);
  w.value<double>(c.mono_weight);
  w.value<double>(c.cross_weight);
  w.value<uint8_t>(c.use_lut ? 1 : 0);
}

TrainConfig read_config(Reader& r) {
  TrainConfig c;
  c.dim = r.value<int32_t>("config.dim");
  c.epochs = r.value<int32_t>("config.epochs");
  c.lr0 = r.value<double>("config.lr0");
  c.negatives = r.value<int32_t>("config.negatives");
  c.max_n = r.value<int32_t>("config.max_n");
  c.buckets = r.value<int64_t>("config.buckets");
  c.dropout_k = r.value<int32_t>("config.dropout_k");
  c.min_count = r.value<int32_t>("config.min_count");
  c.t = r.value<double>("config.t");
  c.threads = r.value<int32_t>("config.threads");
  c.seed = r.value<uint64_t>("config.seed");
  c.table_size = r.value<int64_t>("config.table_size");
  int64_t max_pairs = r.value<int64_t>("config.max_pairs");
  if (max_pairs >= 0) c.max_pairs = max_pairs;
  c.shuffle = r.value<uint8_t>("config.shuffle") != 0;
  c.mono_weight = r.value<double>("config.mono_weight");
  c.cross_weight = r.value<double>("config.cross_weight");
  c.use_lut = r.value<uint8_t>("config.use_lut") != 0;
  return c;
}

void write_matrix(Writer& w, const Matrix& m) {
  w.value<int64_t>(m.rows());
  w.value<int64_t>(m.cols());
  w.bytes(m.data(), m.size() * sizeof(float));
}

Matrix read_matrix(Reader& r, const char* what) {
  int64_t rows = r.value<int64_t>(what);
  int64_t cols = r.value<int64_t>(what);
  if (rows < 0 || cols < 0) {
    throw std::runtime_error(std::string("corrupt matrix header in ") + what);
  }
  Matrix m(rows, cols);
  r.bytes(m.data(), m.size() * sizeof(float), what);
  return m;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  Writer w(path);
  w.bytes(kMagic, sizeof(kMagic));
  w.value<uint32_t>(kModelFormatVersion);
  write_config(w, model.cfg);

  const Vocabulary& v = model.vocab;
  w.value<int64_t>(v.size());
  for (WordId i = 0; i < v.size(); ++i) {
    const VocabEntry& e = v.entry(i);
    w.str(e.surface);
    w.value<uint8_t>(static_cast<uint8_t>(e.lang));
    w.value<int64_t>(e.count);
  }
  w.value<int64_t>(v.total_tokens(Lang::L1));
  w.value<int64_t>(v.total_tokens(Lang::L2));
  w.value<double>(v.subsample_t());
  w.value<int32_t>(v.min_count());

  write_matrix(w, model.mats.input);
  write_matrix(w, model.mats.output);
}

Model load_model(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a model file (bad magic): " + path);
  }
  uint32_t version = r.value<uint32_t>("version");
  if (version != kModelFormatVersion) {
    throw std::runtime_error("unsupported model format version " +
                             std::to_string(version) + " (expected " +
                             std::to_string(kModelFormatVersion) + ")");
  }
  Model model;
  model.cfg = read_config(r);

  int64_t n_entries = r.value<int64_t>("vocabulary size");
  std::vector<std::pair<std::string, int64_t>> counts[kNumLangs];
  for (int64_t i = 0; i < n_entries; ++i) {
    std::string surface = r.str("vocabulary entry");
    uint8_t lang = r.value<uint8_t>("vocabulary entry");
    int64_t count = r.value<int64_t>("vocabulary entry");
    if (lang >= kNumLangs) {
      throw std::runtime_error("corrupt vocabulary entry (bad language tag)");
    }
    counts[lang].emplace_back(std::move(surface), count);
  }
  int64_t total_l1 = r.value<int64_t>("token totals");
  int64_t total_l2 = r.value<int64_t>("token totals");
  double vocab_t = r.value<double>("vocabulary t");
  int32_t vocab_min_count = r.value<int32_t>("vocabulary min_count");
  model.vocab = Vocabulary::from_counts(counts[0], counts[1], total_l1,
                                        total_l2, vocab_min_count, vocab_t);
  if (model.vocab.size() != static_cast<WordId>(n_entries)) {
    throw std::runtime_error("corrupt vocabulary: entries below min_count");
  }

  model.mats.input = read_matrix(r, "input matrix");
  model.mats.output = read_matrix(r, "output matrix");
  model.mats.dim = model.cfg.dim;
  if (model.mats.input.rows() !=
          model.vocab.size() + model.cfg.bucket_rows() ||
      model.mats.output.rows() != model.vocab.size() ||
      model.mats.input.cols() != model.cfg.dim ||
      model.mats.output.cols() != model.cfg.dim) {
    throw std::runtime_error("model matrices do not match vocabulary/config");
  }
  return model;
}

void export_text(const Model& model, Lang lang, ExportMatrix which,
                 const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  auto [begin, end] = model.vocab.lang_range(lang);
  const Matrix& m = which == ExportMatrix::InputUnigrams ? model.mats.input
                                                         : model.mats.output;
  std::fprintf(out, "%d %d\n", end - begin, model.mats.dim);
  for (WordId w = begin; w < end; ++w) {
    std::fputs(model.vocab.entry(w).surface.c_str(), out);
    auto row = m.row(w);
    for (float x : row) std::fprintf(out, " %.6g", x);
    std::fputc('\n', out);
  }
  if (std::ferror(out)) {
    std::fclose(out);
    throw std::runtime_error("write failed: " + path);
  }
  std::fclose(out);
}

}  // namespace bisent2vec
