#pragma once

#include <span>
#include <string>
#include <vector>

#include "bisent2vec/config.h"
#include "bisent2vec/matrix.h"
#include "bisent2vec/ngrams.h"
#include "bisent2vec/vocab.h"

namespace bisent2vec {

// The two parameter matrices. `input` holds one row per word plus the hashed
// bigram bucket rows; `output` holds one row per word.
struct EmbeddingMatrices {
  Matrix input;
  Matrix output;
  int dim = 0;
};

// Input rows i.i.d. uniform on [-1/dim, 1/dim] from the seed; output rows
// zero.
EmbeddingMatrices init_matrices(RowIndex n_words, const TrainConfig& cfg,
                                uint64_t seed);

// Arithmetic mean of the selected input rows. Throws on an empty context.
void compose(const ContextIndices& ctx, const Matrix& input,
             std::span<float> out);
std::vector<float> compose(const ContextIndices& ctx, const Matrix& input);

struct Model {
  Vocabulary vocab;
  TrainConfig cfg;
  EmbeddingMatrices mats;
};

// Binary model file: magic "BS2V", version, config snapshot, vocabulary, then
// both matrices row-major little-endian float32. load(save(m)) reproduces the
// matrices bit-exactly.
inline constexpr uint32_t kModelFormatVersion = 1;

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

enum class ExportMatrix { InputUnigrams, Output };

// Word2vec text format: header "n_words dim", then one line per word with the
// surface and dim values at 6 significant digits, most frequent word first.
// Only unigram rows of the requested language.
void export_text(const Model& model, Lang lang, ExportMatrix which,
                 const std::string& path);

}  // namespace bisent2vec
