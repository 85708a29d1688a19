#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bisent2vec/model.h"

namespace bisent2vec {

struct LabeledDocument {
  std::vector<std::vector<std::string>> sentences;
  int label = 0;
};

// Document file: blocks separated by blank lines; first line of a block is
// the integer label, following lines are tokenized sentences.
std::vector<LabeledDocument> load_documents(const std::string& path);

// Sum of the document's sentence embeddings (plain average composition per
// sentence, no dropout). Sentences with no in-vocabulary token contribute
// nothing; returns nullopt for a fully OOV document.
std::optional<std::vector<double>> doc_embed(const LabeledDocument& doc,
                                             const Model& model, Lang lang);

// Feed-forward classifier with hidden layers of size 10 and 8 (double
// precision throughout; the network is tiny).
struct MlpParams {
  static constexpr int kHidden1 = 10;
  static constexpr int kHidden2 = 8;

  int dim = 0;
  int classes = 0;
  std::vector<double> w1, b1;  // kHidden1 x dim, kHidden1
  std::vector<double> w2, b2;  // kHidden2 x kHidden1, kHidden2
  std::vector<double> w3, b3;  // classes x kHidden2, classes

  size_t parameter_count() const;
};

MlpParams init_mlp(int dim, int classes, uint64_t seed);

// softmax(W3 relu(W2 relu(W1 x + b1) + b2) + b3); sums to 1.
std::vector<double> mlp_forward(std::span<const double> x,
                                const MlpParams& p);

struct MlpGrads {
  std::vector<double> w1, b1, w2, b2, w3, b3;

  explicit MlpGrads(const MlpParams& p);
  void zero();
  void scale(double s);
  void accumulate(const MlpGrads& other);
};

// Cross-entropy loss of one example; fills `grads` by backprop when given.
double mlp_loss_grad(std::span<const double> x, int label, const MlpParams& p,
                     MlpGrads* grads);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step = 0;
  MlpGrads m;  // first moment
  MlpGrads v;  // second moment

  explicit AdamState(const MlpParams& p, double lr = 1e-3);
};

// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) with bias correction.
void adam_step(MlpParams& p, const MlpGrads& grads, AdamState& s);

struct ClassifierTrainConfig {
  int epochs = 50;
  int batch_size = 16;
  double lr = 1e-3;
  uint64_t seed = 1;
  // Early stop when the epoch loss fails to improve by min_delta for
  // `patience` consecutive epochs.
  int patience = 10;
  double min_delta = 1e-5;
};

// Mini-batch Adam over documents embedded in one language. Deterministic for
// a fixed seed. Fully OOV documents are dropped. Throws on an empty (or
// fully OOV) training set.
MlpParams train_classifier(const std::vector<LabeledDocument>& docs,
                           const Model& model, Lang lang,
                           const ClassifierTrainConfig& cfg);

struct ClassifierEvalResult {
  double accuracy = 0.0;
  int64_t total = 0;
  int64_t correct = 0;
  int64_t oov_docs = 0;  // counted as errors
};

ClassifierEvalResult evaluate_classifier(const MlpParams& p,
                                         const std::vector<LabeledDocument>& docs,
                                         const Model& model, Lang lang);

void save_classifier(const MlpParams& p, const std::string& path);
MlpParams load_classifier(const std::string& path);

}  // namespace bisent2vec
