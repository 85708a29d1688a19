#include "bisent2vec/classifier.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bisent2vec/ngrams.h"

namespace bisent2vec {

std::vector<LabeledDocument> load_documents(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open document file: " + path);
  std::vector<LabeledDocument> docs;
  std::string line;
  int64_t lineno = 0;
  bool in_block = false;
  LabeledDocument doc;
  auto flush = [&]() {
    if (in_block) {
      docs.push_back(std::move(doc));
      doc = LabeledDocument{};
      in_block = false;
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) {
      flush();
      continue;
    }
    if (!in_block) {
      std::istringstream ls(line);
      if (!(ls >> doc.label) || doc.label < 0) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": block must start with a non-negative label");
      }
      in_block = true;
      continue;
    }
    std::vector<std::string> tokens;
    std::istringstream ls(line);
    std::string token;
    while (ls >> token) tokens.push_back(token);
    doc.sentences.push_back(std::move(tokens));
  }
  flush();
  return docs;
}

std::optional<std::vector<double>> doc_embed(const LabeledDocument& doc,
                                             const Model& model, Lang lang) {
  NgramConfig ncfg = model.cfg.ngram_config();
  ncfg.dropout_k = 0;  // inference-time composition never drops n-grams
  std::vector<double> sum(model.mats.dim, 0.0);
  std::vector<WordId> ids;
  bool any = false;
  for (const auto& sentence : doc.sentences) {
    ids.clear();
    for (const auto& token : sentence) {
      WordId id = model.vocab.find(lang, token);
      if (id >= 0) ids.push_back(id);
    }
    if (ids.empty()) continue;
    ContextIndices ctx =
        extract_context(ids, lang, ncfg, model.vocab.size(), nullptr);
    std::vector<float> v = compose(ctx, model.mats.input);
    for (size_t d = 0; d < sum.size(); ++d) sum[d] += v[d];
    any = true;
  }
  if (!any) return std::nullopt;
  return sum;
}

size_t MlpParams::parameter_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
}

MlpParams init_mlp(int dim, int classes, uint64_t seed) {
  MlpParams p;
  p.dim = dim;
  p.classes = classes;
  p.w1.resize(size_t(MlpParams::kHidden1) * dim);
  p.b1.assign(MlpParams::kHidden1, 0.0);
  p.w2.resize(size_t(MlpParams::kHidden2) * MlpParams::kHidden1);
  p.b2.assign(MlpParams::kHidden2, 0.0);
  p.w3.resize(size_t(classes) * MlpParams::kHidden2);
  p.b3.assign(classes, 0.0);
  Rng rng(seed);
  auto fill = [&](std::vector<double>& w, int fan_in, int fan_out) {
    double s = std::sqrt(6.0 / double(fan_in + fan_out));
    for (double& x : w) x = (rng.uniform01() * 2.0 - 1.0) * s;
  };
  fill(p.w1, dim, MlpParams::kHidden1);
  fill(p.w2, MlpParams::kHidden1, MlpParams::kHidden2);
  fill(p.w3, MlpParams::kHidden2, classes);
  return p;
}

namespace {

void affine(const std::vector<double>& w, const std::vector<double>& b,
            std::span<const double> x, std::vector<double>& out) {
  int rows = static_cast<int>(b.size());
  int cols = static_cast<int>(x.size());
  out.assign(rows, 0.0);
  for (int r = 0; r < rows; ++r) {
    double s = b[r];
    const double* wr = w.data() + size_t(r) * cols;
    for (int c = 0; c < cols; ++c) s += wr[c] * x[c];
    out[r] = s;
  }
}

void relu_inplace(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

void softmax_inplace(std::vector<double>& v) {
  double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

struct ForwardTrace {
  std::vector<double> z1, h1, z2, h2, probs;
};

void forward_trace(std::span<const double> x, const MlpParams& p,
                   ForwardTrace& t) {
  affine(p.w1, p.b1, x, t.z1);
  t.h1 = t.z1;
  relu_inplace(t.h1);
  affine(p.w2, p.b2, t.h1, t.z2);
  t.h2 = t.z2;
  relu_inplace(t.h2);
  affine(p.w3, p.b3, t.h2, t.probs);
  softmax_inplace(t.probs);
}

}  // namespace

std::vector<double> mlp_forward(std::span<const double> x,
                                const MlpParams& p) {
  ForwardTrace t;
  forward_trace(x, p, t);
  return t.probs;
}

MlpGrads::MlpGrads(const MlpParams& p)
    : w1(p.w1.size(), 0.0), b1(p.b1.size(), 0.0), w2(p.w2.size(), 0.0),
      b2(p.b2.size(), 0.0), w3(p.w3.size(), 0.0), b3(p.b3.size(), 0.0) {}

void MlpGrads::zero() {
  for (auto* v : {&w1, &b1, &w2, &b2, &w3, &b3}) {
    std::fill(v->begin(), v->end(), 0.0);
  }
}

void MlpGrads::scale(double s) {
  for (auto* v : {&w1, &b1, &w2, &b2, &w3, &b3}) {
    for (double& x : *v) x *= s;
  }
}

void MlpGrads::accumulate(const MlpGrads& other) {
  auto add = [](std::vector<double>& a, const std::vector<double>& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  };
  add(w1, other.w1);
  add(b1, other.b1);
  add(w2, other.w2);
  add(b2, other.b2);
  add(w3, other.w3);
  add(b3, other.b3);
}

double mlp_loss_grad(std::span<const double> x, int label, const MlpParams& p,
                     MlpGrads* grads) {
  if (label < 0 || label >= p.classes) {
    throw std::invalid_argument("label " + std::to_string(label) +
                                " out of range for " +
                                std::to_string(p.classes) + " classes");
  }
  ForwardTrace t;
  forward_trace(x, p, t);
  double loss = -std::log(std::max(t.probs[label], 1e-300));
  if (!grads) return loss;

  std::vector<double> dlogits = t.probs;
  dlogits[label] -= 1.0;

  const int h1 = MlpParams::kHidden1, h2 = MlpParams::kHidden2;
  std::vector<double> dh2(h2, 0.0), dh1(h1, 0.0);
  for (int c = 0; c < p.classes; ++c) {
    grads->b3[c] += dlogits[c];
    double* gw = grads->w3.data() + size_t(c) * h2;
    const double* w = p.w3.data() + size_t(c) * h2;
    for (int j = 0; j < h2; ++j) {
      gw[j] += dlogits[c] * t.h2[j];
      dh2[j] += w[j] * dlogits[c];
    }
  }
  for (int j = 0; j < h2; ++j) {
    if (t.z2[j] <= 0.0) dh2[j] = 0.0;
    grads->b2[j] += dh2[j];
    double* gw = grads->w2.data() + size_t(j) * h1;
    const double* w = p.w2.data() + size_t(j) * h1;
    for (int i = 0; i < h1; ++i) {
      gw[i] += dh2[j] * t.h1[i];
      dh1[i] += w[i] * dh2[j];
    }
  }
  for (int i = 0; i < h1; ++i) {
    if (t.z1[i] <= 0.0) dh1[i] = 0.0;
    grads->b1[i] += dh1[i];
    double* gw = grads->w1.data() + size_t(i) * p.dim;
    for (int d = 0; d < p.dim; ++d) gw[d] += dh1[i] * x[d];
  }
  return loss;
}

AdamState::AdamState(const MlpParams& p, double lr_)
    : lr(lr_), m(p), v(p) {}

void adam_step(MlpParams& p, const MlpGrads& grads, AdamState& s) {
  ++s.step;
  double bc1 = 1.0 - std::pow(s.beta1, double(s.step));
  double bc2 = 1.0 - std::pow(s.beta2, double(s.step));
  auto update = [&](std::vector<double>& theta, std::vector<double>& m,
                    std::vector<double>& v, const std::vector<double>& g) {
    for (size_t i = 0; i < theta.size(); ++i) {
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
      double m_hat = m[i] / bc1;
      double v_hat = v[i] / bc2;
      theta[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
    }
  };
  update(p.w1, s.m.w1, s.v.w1, grads.w1);
  update(p.b1, s.m.b1, s.v.b1, grads.b1);
  update(p.w2, s.m.w2, s.v.w2, grads.w2);
  update(p.b2, s.m.b2, s.v.b2, grads.b2);
  update(p.w3, s.m.w3, s.v.w3, grads.w3);
  update(p.b3, s.m.b3, s.v.b3, grads.b3);
}

MlpParams train_classifier(const std::vector<LabeledDocument>& docs,
                           const Model& model, Lang lang,
                           const ClassifierTrainConfig& cfg) {
  std::vector<std::vector<double>> xs;
  std::vector<int> labels;
  int classes = 0;
  for (const auto& doc : docs) {
    auto x = doc_embed(doc, model, lang);
    if (!x) continue;
    xs.push_back(std::move(*x));
    labels.push_back(doc.label);
    classes = std::max(classes, doc.label + 1);
  }
  if (xs.empty()) {
    throw std::runtime_error("no trainable documents (empty or fully OOV)");
  }

  MlpParams params = init_mlp(model.mats.dim, classes, cfg.seed);
  AdamState adam(params, cfg.lr);
  MlpGrads batch_grads(params);

  std::vector<size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffler(mix_seed(cfg.seed ^ 0xa02bdbf7bb3c0a7ULL));

  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffler);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size();
         start += size_t(cfg.batch_size)) {
      size_t stop = std::min(order.size(), start + size_t(cfg.batch_size));
      batch_grads.zero();
      for (size_t i = start; i < stop; ++i) {
        epoch_loss +=
            mlp_loss_grad(xs[order[i]], labels[order[i]], params, &batch_grads);
      }
      batch_grads.scale(1.0 / double(stop - start));
      adam_step(params, batch_grads, adam);
    }
    epoch_loss /= double(xs.size());
    if (epoch_loss < best_loss - cfg.min_delta) {
      best_loss = epoch_loss;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  return params;
}

ClassifierEvalResult evaluate_classifier(const MlpParams& p,
                                         const std::vector<LabeledDocument>& docs,
                                         const Model& model, Lang lang) {
  if (docs.empty()) throw std::runtime_error("empty evaluation document set");
  ClassifierEvalResult res;
  res.total = static_cast<int64_t>(docs.size());
  for (const auto& doc : docs) {
    auto x = doc_embed(doc, model, lang);
    if (!x) {
      ++res.oov_docs;  // counted as an error
      continue;
    }
    std::vector<double> probs = mlp_forward(*x, p);
    int best = int(std::max_element(probs.begin(), probs.end()) -
                   probs.begin());
    if (best == doc.label) ++res.correct;
  }
  res.accuracy = double(res.correct) / double(res.total);
  return res;
}

void save_classifier(const MlpParams& p, const std::string& path) {
  nlohmann::json j{{"dim", p.dim},     {"classes", p.classes}, {"w1", p.w1},
                   {"b1", p.b1},       {"w2", p.w2},           {"b2", p.b2},
                   {"w3", p.w3},       {"b3", p.b3}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump() << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

MlpParams load_classifier(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open classifier file: " + path);
  nlohmann::json j;
  in >> j;
  MlpParams p;
  p.dim = j.at("dim").get<int>();
  p.classes = j.at("classes").get<int>();
  p.w1 = j.at("w1").get<std::vector<double>>();
  p.b1 = j.at("b1").get<std::vector<double>>();
  p.w2 = j.at("w2").get<std::vector<double>>();
  p.b2 = j.at("b2").get<std::vector<double>>();
  p.w3 = j.at("w3").get<std::vector<double>>();
  p.b3 = j.at("b3").get<std::vector<double>>();
  return p;
}

}  // namespace bisent2vec
