#include "synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "bisent2vec/types.h"

namespace testsupport {

namespace {

std::string render(const std::vector<std::vector<int>>& sentences,
                   const std::vector<std::string>& words, size_t begin,
                   size_t end) {
  std::string out;
  for (size_t i = begin; i < end; ++i) {
    for (size_t j = 0; j < sentences[i].size(); ++j) {
      if (j) out += ' ';
      out += words[sentences[i][j]];
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string CipherCorpus::l1_text(size_t begin, size_t end) const {
  return render(sentences, l1_words, begin, end);
}

std::string CipherCorpus::l2_text(size_t begin, size_t end) const {
  return render(sentences, l2_words, begin, end);
}

std::vector<std::vector<std::string>> CipherCorpus::tokenized(
    bool l2_side, size_t begin, size_t end) const {
  const auto& words = l2_side ? l2_words : l1_words;
  std::vector<std::vector<std::string>> out;
  out.reserve(end - begin);
  for (size_t i = begin; i < end; ++i) {
    std::vector<std::string> sent;
    sent.reserve(sentences[i].size());
    for (int tok : sentences[i]) sent.push_back(words[tok]);
    out.push_back(std::move(sent));
  }
  return out;
}

std::string CipherCorpus::dictionary(bool l1_to_l2) const {
  std::string out;
  for (size_t i = 0; i < l1_words.size(); ++i) {
    out += l1_to_l2 ? l1_words[i] : l2_words[i];
    out += ' ';
    out += l1_to_l2 ? l2_words[i] : l1_words[i];
    out += '\n';
  }
  return out;
}

CipherCorpus make_cipher_corpus(int vocab, int n_sentences, int min_len,
                                int max_len, double zipf_s, uint64_t seed,
                                int topics, double topic_peak) {
  CipherCorpus c;
  char buf[32];
  for (int i = 0; i < vocab; ++i) {
    std::snprintf(buf, sizeof(buf), "w%03d", i);
    c.l1_words.emplace_back(buf);
    std::snprintf(buf, sizeof(buf), "x%03d", i);
    c.l2_words.emplace_back(buf);
  }

  std::vector<double> zipf(vocab);
  double z = 0.0;
  for (int i = 0; i < vocab; ++i) {
    zipf[i] = 1.0 / std::pow(double(i + 1), zipf_s);
    z += zipf[i];
  }
  for (double& p : zipf) p /= z;

  bisent2vec::Rng rng(seed);

  // Per-word topic profiles, peaked by raising uniforms to topic_peak.
  std::vector<std::vector<double>> theta(vocab, std::vector<double>(topics));
  for (int i = 0; i < vocab; ++i) {
    double tz = 0.0;
    for (int k = 0; k < topics; ++k) {
      theta[i][k] = std::pow(rng.uniform01(), topic_peak);
      tz += theta[i][k];
    }
    for (int k = 0; k < topics; ++k) theta[i][k] /= tz;
  }

  // Per-topic sampling cdf over zipf-weight * profile-weight.
  std::vector<std::vector<double>> cdf(topics, std::vector<double>(vocab));
  for (int k = 0; k < topics; ++k) {
    double acc = 0.0;
    for (int i = 0; i < vocab; ++i) {
      acc += zipf[i] * theta[i][k];
      cdf[k][i] = acc;
    }
    for (int i = 0; i < vocab; ++i) cdf[k][i] /= acc;
  }

  c.sentences.reserve(n_sentences);
  for (int s = 0; s < n_sentences; ++s) {
    int len = min_len + int(rng.uniform_below(uint64_t(max_len - min_len + 1)));
    int topic = int(rng.uniform_below(uint64_t(topics)));
    std::vector<int> sent(len);
    for (int& tok : sent) {
      double u = rng.uniform01();
      tok = int(std::lower_bound(cdf[topic].begin(), cdf[topic].end(), u) -
                cdf[topic].begin());
      if (tok >= vocab) tok = vocab - 1;
    }
    c.sentences.push_back(std::move(sent));
  }
  return c;
}

std::string make_topic_docs(const CipherCorpus& corpus, bool l2_side,
                            int n_classes, int docs_per_class, uint64_t seed) {
  const auto& words = l2_side ? corpus.l2_words : corpus.l1_words;
  const int vocab = static_cast<int>(words.size());
  std::vector<std::vector<int>> pools(n_classes);
  for (int i = 0; i < vocab; ++i) pools[i % n_classes].push_back(i);

  bisent2vec::Rng rng(seed);
  std::ostringstream out;
  for (int c = 0; c < n_classes; ++c) {
    for (int d = 0; d < docs_per_class; ++d) {
      out << c << "\n";
      int n_sents = 3 + int(rng.uniform_below(6));  // 3..8 sentences
      for (int s = 0; s < n_sents; ++s) {
        int n_words = 4 + int(rng.uniform_below(7));  // 4..10 tokens
        for (int w = 0; w < n_words; ++w) {
          if (w) out << ' ';
          out << words[pools[c][rng.uniform_below(pools[c].size())]];
        }
        out << "\n";
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace testsupport
