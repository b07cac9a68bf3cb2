#include "lstmabc/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lstmabc::emb {

Vocabulary buildVocab(const std::vector<corpus::Sentence>& sentences, std::size_t minCount) {
  if (minCount == 0) throw ArgumentError("buildVocab: minCount must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& s : sentences)
    for (const auto& w : s) ++counts[w];
  std::vector<std::pair<std::string, std::size_t>> retained;
  for (const auto& [w, c] : counts)
    if (c >= minCount) retained.emplace_back(w, c);
  if (retained.empty()) throw ArgumentError("buildVocab: empty vocabulary after filtering");
  std::sort(retained.begin(), retained.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  v.words.reserve(retained.size());
  v.counts.reserve(retained.size());
  for (std::size_t id = 0; id < retained.size(); ++id) {
    v.ids.emplace(retained[id].first, id);
    v.words.push_back(retained[id].first);
    v.counts.push_back(retained[id].second);
  }
  return v;
}

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

// Cumulative unigram^(3/4) table for noise sampling.
std::vector<double> noiseCumulative(const Vocabulary& vocab) {
  std::vector<double> cum(vocab.size());
  double total = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    total += std::pow(static_cast<double>(vocab.counts[i]), 0.75);
    cum[i] = total;
  }
  return cum;
}

std::size_t sampleNoise(const std::vector<double>& cum, num::Rng& rng) {
  const double u = rng.u01() * cum.back();
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cum.begin(),
                                                           static_cast<std::ptrdiff_t>(cum.size()) - 1));
}

}  // namespace

EmbeddingTable trainSkipGram(const std::vector<corpus::Sentence>& sentences,
                             const Vocabulary& vocab, const SkipGramConfig& cfg, num::Rng& rng,
                             std::vector<double>* epochLoss) {
  if (vocab.size() == 0) throw ArgumentError("trainSkipGram: empty vocabulary");
  if (cfg.dim == 0) throw ArgumentError("trainSkipGram: dim must be >= 1");
  if (cfg.window == 0) throw ArgumentError("trainSkipGram: window must be >= 1");
  if (cfg.negatives == 0) throw ArgumentError("trainSkipGram: negatives must be >= 1");

  const std::size_t V = vocab.size();
  const std::size_t D = cfg.dim;
  std::vector<num::Vec> vin(V, num::Vec(D));
  std::vector<num::Vec> vout(V, num::Vec(D, 0.0));
  const double bound = 0.5 / static_cast<double>(D);
  for (auto& row : vin)
    for (auto& x : row) x = rng.uniform(-bound, bound);

  const auto cum = noiseCumulative(vocab);

  // token id sequences with OOV dropped, built once
  std::vector<std::vector<std::size_t>> idSeqs;
  idSeqs.reserve(sentences.size());
  for (const auto& s : sentences) {
    std::vector<std::size_t> ids;
    ids.reserve(s.size());
    for (const auto& w : s) {
      const auto id = vocab.idOf(w);
      if (id >= 0) ids.push_back(static_cast<std::size_t>(id));
    }
    if (!ids.empty()) idSeqs.push_back(std::move(ids));
  }

  num::Vec acc(D);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lossSum = 0.0;
    std::size_t lossCount = 0;
    for (const auto& ids : idSeqs) {
      const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(ids.size());
      for (std::ptrdiff_t t = 0; t < len; ++t) {
        const std::size_t center = ids[static_cast<std::size_t>(t)];
        for (std::ptrdiff_t off = -static_cast<std::ptrdiff_t>(cfg.window);
             off <= static_cast<std::ptrdiff_t>(cfg.window); ++off) {
          if (off == 0) continue;
          const std::ptrdiff_t pos = t + off;
          if (pos < 0 || pos >= len) continue;
          const std::size_t context = ids[static_cast<std::size_t>(pos)];
          std::fill(acc.begin(), acc.end(), 0.0);
          double pairLoss = 0.0;
          // positive target
          {
            const double s = num::dot(vin[center], vout[context]);
            pairLoss += softplus(-s);
            const double g = cfg.learningRate * (1.0 - num::sigmoid(s));
            num::axpy(acc, g, vout[context]);
            num::axpy(vout[context], g, vin[center]);
          }
          // noise targets; a draw colliding with the context word is skipped
          for (std::size_t nIdx = 0; nIdx < cfg.negatives; ++nIdx) {
            const std::size_t target = sampleNoise(cum, rng);
            if (target == context) continue;
            const double s = num::dot(vin[center], vout[target]);
            pairLoss += softplus(s);
            const double g = cfg.learningRate * (0.0 - num::sigmoid(s));
            num::axpy(acc, g, vout[target]);
            num::axpy(vout[target], g, vin[center]);
          }
          num::addInto(vin[center], acc);
          lossSum += pairLoss;
          ++lossCount;
        }
      }
    }
    if (epochLoss) epochLoss->push_back(lossCount ? lossSum / static_cast<double>(lossCount) : 0.0);
  }

  EmbeddingTable table;
  table.vocab = vocab;
  table.dim = D;
  table.vectors = std::move(vin);
  return table;
}

std::vector<num::Vec> lookup(const EmbeddingTable& table, const corpus::Sentence& sentence) {
  std::vector<num::Vec> out;
  out.reserve(sentence.size());
  for (const auto& w : sentence) {
    const auto id = table.vocab.idOf(w);
    if (id >= 0)
      out.push_back(table.vectors[static_cast<std::size_t>(id)]);
    else
      out.push_back(num::Vec(table.dim, 0.0));
  }
  return out;
}

double cosine(const num::Vec& a, const num::Vec& b) {
  const double na = std::sqrt(num::dot(a, a));
  const double nb = std::sqrt(num::dot(b, b));
  if (na == 0.0 || nb == 0.0) throw ArgumentError("cosine: zero-norm vector");
  return num::dot(a, b) / (na * nb);
}

void saveEmbeddings(const EmbeddingTable& table, const std::string& path,
                    const std::vector<std::string>& headerComments) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embedding file: " + path);
  for (const auto& c : headerComments) out << "# " << c << '\n';
  out << table.vocab.size() << ' ' << table.dim << '\n';
  for (std::size_t id = 0; id < table.vocab.size(); ++id) {
    out << table.vocab.words[id];
    for (double x : table.vectors[id]) out << ' ' << fmtG17(x);
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

EmbeddingTable loadEmbeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);
  std::string line;
  std::size_t lineNo = 0;
  // skip leading comments
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line[0] != '#') break;
  }
  std::istringstream header(line);
  std::size_t vocabSize = 0, dim = 0;
  if (!(header >> vocabSize >> dim) || dim == 0)
    throw DataError("embedding file " + path + ": bad header line " + std::to_string(lineNo));
  EmbeddingTable table;
  table.dim = dim;
  for (std::size_t id = 0; id < vocabSize; ++id) {
    if (!std::getline(in, line))
      throw DataError("embedding file " + path + ": expected " + std::to_string(vocabSize) +
                      " rows, got " + std::to_string(id));
    ++lineNo;
    std::istringstream row(line);
    std::string word;
    if (!(row >> word))
      throw DataError("embedding file " + path + ": empty row at line " + std::to_string(lineNo));
    if (table.vocab.ids.count(word))
      throw DataError("embedding file " + path + ": duplicate word '" + word + "'");
    num::Vec v;
    v.reserve(dim);
    double x;
    while (row >> x) v.push_back(x);
    if (v.size() != dim)
      throw DataError("embedding file " + path + ": row for '" + word + "' has " +
                      std::to_string(v.size()) + " values, header says " + std::to_string(dim));
    table.vocab.ids.emplace(word, id);
    table.vocab.words.push_back(word);
    table.vocab.counts.push_back(0);  // counts are not persisted
    table.vectors.push_back(std::move(v));
  }
  return table;
}

EmbeddedPair embedPair(const EmbeddingTable& table, const corpus::SentencePair& pair,
                       std::ptrdiff_t sourceIndex) {
  EmbeddedPair e;
  e.first = lookup(table, pair.first);
  e.second = lookup(table, pair.second);
  e.label = pair.label;
  e.augmented = pair.origin == corpus::Origin::augmented;
  e.sourceIndex = sourceIndex;
  return e;
}

std::vector<EmbeddedPair> embedDataset(const EmbeddingTable& table, const corpus::Dataset& ds) {
  std::vector<EmbeddedPair> out;
  out.reserve(ds.pairs.size());
  for (std::size_t i = 0; i < ds.pairs.size(); ++i)
    out.push_back(embedPair(table, ds.pairs[i], static_cast<std::ptrdiff_t>(i)));
  return out;
}

std::vector<EmbeddedPair> augmentPositives(const corpus::Dataset& ds, const EmbeddingTable& table,
                                           std::size_t copies, double sigma, num::Rng& rng) {
  if (sigma < 0.0) throw ArgumentError("augmentPositives: negative sigma");
  if (copies == 0) return {};
  bool anyPositive = false;
  for (const auto& p : ds.pairs)
    if (p.label >= 0.5) {
      anyPositive = true;
      break;
    }
  if (!anyPositive) throw ArgumentError("augmentPositives: dataset has no positive pair");

  std::vector<EmbeddedPair> out;
  for (std::size_t idx = 0; idx < ds.pairs.size(); ++idx) {
    const auto& p = ds.pairs[idx];
    if (p.label < 0.5) continue;
    for (std::size_t c = 0; c < copies; ++c) {
      EmbeddedPair e = embedPair(table, p, static_cast<std::ptrdiff_t>(idx));
      e.augmented = true;
      if (sigma > 0.0) {
        for (auto& vec : e.first)
          for (auto& x : vec) x += rng.gaussian(0.0, sigma);
        for (auto& vec : e.second)
          for (auto& x : vec) x += rng.gaussian(0.0, sigma);
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace lstmabc::emb
