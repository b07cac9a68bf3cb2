#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "lstmabc/corpus.hpp"
#include "lstmabc/numerics.hpp"

namespace lstmabc::emb {

struct Vocabulary {
  std::unordered_map<std::string, std::size_t> ids;  // word -> dense id
  std::vector<std::string> words;                    // id -> word
  std::vector<std::size_t> counts;                   // id -> occurrence count

  std::size_t size() const { return words.size(); }
  // -1 when the word is out of vocabulary.
  std::ptrdiff_t idOf(const std::string& w) const {
    auto it = ids.find(w);
    return it == ids.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
  }
};

// Words with count >= minCount, ids ordered by descending count then word.
Vocabulary buildVocab(const std::vector<corpus::Sentence>& sentences, std::size_t minCount);

struct EmbeddingTable {
  Vocabulary vocab;
  std::size_t dim = 0;
  std::vector<num::Vec> vectors;  // id -> vector of length dim
};

struct SkipGramConfig {
  std::size_t dim = 16;
  std::size_t window = 2;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learningRate = 0.025;
};

// Skip-gram with negative sampling; noise words follow the unigram^(3/4)
// distribution. Returns input-side vectors. epochLoss, when given, receives
// the mean per-(center,context) objective of each epoch.
EmbeddingTable trainSkipGram(const std::vector<corpus::Sentence>& sentences,
                             const Vocabulary& vocab, const SkipGramConfig& cfg, num::Rng& rng,
                             std::vector<double>* epochLoss = nullptr);

// One vector per token; out-of-vocabulary tokens map to all zeros.
std::vector<num::Vec> lookup(const EmbeddingTable& table, const corpus::Sentence& sentence);

double cosine(const num::Vec& a, const num::Vec& b);

// Text format: first non-comment line `<vocabSize> <dim>`, then one
// `word v1 ... vdim` line per id. Round-trips at full precision.
void saveEmbeddings(const EmbeddingTable& table, const std::string& path,
                    const std::vector<std::string>& headerComments = {});
EmbeddingTable loadEmbeddings(const std::string& path);

// A sentence pair in embedded form; augmented pairs carry their vectors
// directly and have no surface tokens.
struct EmbeddedPair {
  std::vector<num::Vec> first;
  std::vector<num::Vec> second;
  double label = 0.0;
  bool augmented = false;
  std::ptrdiff_t sourceIndex = -1;  // index of the originating dataset pair
};

EmbeddedPair embedPair(const EmbeddingTable& table, const corpus::SentencePair& pair,
                       std::ptrdiff_t sourceIndex = -1);
std::vector<EmbeddedPair> embedDataset(const EmbeddingTable& table, const corpus::Dataset& ds);

// `copies` noisy clones of every positive pair (label >= 0.5): per-component
// i.i.d. N(0, sigma^2) added to each word vector. sigma == 0 copies the
// source embeddings bitwise.
std::vector<EmbeddedPair> augmentPositives(const corpus::Dataset& ds, const EmbeddingTable& table,
                                           std::size_t copies, double sigma, num::Rng& rng);

}  // namespace lstmabc::emb
