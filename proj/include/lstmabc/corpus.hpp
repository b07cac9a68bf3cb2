#pragma once

#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "lstmabc/numerics.hpp"

namespace lstmabc::corpus {

using Sentence = std::vector<std::string>;

enum class Origin { natural, augmented };

struct SentencePair {
  Sentence first;
  Sentence second;
  double label = 0.0;  // in [0,1]; 1 = copy, 0 = unrelated
  Origin origin = Origin::natural;

  bool operator==(const SentencePair& o) const {
    return first == o.first && second == o.second && label == o.label && origin == o.origin;
  }
};

struct Dataset {
  std::string name;
  std::vector<SentencePair> pairs;
};

// k-fold partition: every pair index belongs to exactly one fold and fold
// sizes differ by at most one.
struct FoldSplit {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;  // pair index -> fold index

  std::vector<std::vector<std::size_t>> folds() const;
};

std::string porterStem(std::string word);

// One lowercase word per line; blank lines ignored.
std::unordered_set<std::string> loadStopWords(const std::string& path);

// Lowercase, strip punctuation, tokenize, drop stop words, stem, truncate to
// maxLen tokens. Throws EmptySentenceError when nothing survives.
Sentence preprocess(const std::string& rawText, const std::unordered_set<std::string>& stopWords,
                    std::size_t maxLen);
// Same pipeline applied to an already-tokenized sentence.
Sentence preprocessTokens(const Sentence& tokens, const std::unordered_set<std::string>& stopWords,
                          std::size_t maxLen);

// `count` label-0 pairs whose members are distinct sentences from the list.
std::vector<SentencePair> makeNegativePairs(const std::vector<Sentence>& sentences,
                                            std::size_t count, num::Rng& rng);

FoldSplit kfoldSplit(const Dataset& dataset, std::size_t k, num::Rng& rng);

struct SyntheticConfig {
  std::size_t templates = 20;
  std::size_t copiesPerTemplate = 3;
  std::size_t vocabSize = 50;
  double noiseRate = 0.15;       // per-token resample probability in positives
  std::size_t negativeRatio = 3; // negatives = ratio * positives
  std::size_t minLen = 3;
  std::size_t maxLen = 10;
};

// Template sentences over a synthetic vocabulary; positives pair a template
// with a word-perturbed copy, negatives pair distinct templates.
Dataset generateSynthetic(const SyntheticConfig& cfg, num::Rng& rng);

// One pair per line: sentence1<TAB>sentence2<TAB>label. Lines starting '#'
// are comments. Sentences are whitespace-separated lowercase tokens.
Dataset loadDataset(const std::string& path);
void saveDataset(const Dataset& dataset, const std::string& path,
                 const std::vector<std::string>& headerComments = {});

}  // namespace lstmabc::corpus
