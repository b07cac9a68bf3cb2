#include "lstmabc/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lstmabc::corpus {

std::vector<std::vector<std::size_t>> FoldSplit::folds() const {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
  return out;
}

std::unordered_set<std::string> loadStopWords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stop-word file: " + path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::string w;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c)))
        w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!w.empty()) words.insert(w);
  }
  return words;
}

Sentence preprocess(const std::string& rawText, const std::unordered_set<std::string>& stopWords,
                    std::size_t maxLen) {
  std::string normalized;
  normalized.reserve(rawText.size());
  for (char ch : rawText) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c))
      normalized += static_cast<char>(std::tolower(c));
    else
      normalized += ' ';
  }
  Sentence out;
  std::istringstream ss(normalized);
  std::string tok;
  while (ss >> tok) {
    if (stopWords.count(tok)) continue;
    out.push_back(porterStem(tok));
    if (out.size() == maxLen) break;
  }
  if (out.empty()) throw EmptySentenceError("preprocess: no tokens left after filtering");
  return out;
}

Sentence preprocessTokens(const Sentence& tokens, const std::unordered_set<std::string>& stopWords,
                          std::size_t maxLen) {
  std::string joined;
  for (const auto& t : tokens) {
    if (!joined.empty()) joined += ' ';
    joined += t;
  }
  return preprocess(joined, stopWords, maxLen);
}

std::vector<SentencePair> makeNegativePairs(const std::vector<Sentence>& sentences,
                                            std::size_t count, num::Rng& rng) {
  bool distinctFound = false;
  for (std::size_t i = 1; i < sentences.size(); ++i)
    if (sentences[i] != sentences[0]) {
      distinctFound = true;
      break;
    }
  if (!distinctFound)
    throw ArgumentError("makeNegativePairs: need at least 2 distinct sentences");
  std::vector<SentencePair> out;
  out.reserve(count);
  while (out.size() < count) {
    const std::size_t i = rng.index(sentences.size());
    const std::size_t j = rng.index(sentences.size());
    if (sentences[i] == sentences[j]) continue;
    out.push_back({sentences[i], sentences[j], 0.0, Origin::natural});
  }
  return out;
}

FoldSplit kfoldSplit(const Dataset& dataset, std::size_t k, num::Rng& rng) {
  const std::size_t n = dataset.pairs.size();
  if (k < 2) throw ArgumentError("kfoldSplit: k must be >= 2");
  if (k > n) throw ArgumentError("kfoldSplit: k exceeds dataset size");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i-- > 1;) std::swap(perm[i], perm[rng.index(i + 1)]);
  FoldSplit split;
  split.k = k;
  split.assignment.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) split.assignment[perm[pos]] = pos % k;
  return split;
}

Dataset generateSynthetic(const SyntheticConfig& cfg, num::Rng& rng) {
  if (cfg.templates == 0 || cfg.copiesPerTemplate == 0)
    throw ArgumentError("generateSynthetic: counts must be positive");
  if (cfg.vocabSize < 2) throw ArgumentError("generateSynthetic: vocabSize must be >= 2");
  if (cfg.noiseRate < 0.0 || cfg.noiseRate > 1.0)
    throw ArgumentError("generateSynthetic: noiseRate outside [0,1]");
  if (cfg.negativeRatio > 0 && cfg.templates < 2)
    throw ArgumentError("generateSynthetic: negatives need >= 2 templates");
  if (cfg.minLen == 0 || cfg.minLen > cfg.maxLen)
    throw ArgumentError("generateSynthetic: bad sentence length bounds");

  std::vector<std::string> vocab(cfg.vocabSize);
  for (std::size_t i = 0; i < cfg.vocabSize; ++i) vocab[i] = "w" + std::to_string(i);

  std::vector<Sentence> templates(cfg.templates);
  for (auto& t : templates) {
    const std::size_t len = cfg.minLen + rng.index(cfg.maxLen - cfg.minLen + 1);
    t.resize(len);
    for (auto& tok : t) tok = vocab[rng.index(cfg.vocabSize)];
  }

  Dataset ds;
  ds.name = "synthetic";
  for (const auto& t : templates) {
    for (std::size_t c = 0; c < cfg.copiesPerTemplate; ++c) {
      Sentence copy = t;
      for (auto& tok : copy)
        if (rng.u01() < cfg.noiseRate) tok = vocab[rng.index(cfg.vocabSize)];
      ds.pairs.push_back({t, copy, 1.0, Origin::natural});
    }
  }
  const std::size_t negatives = cfg.negativeRatio * ds.pairs.size();
  std::size_t made = 0;
  while (made < negatives) {
    const std::size_t i = rng.index(cfg.templates);
    const std::size_t j = rng.index(cfg.templates);
    if (i == j || templates[i] == templates[j]) continue;
    ds.pairs.push_back({templates[i], templates[j], 0.0, Origin::natural});
    ++made;
  }
  return ds;
}

namespace {

Sentence parseSentenceField(const std::string& field, std::size_t lineNo) {
  Sentence s;
  std::istringstream ss(field);
  std::string tok;
  while (ss >> tok) {
    for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    s.push_back(tok);
  }
  if (s.empty())
    throw DataError("dataset line " + std::to_string(lineNo) + ": empty sentence field");
  return s;
}

}  // namespace

Dataset loadDataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  Dataset ds;
  ds.name = path;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (fields.size() != 3)
      throw DataError("dataset line " + std::to_string(lineNo) + ": expected 3 tab-separated fields, got " +
                      std::to_string(fields.size()));
    SentencePair pair;
    pair.first = parseSentenceField(fields[0], lineNo);
    pair.second = parseSentenceField(fields[1], lineNo);
    char* end = nullptr;
    const std::string& labelField = fields[2];
    pair.label = std::strtod(labelField.c_str(), &end);
    if (end == labelField.c_str() || *end != '\0' || !std::isfinite(pair.label))
      throw DataError("dataset line " + std::to_string(lineNo) + ": bad label '" + labelField + "'");
    if (pair.label < 0.0 || pair.label > 1.0)
      throw DataError("dataset line " + std::to_string(lineNo) + ": label " + labelField +
                      " outside [0,1]");
    ds.pairs.push_back(std::move(pair));
  }
  if (ds.pairs.empty()) throw DataError("dataset file has no pairs: " + path);
  return ds;
}

void saveDataset(const Dataset& dataset, const std::string& path,
                 const std::vector<std::string>& headerComments) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file: " + path);
  for (const auto& c : headerComments) out << "# " << c << '\n';
  for (const auto& p : dataset.pairs) {
    for (std::size_t i = 0; i < p.first.size(); ++i) out << (i ? " " : "") << p.first[i];
    out << '\t';
    for (std::size_t i = 0; i < p.second.size(); ++i) out << (i ? " " : "") << p.second[i];
    out << '\t' << fmtG17(p.label) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace lstmabc::corpus
