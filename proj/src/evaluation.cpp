#include "lstmabc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lstmabc/parallel.hpp"

namespace lstmabc::eval {

PairClass classify(double similarity, Threshold threshold) {
  if (!(threshold.epsilon > 0.0 && threshold.epsilon < 1.0))
    throw ArgumentError("classify: epsilon must lie strictly in (0,1)");
  return similarity >= threshold.epsilon ? PairClass::copy : PairClass::notCopy;
}

double recallPercent(const std::vector<PairClass>& predicted,
                     const std::vector<PairClass>& actual) {
  if (predicted.size() != actual.size()) throw ArgumentError("recall: length mismatch");
  std::size_t tp = 0, fn = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] != PairClass::copy) continue;
    if (predicted[i] == PairClass::copy)
      ++tp;
    else
      ++fn;
  }
  if (tp + fn == 0) throw ArgumentError("recall undefined: no actual positives");
  return 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double pearson(const num::Vec& a, const num::Vec& b) {
  if (a.size() != b.size()) throw ArgumentError("pearson: length mismatch");
  if (a.size() < 2) throw ArgumentError("pearson: need at least 2 samples");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw ArgumentError("pearson undefined: zero variance");
  return sab / std::sqrt(saa * sbb);
}

double mse(const num::Vec& a, const num::Vec& b) {
  if (a.size() != b.size()) throw ArgumentError("mse: length mismatch");
  if (a.empty()) throw ArgumentError("mse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

Aggregate aggregate(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("aggregate: no values");
  Aggregate agg;
  const double n = static_cast<double>(values.size());
  for (double v : values) agg.mean += v;
  agg.mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - agg.mean) * (v - agg.mean);
  agg.stddev = std::sqrt(var / n);
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  agg.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return agg;
}

MetricsReport makeReport(std::vector<FoldMetrics> folds) {
  MetricsReport report;
  std::vector<double> r, m, p;
  for (const auto& f : folds) {
    r.push_back(f.recall);
    m.push_back(f.mse);
    p.push_back(f.pearson);
  }
  report.folds = std::move(folds);
  report.recall = aggregate(r);
  report.mse = aggregate(m);
  report.pearson = aggregate(p);
  return report;
}

FoldMetrics evaluatePairs(const model::ModelParams& params,
                          const std::vector<emb::EmbeddedPair>& pairs, Threshold threshold) {
  if (pairs.empty()) throw ArgumentError("evaluatePairs: no pairs");
  num::Vec predictions(pairs.size()), labels(pairs.size());
  std::vector<PairClass> predClass(pairs.size()), actualClass(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    predictions[i] = model::similarityForward(params, pairs[i].first, pairs[i].second);
    labels[i] = pairs[i].label;
    predClass[i] = classify(predictions[i], threshold);
    actualClass[i] = pairs[i].label >= 0.5 ? PairClass::copy : PairClass::notCopy;
  }
  FoldMetrics metrics;
  metrics.recall = recallPercent(predClass, actualClass);
  metrics.mse = mse(predictions, labels);
  metrics.pearson = pearson(predictions, labels);
  return metrics;
}

namespace {

// Derivation streams for the per-run randomness.
enum Stream : std::uint64_t {
  foldSplitStream = 0,
  embedStream = 1,
  augmentStream = 2,
  subsampleStream = 3,
  initStream = 4,
  trainStream = 5,
  foldBase = 100,
};

std::size_t resolveAugmentCopies(const PipelineConfig& cfg, std::size_t positives,
                                 std::size_t negatives) {
  if (cfg.augmentCopies >= 0) return static_cast<std::size_t>(cfg.augmentCopies);
  if (positives == 0 || negatives <= positives) return 0;
  // equalize class counts: positives * (1 + copies) ~= negatives
  const double copies = std::round(static_cast<double>(negatives) / static_cast<double>(positives)) - 1.0;
  return copies < 0.0 ? 0 : static_cast<std::size_t>(copies);
}

std::vector<emb::EmbeddedPair> subsample(const std::vector<emb::EmbeddedPair>& set,
                                         std::size_t target, num::Rng& rng) {
  if (target == 0 || target >= set.size()) return set;
  std::vector<std::size_t> idx(set.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < target; ++i)
    std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
  idx.resize(target);
  std::sort(idx.begin(), idx.end());
  std::vector<emb::EmbeddedPair> out;
  out.reserve(target);
  for (auto i : idx) out.push_back(set[i]);
  return out;
}

}  // namespace

TrainOutputs trainOnDataset(const corpus::Dataset& ds, const emb::EmbeddingTable& table,
                            const PipelineConfig& cfg, std::uint64_t seed) {
  model::ArchConfig arch = cfg.arch;
  arch.embeddingDim = table.dim;

  std::vector<emb::EmbeddedPair> training = emb::embedDataset(table, ds);
  std::size_t positives = 0;
  for (const auto& p : training)
    if (p.label >= 0.5) ++positives;
  const std::size_t negatives = training.size() - positives;

  const std::size_t copies = resolveAugmentCopies(cfg, positives, negatives);
  if (copies > 0 && positives > 0) {
    num::Rng augmentRng(num::Rng::derive(seed, augmentStream));
    auto augmented = emb::augmentPositives(ds, table, copies, cfg.augmentSigma, augmentRng);
    training.insert(training.end(), std::make_move_iterator(augmented.begin()),
                    std::make_move_iterator(augmented.end()));
  }

  TrainOutputs out;
  out.arch = arch;

  model::ModelParams initial = model::zeroModel(arch);
  if (cfg.init == InitMode::abc) {
    num::Rng subsampleRng(num::Rng::derive(seed, subsampleStream));
    const auto fitnessSet = subsample(training, cfg.fitnessSubsample, subsampleRng);
    abc::AbcConfig abcCfg = cfg.abcCfg;
    abcCfg.dimension = model::paramCount(arch);
    abcCfg.seed = num::Rng::derive(seed, initStream);
    abcCfg.threads = cfg.abcThreads;
    abc::AbcResult abcResult;
    initial = abc::seedModel(abcCfg, arch, fitnessSet, &abcResult);
    out.abcResult = std::move(abcResult);
  } else {
    num::Rng initRng(num::Rng::derive(seed, initStream));
    initial = model::initRandom(arch, cfg.initScale, initRng);
  }

  train::TrainConfig trainCfg = cfg.trainCfg;
  trainCfg.seed = num::Rng::derive(seed, trainStream);
  train::TrainResult trained =
      cfg.trainer == train::TrainerKind::gdm
          ? train::trainGdm(initial, arch, training, cfg.loss, trainCfg)
          : train::trainGda(initial, arch, training, cfg.loss, trainCfg);
  out.params = std::move(trained.params);
  out.history = std::move(trained.history);
  return out;
}

namespace {

FoldMetrics runFold(const corpus::Dataset& ds, const corpus::FoldSplit& split, std::size_t fold,
                    const PipelineConfig& cfg, std::uint64_t masterSeed) {
  const std::uint64_t foldSeed = num::Rng::derive(masterSeed, foldBase + fold);

  corpus::Dataset trainDs;
  trainDs.name = ds.name;
  std::vector<std::size_t> testIdx;
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    if (split.assignment[i] == fold)
      testIdx.push_back(i);
    else
      trainDs.pairs.push_back(ds.pairs[i]);
  }
  if (trainDs.pairs.empty() || testIdx.empty())
    throw ArgumentError("empty train or test portion");

  // fold-local embeddings, trained on the training portion only
  std::vector<corpus::Sentence> sentences;
  sentences.reserve(2 * trainDs.pairs.size());
  for (const auto& p : trainDs.pairs) {
    sentences.push_back(p.first);
    sentences.push_back(p.second);
  }
  const auto vocab = emb::buildVocab(sentences, cfg.minCount);
  num::Rng embedRng(num::Rng::derive(foldSeed, embedStream));
  const auto table = emb::trainSkipGram(sentences, vocab, cfg.embed, embedRng);

  PipelineConfig foldCfg = cfg;
  foldCfg.abcThreads = 1;  // folds parallelize above this level
  const TrainOutputs trained = trainOnDataset(trainDs, table, foldCfg, foldSeed);

  std::vector<emb::EmbeddedPair> testSet;
  testSet.reserve(testIdx.size());
  for (auto i : testIdx)
    testSet.push_back(emb::embedPair(table, ds.pairs[i], static_cast<std::ptrdiff_t>(i)));
  return evaluatePairs(trained.params, testSet, cfg.threshold);
}

}  // namespace

MetricsReport crossValidateWithSplit(const corpus::Dataset& ds, const PipelineConfig& cfg,
                                     const corpus::FoldSplit& split, std::uint64_t masterSeed) {
  const std::size_t k = split.k;
  std::vector<FoldMetrics> folds(k);
  std::vector<std::string> errors(k);
  std::vector<bool> failed(k, false);
  parallelFor(k, cfg.threads, [&](std::size_t f) {
    try {
      folds[f] = runFold(ds, split, f, cfg, masterSeed);
    } catch (const std::exception& e) {
      failed[f] = true;
      errors[f] = e.what();
    }
  });
  for (std::size_t f = 0; f < k; ++f)
    if (failed[f]) throw DataError("fold " + std::to_string(f) + ": " + errors[f]);
  return makeReport(std::move(folds));
}

MetricsReport crossValidate(const corpus::Dataset& ds, const PipelineConfig& cfg, std::size_t k,
                            std::uint64_t masterSeed) {
  num::Rng splitRng(num::Rng::derive(masterSeed, foldSplitStream));
  const auto split = corpus::kfoldSplit(ds, k, splitRng);
  return crossValidateWithSplit(ds, cfg, split, masterSeed);
}

CompareResult compare(const corpus::Dataset& ds, const PipelineConfig& cfg, std::size_t k,
                      const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ArgumentError("compare: need at least one master seed");
  CompareResult result;
  result.seeds = seeds;
  for (const auto seed : seeds) {
    num::Rng splitRng(num::Rng::derive(seed, foldSplitStream));
    const auto split = corpus::kfoldSplit(ds, k, splitRng);
    PipelineConfig abcCfg = cfg;
    abcCfg.init = InitMode::abc;
    PipelineConfig randomCfg = cfg;
    randomCfg.init = InitMode::random;
    result.abcArm.push_back(crossValidateWithSplit(ds, abcCfg, split, seed));
    result.randomArm.push_back(crossValidateWithSplit(ds, randomCfg, split, seed));
  }
  return result;
}

namespace {

void writeMetricRow(std::ofstream& out, const std::string& name, const Aggregate& agg) {
  out << name << '\t' << fmtG12(agg.mean) << '\t' << fmtG12(agg.stddev) << '\t'
      << fmtG12(agg.median) << '\n';
}

}  // namespace

void writeReport(const MetricsReport& report, const std::string& datasetName,
                 const std::string& mode, const std::string& path,
                 const std::vector<std::string>& headerComments) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report file: " + path);
  for (const auto& c : headerComments) out << "# " << c << '\n';
  out << "dataset\t" << datasetName << '\n';
  out << "mode\t" << mode << '\n';
  out << "folds\t" << report.folds.size() << '\n';
  writeMetricRow(out, "recall", report.recall);
  writeMetricRow(out, "mse", report.mse);
  writeMetricRow(out, "pearson", report.pearson);
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    out << "fold\t" << f << "\trecall\t" << fmtG12(report.folds[f].recall) << '\n';
    out << "fold\t" << f << "\tmse\t" << fmtG12(report.folds[f].mse) << '\n';
    out << "fold\t" << f << "\tpearson\t" << fmtG12(report.folds[f].pearson) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

namespace {

char diffSign(double d) { return d > 0.0 ? '+' : (d < 0.0 ? '-' : '0'); }

std::vector<double> collectAll(const std::vector<MetricsReport>& arm,
                               double FoldMetrics::*field) {
  std::vector<double> values;
  for (const auto& report : arm)
    for (const auto& fold : report.folds) values.push_back(fold.*field);
  return values;
}

}  // namespace

void writeCompareReport(const CompareResult& result, const std::string& datasetName,
                        std::size_t k, const std::string& path,
                        const std::vector<std::string>& headerComments) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write compare report: " + path);
  for (const auto& c : headerComments) out << "# " << c << '\n';
  out << "dataset\t" << datasetName << '\n';
  out << "folds\t" << k << '\n';
  out << "seeds";
  for (auto s : result.seeds) out << '\t' << s;
  out << '\n';
  out << "folds_identical\ttrue\n";  // both arms share one split per seed by construction

  const struct {
    const char* name;
    double FoldMetrics::*field;
  } metrics[] = {{"recall", &FoldMetrics::recall},
                 {"mse", &FoldMetrics::mse},
                 {"pearson", &FoldMetrics::pearson}};

  for (const auto& m : metrics) {
    const Aggregate abcAgg = aggregate(collectAll(result.abcArm, m.field));
    const Aggregate randomAgg = aggregate(collectAll(result.randomArm, m.field));
    out << "arm\tabc\t" << m.name << '\t' << fmtG12(abcAgg.mean) << '\t' << fmtG12(abcAgg.stddev)
        << '\t' << fmtG12(abcAgg.median) << '\n';
    out << "arm\trandom\t" << m.name << '\t' << fmtG12(randomAgg.mean) << '\t'
        << fmtG12(randomAgg.stddev) << '\t' << fmtG12(randomAgg.median) << '\n';
    out << "diff\t" << m.name << '\t' << fmtG12(abcAgg.mean - randomAgg.mean) << '\t'
        << diffSign(abcAgg.mean - randomAgg.mean) << '\n';
  }

  for (std::size_t s = 0; s < result.seeds.size(); ++s) {
    for (const auto& m : metrics) {
      std::vector<double> abcVals, randomVals;
      for (const auto& fold : result.abcArm[s].folds) abcVals.push_back(fold.*m.field);
      for (const auto& fold : result.randomArm[s].folds) randomVals.push_back(fold.*m.field);
      const double abcMean = aggregate(abcVals).mean;
      const double randomMean = aggregate(randomVals).mean;
      out << "seed\t" << result.seeds[s] << '\t' << m.name << "\tabc\t" << fmtG12(abcMean)
          << "\trandom\t" << fmtG12(randomMean) << "\tsign\t" << diffSign(abcMean - randomMean)
          << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace lstmabc::eval
