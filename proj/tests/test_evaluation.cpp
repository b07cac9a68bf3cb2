#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lstmabc/evaluation.hpp"

using namespace lstmabc;
using namespace lstmabc::eval;
using num::Vec;

namespace {

corpus::Dataset smallSynthetic(std::uint64_t seed, std::size_t templates = 8,
                               std::size_t copies = 2) {
  corpus::SyntheticConfig cfg;
  cfg.templates = templates;
  cfg.copiesPerTemplate = copies;
  cfg.vocabSize = 25;
  cfg.noiseRate = 0.15;
  cfg.negativeRatio = 2;
  num::Rng rng(seed);
  return corpus::generateSynthetic(cfg, rng);
}

PipelineConfig fastPipeline() {
  PipelineConfig cfg;
  cfg.arch.embeddingDim = 6;
  cfg.arch.hiddenDim = 3;
  cfg.arch.ffnHidden = {6};
  cfg.embed.dim = 6;
  cfg.embed.epochs = 2;
  cfg.trainCfg.epochs = 4;
  cfg.trainCfg.learningRate = 0.05;
  cfg.abcCfg.populationSize = 4;
  cfg.abcCfg.maxEvaluations = 40;
  cfg.fitnessSubsample = 12;
  return cfg;
}

}  // namespace

TEST_CASE("classify boundary and monotonicity") {
  CHECK(classify(0.515, {0.515}) == PairClass::copy);  // inclusive boundary
  CHECK(classify(0.4, {0.5}) == PairClass::notCopy);
  CHECK(classify(1.0, {0.99}) == PairClass::copy);
  // monotone: once a similarity classifies as copy, higher ones do too
  bool seenCopy = false;
  for (double s = 0.0; s <= 1.0; s += 0.01) {
    const bool isCopy = classify(s, {0.52}) == PairClass::copy;
    if (seenCopy) CHECK(isCopy);
    seenCopy = seenCopy || isCopy;
  }
  CHECK_THROWS_AS(classify(0.5, {0.0}), ArgumentError);
  CHECK_THROWS_AS(classify(0.5, {1.0}), ArgumentError);
}

TEST_CASE("recall examples") {
  using C = PairClass;
  // TP=3, FN=1
  const std::vector<C> actual{C::copy, C::copy, C::copy, C::copy, C::notCopy};
  const std::vector<C> pred{C::copy, C::copy, C::copy, C::notCopy, C::copy};
  CHECK(recallPercent(pred, actual) == doctest::Approx(75.0));

  const std::vector<C> allCaught{C::copy, C::copy, C::copy, C::copy, C::notCopy};
  CHECK(recallPercent(allCaught, actual) == doctest::Approx(100.0));

  const std::vector<C> noPositives{C::notCopy, C::notCopy};
  CHECK_THROWS_AS(recallPercent(noPositives, noPositives), ArgumentError);
}

TEST_CASE("recall ignores negative examples") {
  using C = PairClass;
  num::Rng rng(1);
  for (int iter = 0; iter < 50; ++iter) {
    const std::size_t n = 4 + rng.index(20);
    std::vector<C> actual(n), predA(n), predB(n);
    bool anyPositive = false;
    for (std::size_t i = 0; i < n; ++i) {
      actual[i] = rng.u01() < 0.4 ? C::copy : C::notCopy;
      anyPositive = anyPositive || actual[i] == C::copy;
      predA[i] = rng.u01() < 0.5 ? C::copy : C::notCopy;
      predB[i] = actual[i] == C::copy ? predA[i]
                                      : (predA[i] == C::copy ? C::notCopy : C::copy);
    }
    if (!anyPositive) continue;
    CHECK(recallPercent(predA, actual) == recallPercent(predB, actual));
  }
}

TEST_CASE("pearson examples and affine invariance") {
  CHECK(pearson({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson({1.0, 2.0, 3.0}, {3.0, 2.0, 1.0}) == doctest::Approx(-1.0).epsilon(1e-12));

  // brute-force covariance/variance evaluation
  const Vec x{1.0, 2.0, 3.0, 4.0};
  const Vec y{1.1, 2.2, 2.9, 4.05};
  const double mx = (1.0 + 2.0 + 3.0 + 4.0) / 4.0;
  const double my = (1.1 + 2.2 + 2.9 + 4.05) / 4.0;
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  CHECK(pearson(x, y) == doctest::Approx(cov / std::sqrt(vx * vy)).epsilon(1e-12));

  num::Rng rng(2);
  for (int iter = 0; iter < 50; ++iter) {
    const std::size_t n = 3 + rng.index(20);
    Vec a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(-5.0, 5.0);
      b[i] = rng.uniform(-5.0, 5.0);
    }
    const double scale = rng.uniform(0.1, 4.0);
    const double shift = rng.uniform(-10.0, 10.0);
    Vec scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = scale * a[i] + shift;
    CHECK(std::fabs(pearson(scaled, b) - pearson(a, b)) < 1e-10);
  }

  CHECK_THROWS_AS(pearson({1.0, 1.0}, {1.0, 2.0}), ArgumentError);
  CHECK_THROWS_AS(pearson({1.0}, {1.0}), ArgumentError);
}

TEST_CASE("mse examples") {
  CHECK(mse({0.3, 0.7}, {0.3, 0.7}) == 0.0);
  CHECK(mse({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(1.0));
  CHECK(mse({0.5}, {1.0}) == doctest::Approx(0.25));
  CHECK_THROWS_AS(mse({1.0}, {1.0, 2.0}), ArgumentError);
}

TEST_CASE("aggregate median matches a sort-based oracle") {
  num::Rng rng(3);
  for (int iter = 0; iter < 40; ++iter) {
    const std::size_t n = 1 + rng.index(15);
    std::vector<double> values(n);
    for (auto& v : values) v = rng.uniform(-100.0, 100.0);
    const Aggregate agg = aggregate(values);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double median =
        n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    CHECK(agg.median == doctest::Approx(median).epsilon(1e-15));

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    CHECK(agg.stddev == doctest::Approx(std::sqrt(var / static_cast<double>(n))).epsilon(1e-12));
  }
}

TEST_CASE("evaluatePairs agrees with directly computed metrics") {
  model::ArchConfig arch;
  arch.embeddingDim = 4;
  arch.hiddenDim = 2;
  arch.ffnHidden = {};
  num::Rng modelRng(11);
  const model::ModelParams params = model::initRandom(arch, 0.8, modelRng);

  num::Rng rng(4);
  std::vector<emb::EmbeddedPair> pairs;
  for (int i = 0; i < 10; ++i) {
    emb::EmbeddedPair p;
    p.label = i < 4 ? 1.0 : 0.0;
    p.first.assign(2 + rng.index(2), num::Vec(4));
    p.second.assign(2 + rng.index(2), num::Vec(4));
    for (auto& v : p.first)
      for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    for (auto& v : p.second)
      for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    pairs.push_back(p);
  }
  const Threshold threshold{0.5};
  const FoldMetrics m = evaluatePairs(params, pairs, threshold);

  // direct recomputation
  num::Vec preds, labels;
  std::size_t tp = 0, fn = 0;
  for (const auto& p : pairs) {
    const double s = model::similarityForward(params, p.first, p.second);
    preds.push_back(s);
    labels.push_back(p.label);
    if (p.label >= 0.5) {
      if (s >= threshold.epsilon)
        ++tp;
      else
        ++fn;
    }
  }
  CHECK(m.recall ==
        doctest::Approx(100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn)));
  CHECK(m.mse == doctest::Approx(mse(preds, labels)).epsilon(1e-15));
  CHECK(m.pearson == doctest::Approx(pearson(preds, labels)).epsilon(1e-15));
}

TEST_CASE("crossValidate report shape and determinism") {
  const corpus::Dataset ds = smallSynthetic(21);
  PipelineConfig cfg = fastPipeline();
  cfg.init = InitMode::random;

  const MetricsReport a = crossValidate(ds, cfg, 3, 5);
  CHECK(a.folds.size() == 3);

  const MetricsReport b = crossValidate(ds, cfg, 3, 5);
  REQUIRE(b.folds.size() == a.folds.size());
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    CHECK(a.folds[f].recall == b.folds[f].recall);
    CHECK(a.folds[f].mse == b.folds[f].mse);
    CHECK(a.folds[f].pearson == b.folds[f].pearson);
  }

  // fold-level parallelism changes nothing
  cfg.threads = 3;
  const MetricsReport c = crossValidate(ds, cfg, 3, 5);
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    CHECK(a.folds[f].recall == c.folds[f].recall);
    CHECK(a.folds[f].mse == c.folds[f].mse);
    CHECK(a.folds[f].pearson == c.folds[f].pearson);
  }
}

TEST_CASE("crossValidate with abc init runs end to end") {
  const corpus::Dataset ds = smallSynthetic(22);
  PipelineConfig cfg = fastPipeline();
  cfg.init = InitMode::abc;
  const MetricsReport report = crossValidate(ds, cfg, 3, 6);
  CHECK(report.folds.size() == 3);
  for (const auto& f : report.folds) {
    CHECK(f.recall >= 0.0);
    CHECK(f.recall <= 100.0);
    CHECK(f.mse >= 0.0);
    CHECK(f.pearson >= -1.0);
    CHECK(f.pearson <= 1.0);
  }
}

TEST_CASE("augmentation stays inside the training portion") {
  // equalizing augmentation in trainOnDataset only ever references training
  // pairs: source indices point into the dataset it was given
  const corpus::Dataset ds = smallSynthetic(23);
  std::vector<corpus::Sentence> sentences;
  for (const auto& p : ds.pairs) {
    sentences.push_back(p.first);
    sentences.push_back(p.second);
  }
  const auto vocab = emb::buildVocab(sentences, 1);
  emb::SkipGramConfig sg;
  sg.dim = 6;
  sg.epochs = 1;
  num::Rng rng(7);
  const auto table = emb::trainSkipGram(sentences, vocab, sg, rng);

  num::Rng aug(8);
  const auto augmented = emb::augmentPositives(ds, table, 2, 0.01, aug);
  CHECK(!augmented.empty());
  for (const auto& e : augmented) {
    CHECK(e.augmented);
    REQUIRE(e.sourceIndex >= 0);
    REQUIRE(static_cast<std::size_t>(e.sourceIndex) < ds.pairs.size());
    CHECK(ds.pairs[static_cast<std::size_t>(e.sourceIndex)].label >= 0.5);
  }
}

TEST_CASE("compare arms share fold assignments and are reproducible") {
  const corpus::Dataset ds = smallSynthetic(24, 10, 3);
  PipelineConfig cfg = fastPipeline();
  const CompareResult a = compare(ds, cfg, 3, {11, 12});
  REQUIRE(a.abcArm.size() == 2);
  REQUIRE(a.randomArm.size() == 2);
  for (const auto& report : a.abcArm) CHECK(report.folds.size() == 3);

  const CompareResult b = compare(ds, cfg, 3, {11, 12});
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t f = 0; f < 3; ++f) {
      CHECK(a.abcArm[s].folds[f].mse == b.abcArm[s].folds[f].mse);
      CHECK(a.randomArm[s].folds[f].recall == b.randomArm[s].folds[f].recall);
    }
}
