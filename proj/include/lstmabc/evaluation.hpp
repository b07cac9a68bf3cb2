#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lstmabc/abc.hpp"
#include "lstmabc/corpus.hpp"
#include "lstmabc/embedding.hpp"
#include "lstmabc/model.hpp"
#include "lstmabc/trainer.hpp"

namespace lstmabc::eval {

// Similarity cut-off; a pair scoring >= epsilon is declared a copy.
struct Threshold {
  double epsilon = 0.5;
};

enum class PairClass { copy, notCopy };

PairClass classify(double similarity, Threshold threshold);

// 100 * TP / (TP + FN). Undefined when there is no actual positive.
double recallPercent(const std::vector<PairClass>& predicted,
                     const std::vector<PairClass>& actual);

// Sample Pearson correlation; undefined for constant input.
double pearson(const num::Vec& a, const num::Vec& b);

// Mean of squared differences.
double mse(const num::Vec& a, const num::Vec& b);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population form
  double median = 0.0;
};

Aggregate aggregate(std::vector<double> values);

struct FoldMetrics {
  double recall = 0.0;
  double mse = 0.0;
  double pearson = 0.0;
};

struct MetricsReport {
  std::vector<FoldMetrics> folds;
  Aggregate recall, mse, pearson;
};

MetricsReport makeReport(std::vector<FoldMetrics> folds);

enum class InitMode { random, abc };

// Every tunable of one experiment run. Per-fold randomness is derived from
// (masterSeed, foldIndex), so fold-level parallelism cannot change results.
struct PipelineConfig {
  model::ArchConfig arch;
  emb::SkipGramConfig embed;
  std::size_t minCount = 1;
  train::LossConfig loss;
  train::TrainerKind trainer = train::TrainerKind::gdm;
  train::TrainConfig trainCfg;
  InitMode init = InitMode::abc;
  double initScale = 1.0;
  abc::AbcConfig abcCfg;           // dimension and seed are filled per run
  std::ptrdiff_t augmentCopies = -1;  // -1 = equalize classes, 0 = off
  double augmentSigma = 0.01;
  std::size_t fitnessSubsample = 32;  // 0 = whole training set
  Threshold threshold;
  unsigned threads = 1;     // fold-level parallelism
  unsigned abcThreads = 1;  // fitness-evaluation parallelism (single runs)
};

// Score a trained model on embedded pairs (one "fold" worth of metrics).
FoldMetrics evaluatePairs(const model::ModelParams& params,
                          const std::vector<emb::EmbeddedPair>& pairs, Threshold threshold);

struct TrainOutputs {
  model::ModelParams params;
  model::ArchConfig arch;
  std::vector<train::EpochStat> history;
  std::optional<abc::AbcResult> abcResult;
};

// Embed + augment a dataset with a given table, pick the initial point
// (random draw or bee-colony search), then run backpropagation.
TrainOutputs trainOnDataset(const corpus::Dataset& ds, const emb::EmbeddingTable& table,
                            const PipelineConfig& cfg, std::uint64_t seed);

// Full k-fold protocol: per fold, embeddings and augmentation are built from
// the training portion only, the model is initialised and trained, and the
// held-out fold is scored.
MetricsReport crossValidate(const corpus::Dataset& ds, const PipelineConfig& cfg, std::size_t k,
                            std::uint64_t masterSeed);
MetricsReport crossValidateWithSplit(const corpus::Dataset& ds, const PipelineConfig& cfg,
                                     const corpus::FoldSplit& split, std::uint64_t masterSeed);

struct CompareResult {
  std::vector<std::uint64_t> seeds;
  std::vector<MetricsReport> abcArm;
  std::vector<MetricsReport> randomArm;
};

// Paired design: for each master seed both init modes run over the identical
// fold split with identical derived randomness; only the initial point
// differs.
CompareResult compare(const corpus::Dataset& ds, const PipelineConfig& cfg, std::size_t k,
                      const std::vector<std::uint64_t>& seeds);

void writeReport(const MetricsReport& report, const std::string& datasetName,
                 const std::string& mode, const std::string& path,
                 const std::vector<std::string>& headerComments = {});
void writeCompareReport(const CompareResult& result, const std::string& datasetName,
                        std::size_t k, const std::string& path,
                        const std::vector<std::string>& headerComments = {});

}  // namespace lstmabc::eval
