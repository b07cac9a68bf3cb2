#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lstmabc/embedding.hpp"
#include "lstmabc/model.hpp"

namespace lstmabc::train {

// Class weights of the imbalance penalty: alpha scales positive (minority)
// pairs, beta negative (majority) pairs.
struct LossConfig {
  double alpha = 1.0;
  double beta = 0.5;
};

// w * (prediction - label)^2 with w = alpha when label >= 0.5, else beta.
double pairLoss(double prediction, double label, const LossConfig& cfg);

// Mean of pairLoss over the set.
double datasetLoss(const model::ModelParams& params, const std::vector<emb::EmbeddedPair>& data,
                   const LossConfig& cfg);

// Accumulates the exact gradient of pairLoss into `grads` (same shapes as the
// model). `trace` must come from the matching similarityForward call.
void backwardInto(const model::ModelParams& params, const model::ForwardTrace& trace,
                  double prediction, double label, const LossConfig& cfg,
                  model::ModelParams& grads);

// Flat gradient of pairLoss for one pair.
num::Vec backward(const model::ModelParams& params, const model::ForwardTrace& trace,
                  double prediction, double label, const LossConfig& cfg);

struct GradCheckReport {
  double maxRelError = 0.0;
  std::vector<std::size_t> failingIndices;                     // rel error > tolerance
  std::vector<std::pair<std::string, double>> groupMaxErrors;  // per parameter group
};

// Compares an analytic gradient against central finite differences of
// pairLoss, component by component. Relative error:
// |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport compareToNumeric(const num::Vec& analytic, const model::ModelParams& params,
                                 const model::ArchConfig& arch, const emb::EmbeddedPair& pair,
                                 const LossConfig& cfg, double step, double tolerance);

// Runs backward() and checks it against finite differences.
GradCheckReport gradCheck(const model::ModelParams& params, const model::ArchConfig& arch,
                          const emb::EmbeddedPair& pair, const LossConfig& cfg, double step,
                          double tolerance);

enum class TrainerKind { gdm, gda };

struct TrainConfig {
  std::size_t epochs = 30;
  double learningRate = 0.05;
  double momentum = 0.9;     // gdm only
  double lrIncrease = 1.05;  // gda only
  double lrDecrease = 0.7;   // gda only
  std::size_t batchSize = 0; // 0 = full batch
  std::uint64_t seed = 0;    // mini-batch shuffling
};

struct EpochStat {
  std::size_t epoch = 0;
  double loss = 0.0;
  double learningRate = 0.0;
};

struct TrainResult {
  model::ModelParams params;
  std::vector<EpochStat> history;
};

// Gradient descent with momentum: v <- mu v - lr g; theta <- theta + v.
// The recorded loss is the training loss at the start of each epoch.
TrainResult trainGdm(const model::ModelParams& init, const model::ArchConfig& arch,
                     const std::vector<emb::EmbeddedPair>& data, const LossConfig& loss,
                     const TrainConfig& cfg);

// Gradient descent with adaptive learning rate: an epoch whose step lowers
// the loss is accepted and lr grows by lrIncrease; otherwise the step is
// rejected (parameters restored) and lr shrinks by lrDecrease.
TrainResult trainGda(const model::ModelParams& init, const model::ArchConfig& arch,
                     const std::vector<emb::EmbeddedPair>& data, const LossConfig& loss,
                     const TrainConfig& cfg);

// 1 / (1 + SSE) of unweighted squared prediction error over the set.
double fitness(const num::Vec& paramVec, const std::vector<emb::EmbeddedPair>& data,
               const model::ArchConfig& arch);

// One line per epoch: epoch<TAB>loss<TAB>learningRate.
void saveTrainHistory(const std::vector<EpochStat>& history, const std::string& path,
                      const std::vector<std::string>& headerComments = {});

}  // namespace lstmabc::train
