#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lstmabc/numerics.hpp"

namespace lstmabc::model {

// Architecture dimensions. The feed-forward head takes the concatenation
// [s1 ; s2 ; |s2 - s1|] of the two pooled 2h-dim sentence embeddings, so its
// input width is fixed at 6h and its output is a single similarity score.
struct ArchConfig {
  std::size_t embeddingDim = 16;
  std::size_t hiddenDim = 8;
  std::vector<std::size_t> ffnHidden{16, 8};

  std::vector<std::size_t> ffnDims() const;  // {6h, hidden..., 1}
};

// One LSTM direction: per-gate input weights W (h x d), recurrent weights
// U (h x h) and bias b (h). Gates: input i, forget f, output o, cell input j.
struct LstmDirectionParams {
  num::Mat Wi, Ui;
  num::Vec bi;
  num::Mat Wf, Uf;
  num::Vec bf;
  num::Mat Wo, Uo;
  num::Vec bo;
  num::Mat Wj, Uj;
  num::Vec bj;
};

struct BlstmParams {
  LstmDirectionParams forward;
  LstmDirectionParams backward;
};

// Scores one 2h-dim hidden state to a scalar: u = tanh(w . state + b).
struct AttentionParams {
  num::Vec w;
  double b = 0.0;
};

struct FfnLayer {
  num::Mat weight;  // out x in
  num::Vec bias;    // out
};

// tanh hidden layers, sigmoid output.
struct FfnParams {
  std::vector<FfnLayer> layers;
};

struct ModelParams {
  BlstmParams blstm1, blstm2;
  AttentionParams attn1, attn2;
  FfnParams ffn;
};

ModelParams zeroModel(const ArchConfig& arch);
std::size_t paramCount(const ArchConfig& arch);

// Canonical flat encoding: blstm1 forward then backward (per gate i,f,o,j:
// W row-major, U row-major, b), blstm2 likewise, attn1 (w then b), attn2,
// then each feed-forward layer (weight row-major then bias).
num::Vec flatten(const ModelParams& params);
ModelParams unflatten(const num::Vec& vec, const ArchConfig& arch);

// (group name, length) in canonical flat order.
std::vector<std::pair<std::string, std::size_t>> layoutGroups(const ArchConfig& arch);

// Every parameter drawn U(-scale, scale).
ModelParams initRandom(const ArchConfig& arch, double scale, num::Rng& rng);

struct LstmStepTrace {
  num::Vec i, f, o, g;  // gate activations and tanh cell input
  num::Vec c, tanhC, h;
};

struct DirectionTrace {
  std::vector<LstmStepTrace> steps;  // in processing order
};

struct BranchTrace {
  DirectionTrace fwd, bwd;
  std::vector<num::Vec> states;  // per input position, [fwd_t ; bwd_t], 2h
  num::Vec attnLogits;
  num::Vec attnWeights;
  num::Vec pooled;  // 2h
};

struct FfnTrace {
  // act[0] = input, act[l] = tanh output of hidden layer l
  std::vector<num::Vec> act;
  double output = 0.0;
};

struct ForwardTrace {
  std::vector<num::Vec> x1, x2;
  BranchTrace b1, b2;
  num::Vec ffnInput;
  FfnTrace ffn;
  double similarity = 0.0;
};

// One LSTM cell update; h_prev/c_prev are the previous step's state (zeros
// at the sequence start).
LstmStepTrace lstmStep(const LstmDirectionParams& params, const num::Vec& x,
                       const num::Vec& hPrev, const num::Vec& cPrev);

// Left-to-right and right-to-left passes, concatenated per position.
std::vector<num::Vec> blstmForward(const BlstmParams& params, const std::vector<num::Vec>& inputs,
                                   DirectionTrace* fwdTrace = nullptr,
                                   DirectionTrace* bwdTrace = nullptr);

// Returns (pooled state, softmax weights).
std::pair<num::Vec, num::Vec> attentionPool(const AttentionParams& params,
                                            const std::vector<num::Vec>& states,
                                            num::Vec* logits = nullptr);

double ffnForward(const FfnParams& params, const num::Vec& input, FfnTrace* trace = nullptr);

// Full Siamese forward: branch 1 encodes emb1, branch 2 encodes emb2, and
// the head scores [s1 ; s2 ; |s2 - s1|].
double similarityForward(const ModelParams& params, const std::vector<num::Vec>& emb1,
                         const std::vector<num::Vec>& emb2, ForwardTrace* trace = nullptr);

// Text format: comments, an `arch` line, a `params <D>` line, then one
// full-precision value per line in canonical order.
void saveModel(const ModelParams& params, const ArchConfig& arch, const std::string& path,
               const std::vector<std::string>& headerComments = {});
std::pair<ModelParams, ArchConfig> loadModel(const std::string& path);

}  // namespace lstmabc::model
