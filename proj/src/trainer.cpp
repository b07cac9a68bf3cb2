#include "lstmabc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace lstmabc::train {

double pairLoss(double prediction, double label, const LossConfig& cfg) {
  if (cfg.alpha < 0.0 || cfg.beta < 0.0) throw ArgumentError("pairLoss: negative class weight");
  if (cfg.alpha == 0.0 && cfg.beta == 0.0) throw ArgumentError("pairLoss: both weights zero");
  const double w = label >= 0.5 ? cfg.alpha : cfg.beta;
  const double d = prediction - label;
  return w * d * d;
}

double datasetLoss(const model::ModelParams& params, const std::vector<emb::EmbeddedPair>& data,
                   const LossConfig& cfg) {
  if (data.empty()) throw ArgumentError("datasetLoss: empty dataset");
  double sum = 0.0;
  for (const auto& p : data)
    sum += pairLoss(model::similarityForward(params, p.first, p.second), p.label, cfg);
  return sum / static_cast<double>(data.size());
}

namespace {

// dWeight accumulation for one LSTM direction, iterating the processed
// sequence backwards. `xs` are the inputs in processing order, `dH` the
// incoming per-step gradients w.r.t. the hidden state.
void lstmDirectionBackward(const model::LstmDirectionParams& p,
                           const std::vector<model::LstmStepTrace>& steps,
                           const std::vector<const num::Vec*>& xs, const std::vector<num::Vec>& dH,
                           model::LstmDirectionParams& g) {
  const std::size_t S = steps.size();
  const std::size_t h = p.bi.size();
  const num::Vec zero(h, 0.0);
  num::Vec dhCarry(h, 0.0), dcCarry(h, 0.0);
  num::Vec dzi(h), dzf(h), dzo(h), dzg(h);
  for (std::size_t s = S; s-- > 0;) {
    const auto& st = steps[s];
    const num::Vec& hPrev = s ? steps[s - 1].h : zero;
    const num::Vec& cPrev = s ? steps[s - 1].c : zero;
    for (std::size_t k = 0; k < h; ++k) {
      const double dh = dH[s][k] + dhCarry[k];
      const double dOut = dh * st.tanhC[k];
      const double dc = dcCarry[k] + dh * st.o[k] * (1.0 - st.tanhC[k] * st.tanhC[k]);
      const double di = dc * st.g[k];
      const double dg = dc * st.i[k];
      const double df = dc * cPrev[k];
      dcCarry[k] = dc * st.f[k];
      dzi[k] = di * st.i[k] * (1.0 - st.i[k]);
      dzf[k] = df * st.f[k] * (1.0 - st.f[k]);
      dzo[k] = dOut * st.o[k] * (1.0 - st.o[k]);
      dzg[k] = dg * (1.0 - st.g[k] * st.g[k]);
    }
    num::outerAcc(g.Wi, dzi, *xs[s]); num::outerAcc(g.Ui, dzi, hPrev); num::addInto(g.bi, dzi);
    num::outerAcc(g.Wf, dzf, *xs[s]); num::outerAcc(g.Uf, dzf, hPrev); num::addInto(g.bf, dzf);
    num::outerAcc(g.Wo, dzo, *xs[s]); num::outerAcc(g.Uo, dzo, hPrev); num::addInto(g.bo, dzo);
    num::outerAcc(g.Wj, dzg, *xs[s]); num::outerAcc(g.Uj, dzg, hPrev); num::addInto(g.bj, dzg);
    std::fill(dhCarry.begin(), dhCarry.end(), 0.0);
    num::matTVecAcc(dhCarry, p.Ui, dzi);
    num::matTVecAcc(dhCarry, p.Uf, dzf);
    num::matTVecAcc(dhCarry, p.Uo, dzo);
    num::matTVecAcc(dhCarry, p.Uj, dzg);
  }
}

void attentionBackward(const model::AttentionParams& p, const model::BranchTrace& tr,
                       const num::Vec& dPooled, std::vector<num::Vec>& dStates,
                       model::AttentionParams& g) {
  const std::size_t T = tr.states.size();
  num::Vec dAlpha(T);
  for (std::size_t t = 0; t < T; ++t) {
    dAlpha[t] = num::dot(dPooled, tr.states[t]);
    num::axpy(dStates[t], tr.attnWeights[t], dPooled);
  }
  double weighted = 0.0;
  for (std::size_t t = 0; t < T; ++t) weighted += tr.attnWeights[t] * dAlpha[t];
  for (std::size_t t = 0; t < T; ++t) {
    const double du = tr.attnWeights[t] * (dAlpha[t] - weighted);
    const double dr = du * (1.0 - tr.attnLogits[t] * tr.attnLogits[t]);
    num::axpy(g.w, dr, tr.states[t]);
    g.b += dr;
    num::axpy(dStates[t], dr, p.w);
  }
}

void branchBackward(const model::BlstmParams& bp, const model::AttentionParams& ap,
                    const model::BranchTrace& tr, const std::vector<num::Vec>& x,
                    const num::Vec& dPooled, model::BlstmParams& gB, model::AttentionParams& gA) {
  const std::size_t T = x.size();
  const std::size_t twoH = tr.states[0].size();
  const std::size_t h = twoH / 2;
  std::vector<num::Vec> dStates(T, num::Vec(twoH, 0.0));
  attentionBackward(ap, tr, dPooled, dStates, gA);

  std::vector<num::Vec> dHf(T, num::Vec(h)), dHb(T, num::Vec(h));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < h; ++k) {
      dHf[t][k] = dStates[t][k];
      dHb[T - 1 - t][k] = dStates[t][h + k];  // bwd step T-1-t processed input t
    }
  }
  std::vector<const num::Vec*> xsF(T), xsB(T);
  for (std::size_t t = 0; t < T; ++t) {
    xsF[t] = &x[t];
    xsB[t] = &x[T - 1 - t];
  }
  lstmDirectionBackward(bp.forward, tr.fwd.steps, xsF, dHf, gB.forward);
  lstmDirectionBackward(bp.backward, tr.bwd.steps, xsB, dHb, gB.backward);
}

double signOf(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

void backwardInto(const model::ModelParams& params, const model::ForwardTrace& trace,
                  double prediction, double label, const LossConfig& cfg,
                  model::ModelParams& grads) {
  const double w = label >= 0.5 ? cfg.alpha : cfg.beta;
  const double dPred = 2.0 * w * (prediction - label);

  // feed-forward head, last layer sigmoid then tanh hiddens
  const auto& layers = params.ffn.layers;
  const std::size_t L = layers.size();
  num::Vec dz{dPred * prediction * (1.0 - prediction)};
  num::Vec dPrev;
  for (std::size_t l = L; l-- > 0;) {
    const num::Vec& input = trace.ffn.act[l];
    num::outerAcc(grads.ffn.layers[l].weight, dz, input);
    num::addInto(grads.ffn.layers[l].bias, dz);
    dPrev.assign(input.size(), 0.0);
    num::matTVecAcc(dPrev, layers[l].weight, dz);
    if (l > 0) {
      dz.resize(dPrev.size());
      for (std::size_t k = 0; k < dPrev.size(); ++k)
        dz[k] = dPrev[k] * (1.0 - input[k] * input[k]);
    }
  }

  // split the head input gradient into the two pooled branches; the absolute
  // difference contributes sign(s2 - s1) elementwise
  const std::size_t twoH = trace.b1.pooled.size();
  num::Vec ds1(twoH), ds2(twoH);
  for (std::size_t k = 0; k < twoH; ++k) {
    const double sgn = signOf(trace.b2.pooled[k] - trace.b1.pooled[k]);
    ds1[k] = dPrev[k] - sgn * dPrev[2 * twoH + k];
    ds2[k] = dPrev[twoH + k] + sgn * dPrev[2 * twoH + k];
  }

  branchBackward(params.blstm1, params.attn1, trace.b1, trace.x1, ds1, grads.blstm1, grads.attn1);
  branchBackward(params.blstm2, params.attn2, trace.b2, trace.x2, ds2, grads.blstm2, grads.attn2);
}

num::Vec backward(const model::ModelParams& params, const model::ForwardTrace& trace,
                  double prediction, double label, const LossConfig& cfg) {
  model::ArchConfig arch;
  arch.embeddingDim = params.blstm1.forward.Wi.cols;
  arch.hiddenDim = params.blstm1.forward.bi.size();
  arch.ffnHidden.clear();
  for (std::size_t l = 0; l + 1 < params.ffn.layers.size(); ++l)
    arch.ffnHidden.push_back(params.ffn.layers[l].bias.size());
  model::ModelParams grads = model::zeroModel(arch);
  backwardInto(params, trace, prediction, label, cfg, grads);
  return model::flatten(grads);
}

GradCheckReport compareToNumeric(const num::Vec& analytic, const model::ModelParams& params,
                                 const model::ArchConfig& arch, const emb::EmbeddedPair& pair,
                                 const LossConfig& cfg, double step, double tolerance) {
  if (!(step > 0.0)) throw ArgumentError("compareToNumeric: step must be > 0");
  num::Vec flat = model::flatten(params);
  if (analytic.size() != flat.size())
    throw ArgumentError("compareToNumeric: gradient length mismatch");

  const auto groups = layoutGroups(arch);
  GradCheckReport report;
  report.groupMaxErrors.reserve(groups.size());
  for (const auto& g : groups) report.groupMaxErrors.emplace_back(g.first, 0.0);

  auto lossAt = [&](const num::Vec& v) {
    const model::ModelParams m = model::unflatten(v, arch);
    return pairLoss(model::similarityForward(m, pair.first, pair.second), pair.label, cfg);
  };

  std::size_t group = 0;
  std::size_t groupEnd = groups.empty() ? 0 : groups[0].second;
  for (std::size_t k = 0; k < flat.size(); ++k) {
    while (k >= groupEnd && group + 1 < groups.size()) {
      ++group;
      groupEnd += groups[group].second;
    }
    const double saved = flat[k];
    flat[k] = saved + step;
    const double lp = lossAt(flat);
    flat[k] = saved - step;
    const double lm = lossAt(flat);
    flat[k] = saved;
    const double numeric = (lp - lm) / (2.0 * step);
    const double a = analytic[k];
    const double rel =
        std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), 1e-8});
    report.maxRelError = std::max(report.maxRelError, rel);
    report.groupMaxErrors[group].second = std::max(report.groupMaxErrors[group].second, rel);
    if (rel > tolerance) report.failingIndices.push_back(k);
  }
  return report;
}

GradCheckReport gradCheck(const model::ModelParams& params, const model::ArchConfig& arch,
                          const emb::EmbeddedPair& pair, const LossConfig& cfg, double step,
                          double tolerance) {
  model::ForwardTrace trace;
  const double pred = model::similarityForward(params, pair.first, pair.second, &trace);
  const num::Vec analytic = backward(params, trace, pred, pair.label, cfg);
  return compareToNumeric(analytic, params, arch, pair, cfg, step, tolerance);
}

namespace {

void validateTrainConfig(const TrainConfig& cfg) {
  if (cfg.epochs == 0) throw ArgumentError("train: epochs must be >= 1");
  if (cfg.learningRate < 0.0) throw ArgumentError("train: negative learning rate");
}

// Mean loss and mean flat gradient over the index range [of `order`].
double batchGradient(const model::ModelParams& params, const model::ArchConfig& arch,
                     const std::vector<emb::EmbeddedPair>& data,
                     const std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                     const LossConfig& loss, num::Vec& flatGrad) {
  model::ModelParams grads = model::zeroModel(arch);
  double lossSum = 0.0;
  model::ForwardTrace trace;
  for (std::size_t idx = begin; idx < end; ++idx) {
    const auto& p = data[order[idx]];
    const double pred = model::similarityForward(params, p.first, p.second, &trace);
    lossSum += pairLoss(pred, p.label, loss);
    backwardInto(params, trace, pred, p.label, loss, grads);
  }
  const double inv = 1.0 / static_cast<double>(end - begin);
  flatGrad = model::flatten(grads);
  for (auto& g : flatGrad) g *= inv;
  return lossSum * inv;
}

std::vector<std::size_t> identityOrder(std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  return order;
}

}  // namespace

TrainResult trainGdm(const model::ModelParams& init, const model::ArchConfig& arch,
                     const std::vector<emb::EmbeddedPair>& data, const LossConfig& loss,
                     const TrainConfig& cfg) {
  validateTrainConfig(cfg);
  if (data.empty()) throw ArgumentError("trainGdm: empty training set");
  num::Vec theta = model::flatten(init);
  num::Vec velocity(theta.size(), 0.0);
  num::Vec grad;
  num::Rng rng(cfg.seed);
  auto order = identityOrder(data.size());
  const std::size_t batch = cfg.batchSize == 0 ? data.size() : std::min(cfg.batchSize, data.size());

  TrainResult result;
  model::ModelParams current = init;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.batchSize != 0)
      for (std::size_t i = order.size(); i-- > 1;) std::swap(order[i], order[rng.index(i + 1)]);
    double epochLoss = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < data.size(); begin += batch) {
      const std::size_t end = std::min(begin + batch, data.size());
      const double batchLoss = batchGradient(current, arch, data, order, begin, end, loss, grad);
      epochLoss += batchLoss;
      ++batches;
      for (std::size_t k = 0; k < theta.size(); ++k) {
        velocity[k] = cfg.momentum * velocity[k] - cfg.learningRate * grad[k];
        theta[k] += velocity[k];
      }
      current = model::unflatten(theta, arch);
    }
    epochLoss /= static_cast<double>(batches);
    if (!std::isfinite(epochLoss))
      throw DivergenceError("trainGdm: non-finite loss at epoch " + std::to_string(epoch));
    result.history.push_back({epoch, epochLoss, cfg.learningRate});
  }
  result.params = std::move(current);
  return result;
}

TrainResult trainGda(const model::ModelParams& init, const model::ArchConfig& arch,
                     const std::vector<emb::EmbeddedPair>& data, const LossConfig& loss,
                     const TrainConfig& cfg) {
  validateTrainConfig(cfg);
  if (data.empty()) throw ArgumentError("trainGda: empty training set");
  if (cfg.lrIncrease <= 0.0 || cfg.lrDecrease <= 0.0)
    throw ArgumentError("trainGda: rate factors must be positive");
  num::Vec theta = model::flatten(init);
  num::Vec grad;
  num::Rng rng(cfg.seed);
  auto order = identityOrder(data.size());
  const std::size_t batch = cfg.batchSize == 0 ? data.size() : std::min(cfg.batchSize, data.size());
  double lr = cfg.learningRate;

  TrainResult result;
  model::ModelParams current = init;
  double currentLoss = datasetLoss(current, data, loss);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.batchSize != 0)
      for (std::size_t i = order.size(); i-- > 1;) std::swap(order[i], order[rng.index(i + 1)]);
    const num::Vec saved = theta;
    for (std::size_t begin = 0; begin < data.size(); begin += batch) {
      const std::size_t end = std::min(begin + batch, data.size());
      batchGradient(current, arch, data, order, begin, end, loss, grad);
      for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= lr * grad[k];
      current = model::unflatten(theta, arch);
    }
    const double newLoss = datasetLoss(current, data, loss);
    if (!std::isfinite(newLoss))
      throw DivergenceError("trainGda: non-finite loss at epoch " + std::to_string(epoch));
    const double usedLr = lr;
    if (newLoss < currentLoss) {
      currentLoss = newLoss;
      lr *= cfg.lrIncrease;
    } else {
      theta = saved;
      current = model::unflatten(theta, arch);
      lr *= cfg.lrDecrease;
    }
    result.history.push_back({epoch, currentLoss, usedLr});
  }
  result.params = std::move(current);
  return result;
}

double fitness(const num::Vec& paramVec, const std::vector<emb::EmbeddedPair>& data,
               const model::ArchConfig& arch) {
  if (data.empty()) throw ArgumentError("fitness: empty fitness set");
  const model::ModelParams params = model::unflatten(paramVec, arch);
  double sse = 0.0;
  for (const auto& p : data) {
    const double d = model::similarityForward(params, p.first, p.second) - p.label;
    sse += d * d;
  }
  return 1.0 / (1.0 + sse);
}

void saveTrainHistory(const std::vector<EpochStat>& history, const std::string& path,
                      const std::vector<std::string>& headerComments) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write history file: " + path);
  for (const auto& c : headerComments) out << "# " << c << '\n';
  for (const auto& e : history)
    out << e.epoch << '\t' << fmtG17(e.loss) << '\t' << fmtG17(e.learningRate) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace lstmabc::train
