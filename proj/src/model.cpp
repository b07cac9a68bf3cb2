#include "lstmabc/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lstmabc::model {

std::vector<std::size_t> ArchConfig::ffnDims() const {
  std::vector<std::size_t> dims;
  dims.push_back(6 * hiddenDim);
  for (auto h : ffnHidden) dims.push_back(h);
  dims.push_back(1);
  return dims;
}

namespace {

void validateArch(const ArchConfig& arch) {
  if (arch.embeddingDim == 0 || arch.hiddenDim == 0)
    throw ArgumentError("arch: embeddingDim and hiddenDim must be positive");
  for (auto h : arch.ffnHidden)
    if (h == 0) throw ArgumentError("arch: zero-width feed-forward layer");
}

LstmDirectionParams zeroDirection(std::size_t d, std::size_t h) {
  LstmDirectionParams p;
  p.Wi = num::Mat(h, d); p.Ui = num::Mat(h, h); p.bi = num::Vec(h, 0.0);
  p.Wf = num::Mat(h, d); p.Uf = num::Mat(h, h); p.bf = num::Vec(h, 0.0);
  p.Wo = num::Mat(h, d); p.Uo = num::Mat(h, h); p.bo = num::Vec(h, 0.0);
  p.Wj = num::Mat(h, d); p.Uj = num::Mat(h, h); p.bj = num::Vec(h, 0.0);
  return p;
}

// Fixed canonical traversal shared by flatten, unflatten and layoutGroups.
template <class Params, class Visitor>
void walkParams(Params& p, Visitor& v) {
  auto direction = [&](auto& dir) {
    v.mat(dir.Wi); v.mat(dir.Ui); v.vec(dir.bi);
    v.mat(dir.Wf); v.mat(dir.Uf); v.vec(dir.bf);
    v.mat(dir.Wo); v.mat(dir.Uo); v.vec(dir.bo);
    v.mat(dir.Wj); v.mat(dir.Uj); v.vec(dir.bj);
  };
  direction(p.blstm1.forward);
  direction(p.blstm1.backward);
  direction(p.blstm2.forward);
  direction(p.blstm2.backward);
  v.vec(p.attn1.w); v.scalar(p.attn1.b);
  v.vec(p.attn2.w); v.scalar(p.attn2.b);
  for (auto& layer : p.ffn.layers) {
    v.mat(layer.weight);
    v.vec(layer.bias);
  }
}

struct FlatWriter {
  num::Vec& out;
  void mat(const num::Mat& m) { out.insert(out.end(), m.a.begin(), m.a.end()); }
  void vec(const num::Vec& v) { out.insert(out.end(), v.begin(), v.end()); }
  void scalar(const double& s) { out.push_back(s); }
};

struct FlatReader {
  const num::Vec& in;
  std::size_t pos = 0;
  void mat(num::Mat& m) {
    std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(pos), m.a.size(), m.a.begin());
    pos += m.a.size();
  }
  void vec(num::Vec& v) {
    std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(pos), v.size(), v.begin());
    pos += v.size();
  }
  void scalar(double& s) { s = in[pos++]; }
};

}  // namespace

ModelParams zeroModel(const ArchConfig& arch) {
  validateArch(arch);
  const std::size_t d = arch.embeddingDim;
  const std::size_t h = arch.hiddenDim;
  ModelParams p;
  p.blstm1.forward = zeroDirection(d, h);
  p.blstm1.backward = zeroDirection(d, h);
  p.blstm2.forward = zeroDirection(d, h);
  p.blstm2.backward = zeroDirection(d, h);
  p.attn1.w = num::Vec(2 * h, 0.0);
  p.attn2.w = num::Vec(2 * h, 0.0);
  const auto dims = arch.ffnDims();
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    p.ffn.layers.push_back({num::Mat(dims[l + 1], dims[l]), num::Vec(dims[l + 1], 0.0)});
  return p;
}

std::size_t paramCount(const ArchConfig& arch) {
  validateArch(arch);
  const std::size_t d = arch.embeddingDim;
  const std::size_t h = arch.hiddenDim;
  const std::size_t perDirection = 4 * (h * d + h * h + h);
  std::size_t count = 4 * perDirection;       // two BLSTMs, two directions each
  count += 2 * (2 * h + 1);                   // two attention heads
  const auto dims = arch.ffnDims();
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) count += dims[l + 1] * dims[l] + dims[l + 1];
  return count;
}

num::Vec flatten(const ModelParams& params) {
  num::Vec out;
  FlatWriter w{out};
  walkParams(params, w);
  return out;
}

ModelParams unflatten(const num::Vec& vec, const ArchConfig& arch) {
  const std::size_t expected = paramCount(arch);
  if (vec.size() != expected)
    throw ArgumentError("unflatten: vector length " + std::to_string(vec.size()) +
                        " does not match parameter count " + std::to_string(expected));
  ModelParams p = zeroModel(arch);
  FlatReader r{vec};
  walkParams(p, r);
  return p;
}

std::vector<std::pair<std::string, std::size_t>> layoutGroups(const ArchConfig& arch) {
  validateArch(arch);
  const std::size_t d = arch.embeddingDim;
  const std::size_t h = arch.hiddenDim;
  const std::size_t perDirection = 4 * (h * d + h * h + h);
  std::vector<std::pair<std::string, std::size_t>> groups{
      {"blstm1.fwd", perDirection}, {"blstm1.bwd", perDirection},
      {"blstm2.fwd", perDirection}, {"blstm2.bwd", perDirection},
      {"attn1", 2 * h + 1},         {"attn2", 2 * h + 1},
  };
  const auto dims = arch.ffnDims();
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    groups.emplace_back("ffn" + std::to_string(l), dims[l + 1] * dims[l] + dims[l + 1]);
  return groups;
}

ModelParams initRandom(const ArchConfig& arch, double scale, num::Rng& rng) {
  if (!(scale > 0.0)) throw ArgumentError("initRandom: scale must be > 0");
  const std::size_t D = paramCount(arch);
  num::Vec flat(D);
  for (auto& x : flat) x = rng.uniform(-scale, scale);
  return unflatten(flat, arch);
}

LstmStepTrace lstmStep(const LstmDirectionParams& params, const num::Vec& x,
                       const num::Vec& hPrev, const num::Vec& cPrev) {
  const std::size_t h = params.bi.size();
  if (params.Wi.cols != x.size() || hPrev.size() != h || cPrev.size() != h)
    throw ArgumentError("lstmStep: shape mismatch");
  LstmStepTrace t;
  t.i.resize(h); t.f.resize(h); t.o.resize(h); t.g.resize(h);
  t.c.resize(h); t.tanhC.resize(h); t.h.resize(h);

  auto gate = [&](const num::Mat& W, const num::Mat& U, const num::Vec& b, num::Vec& out,
                  bool sigmoidAct) {
    for (std::size_t k = 0; k < h; ++k) {
      const double* wRow = W.a.data() + k * W.cols;
      double s = b[k];
      for (std::size_t c = 0; c < W.cols; ++c) s += wRow[c] * x[c];
      const double* uRow = U.a.data() + k * U.cols;
      for (std::size_t c = 0; c < h; ++c) s += uRow[c] * hPrev[c];
      out[k] = sigmoidAct ? num::sigmoid(s) : std::tanh(s);
    }
  };
  gate(params.Wi, params.Ui, params.bi, t.i, true);
  gate(params.Wf, params.Uf, params.bf, t.f, true);
  gate(params.Wo, params.Uo, params.bo, t.o, true);
  gate(params.Wj, params.Uj, params.bj, t.g, false);

  for (std::size_t k = 0; k < h; ++k) {
    t.c[k] = t.f[k] * cPrev[k] + t.i[k] * t.g[k];
    t.tanhC[k] = std::tanh(t.c[k]);
    t.h[k] = t.o[k] * t.tanhC[k];
  }
  return t;
}

std::vector<num::Vec> blstmForward(const BlstmParams& params, const std::vector<num::Vec>& inputs,
                                   DirectionTrace* fwdTrace, DirectionTrace* bwdTrace) {
  if (inputs.empty()) throw ArgumentError("blstmForward: empty input sequence");
  const std::size_t T = inputs.size();
  const std::size_t h = params.forward.bi.size();
  if (params.backward.bi.size() != h)
    throw ArgumentError("blstmForward: direction hidden sizes differ");

  DirectionTrace fwd, bwd;
  fwd.steps.reserve(T);
  bwd.steps.reserve(T);
  num::Vec zero(h, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const num::Vec& hp = t == 0 ? zero : fwd.steps[t - 1].h;
    const num::Vec& cp = t == 0 ? zero : fwd.steps[t - 1].c;
    fwd.steps.push_back(lstmStep(params.forward, inputs[t], hp, cp));
  }
  for (std::size_t s = 0; s < T; ++s) {
    const num::Vec& hp = s == 0 ? zero : bwd.steps[s - 1].h;
    const num::Vec& cp = s == 0 ? zero : bwd.steps[s - 1].c;
    bwd.steps.push_back(lstmStep(params.backward, inputs[T - 1 - s], hp, cp));
  }

  std::vector<num::Vec> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    out[t].resize(2 * h);
    std::copy(fwd.steps[t].h.begin(), fwd.steps[t].h.end(), out[t].begin());
    const auto& bh = bwd.steps[T - 1 - t].h;  // step T-1-t processed input t
    std::copy(bh.begin(), bh.end(), out[t].begin() + static_cast<std::ptrdiff_t>(h));
  }
  if (fwdTrace) *fwdTrace = std::move(fwd);
  if (bwdTrace) *bwdTrace = std::move(bwd);
  return out;
}

std::pair<num::Vec, num::Vec> attentionPool(const AttentionParams& params,
                                            const std::vector<num::Vec>& states,
                                            num::Vec* logits) {
  if (states.empty()) throw ArgumentError("attentionPool: empty state sequence");
  const std::size_t T = states.size();
  num::Vec u(T);
  for (std::size_t t = 0; t < T; ++t) u[t] = std::tanh(num::dot(params.w, states[t]) + params.b);
  num::Vec weights = num::softmax(u);
  num::Vec pooled(states[0].size(), 0.0);
  for (std::size_t t = 0; t < T; ++t) num::axpy(pooled, weights[t], states[t]);
  if (logits) *logits = std::move(u);
  return {std::move(pooled), std::move(weights)};
}

double ffnForward(const FfnParams& params, const num::Vec& input, FfnTrace* trace) {
  if (params.layers.empty()) throw ArgumentError("ffnForward: no layers");
  if (params.layers.front().weight.cols != input.size())
    throw ArgumentError("ffnForward: input dimension mismatch");
  FfnTrace t;
  t.act.push_back(input);
  num::Vec cur = input;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    num::Vec z = num::matVec(layer.weight, cur);
    num::addInto(z, layer.bias);
    if (l + 1 < params.layers.size()) {
      for (auto& x : z) x = std::tanh(x);
      cur = z;
      t.act.push_back(cur);
    } else {
      if (z.size() != 1) throw ArgumentError("ffnForward: final layer must output a scalar");
      t.output = num::sigmoid(z[0]);
    }
  }
  if (trace) *trace = std::move(t);
  return trace ? trace->output : t.output;
}

namespace {

void branchForward(const BlstmParams& blstm, const AttentionParams& attn,
                   const std::vector<num::Vec>& inputs, BranchTrace& out) {
  out.states = blstmForward(blstm, inputs, &out.fwd, &out.bwd);
  auto pooled = attentionPool(attn, out.states, &out.attnLogits);
  out.pooled = std::move(pooled.first);
  out.attnWeights = std::move(pooled.second);
}

}  // namespace

double similarityForward(const ModelParams& params, const std::vector<num::Vec>& emb1,
                         const std::vector<num::Vec>& emb2, ForwardTrace* trace) {
  if (emb1.empty() || emb2.empty()) throw ArgumentError("similarityForward: empty sentence");
  ForwardTrace t;
  t.x1 = emb1;
  t.x2 = emb2;
  branchForward(params.blstm1, params.attn1, emb1, t.b1);
  branchForward(params.blstm2, params.attn2, emb2, t.b2);

  const std::size_t twoH = t.b1.pooled.size();
  if (t.b2.pooled.size() != twoH) throw ArgumentError("similarityForward: branch widths differ");
  t.ffnInput.resize(3 * twoH);
  for (std::size_t k = 0; k < twoH; ++k) {
    t.ffnInput[k] = t.b1.pooled[k];
    t.ffnInput[twoH + k] = t.b2.pooled[k];
    t.ffnInput[2 * twoH + k] = std::fabs(t.b2.pooled[k] - t.b1.pooled[k]);
  }
  t.similarity = ffnForward(params.ffn, t.ffnInput, &t.ffn);
  if (trace) *trace = std::move(t);
  return trace ? trace->similarity : t.similarity;
}

void saveModel(const ModelParams& params, const ArchConfig& arch, const std::string& path,
               const std::vector<std::string>& headerComments) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path);
  for (const auto& c : headerComments) out << "# " << c << '\n';
  out << "arch " << arch.embeddingDim << ' ' << arch.hiddenDim << ' ' << arch.ffnHidden.size();
  for (auto h : arch.ffnHidden) out << ' ' << h;
  out << '\n';
  const num::Vec flat = flatten(params);
  out << "params " << flat.size() << '\n';
  for (double v : flat) out << fmtG17(v) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

std::pair<ModelParams, ArchConfig> loadModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') break;
  }
  std::istringstream archLine(line);
  std::string tag;
  ArchConfig arch;
  std::size_t hiddenCount = 0;
  if (!(archLine >> tag >> arch.embeddingDim >> arch.hiddenDim >> hiddenCount) || tag != "arch")
    throw DataError("model file " + path + ": bad arch line");
  arch.ffnHidden.resize(hiddenCount);
  for (auto& h : arch.ffnHidden)
    if (!(archLine >> h)) throw DataError("model file " + path + ": truncated arch line");
  if (!std::getline(in, line)) throw DataError("model file " + path + ": missing params line");
  std::istringstream paramsLine(line);
  std::size_t D = 0;
  if (!(paramsLine >> tag >> D) || tag != "params")
    throw DataError("model file " + path + ": bad params line");
  if (D != paramCount(arch))
    throw DataError("model file " + path + ": params count " + std::to_string(D) +
                    " does not match architecture (" + std::to_string(paramCount(arch)) + ")");
  num::Vec flat(D);
  for (std::size_t i = 0; i < D; ++i) {
    if (!std::getline(in, line))
      throw DataError("model file " + path + ": truncated at value " + std::to_string(i));
    char* end = nullptr;
    flat[i] = std::strtod(line.c_str(), &end);
    if (end == line.c_str())
      throw DataError("model file " + path + ": bad value at line for index " + std::to_string(i));
  }
  return {unflatten(flat, arch), arch};
}

}  // namespace lstmabc::model
