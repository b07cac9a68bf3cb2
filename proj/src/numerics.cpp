#include "lstmabc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace lstmabc {

std::string fmtG17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmtG12(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace lstmabc

namespace lstmabc::num {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double tanhAct(double x) { return std::tanh(x); }

Vec softmax(const Vec& v) {
  if (v.empty()) throw ArgumentError("softmax: empty vector");
  const double mx = *std::max_element(v.begin(), v.end());
  Vec out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (double& e : out) e /= sum;
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::nextU64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::u01() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) {
  if (!(lo <= hi)) throw ArgumentError("uniform: lo > hi");
  if (lo == hi) return lo;
  double r = lo + u01() * (hi - lo);
  if (r >= hi) r = std::nextafter(hi, lo);
  return r;
}

double Rng::gaussian(double mean, double stddev) {
  if (stddev < 0.0) throw ArgumentError("gaussian: negative stddev");
  if (stddev == 0.0) return mean;
  if (hasSpare_) {
    hasSpare_ = false;
    return mean + stddev * spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * u01() - 1.0;
    v = 2.0 * u01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  hasSpare_ = true;
  return mean + stddev * (u * m);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw ArgumentError("Rng::index: n == 0");
  return static_cast<std::size_t>(nextU64() % n);
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
  splitmix64(x);
  return splitmix64(x);
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ArgumentError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec matVec(const Mat& m, const Vec& v) {
  if (m.cols != v.size()) throw ArgumentError("matVec: dimension mismatch");
  Vec out(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.a.data() + r * m.cols;
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) s += row[c] * v[c];
    out[r] = s;
  }
  return out;
}

void matTVecAcc(Vec& acc, const Mat& m, const Vec& v) {
  if (m.rows != v.size() || m.cols != acc.size())
    throw ArgumentError("matTVecAcc: dimension mismatch");
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.a.data() + r * m.cols;
    const double vr = v[r];
    for (std::size_t c = 0; c < m.cols; ++c) acc[c] += row[c] * vr;
  }
}

void outerAcc(Mat& m, const Vec& r, const Vec& c) {
  if (m.rows != r.size() || m.cols != c.size())
    throw ArgumentError("outerAcc: dimension mismatch");
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* row = m.a.data() + i * m.cols;
    const double ri = r[i];
    for (std::size_t j = 0; j < m.cols; ++j) row[j] += ri * c[j];
  }
}

void axpy(Vec& y, double a, const Vec& x) {
  if (y.size() != x.size()) throw ArgumentError("axpy: size mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

void addInto(Vec& y, const Vec& x) {
  if (y.size() != x.size()) throw ArgumentError("addInto: size mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
}

}  // namespace lstmabc::num
