#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lstmabc/common.hpp"

namespace lstmabc::num {

using Vec = std::vector<double>;

// Dense row-major matrix.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

double sigmoid(double x);
double tanhAct(double x);

// Numerically stable softmax (max subtraction before exponentiation).
Vec softmax(const Vec& v);

// xoshiro256** seeded through splitmix64. All randomness in the project flows
// through this generator so seeded runs reproduce bit-for-bit. Gaussian draws
// use the Marsaglia polar transform of uniform draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t nextU64();
  // Uniform in [0, 1), 53-bit resolution.
  double u01();
  // Uniform in [lo, hi); lo == hi returns lo.
  double uniform(double lo, double hi);
  // N(mean, stddev^2); stddev == 0 returns mean exactly.
  double gaussian(double mean, double stddev);
  // Uniform index in [0, n).
  std::size_t index(std::size_t n);

  // Deterministic child-seed derivation; distinct streams give independent
  // generators from one master seed.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t s_[4];
  bool hasSpare_ = false;
  double spare_ = 0.0;
};

// Small dense kernels used by the model and trainer.
double dot(const Vec& a, const Vec& b);
Vec matVec(const Mat& m, const Vec& v);
// acc += M^T v
void matTVecAcc(Vec& acc, const Mat& m, const Vec& v);
// m += r c^T
void outerAcc(Mat& m, const Vec& r, const Vec& c);
// y += a * x
void axpy(Vec& y, double a, const Vec& x);
// y += x
void addInto(Vec& y, const Vec& x);

}  // namespace lstmabc::num
