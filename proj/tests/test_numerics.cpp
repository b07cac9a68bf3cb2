#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lstmabc/numerics.hpp"

using namespace lstmabc;
using namespace lstmabc::num;

TEST_CASE("sigmoid basics") {
  CHECK(sigmoid(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sigmoid(50.0) > 1.0 - 1e-9);
  CHECK(sigmoid(50.0) <= 1.0);
  CHECK(std::fabs(sigmoid(1.7) + sigmoid(-1.7) - 1.0) < 1e-12);
  // strictly inside (0,1) over the working range
  for (double x = -30.0; x <= 30.0; x += 0.37) {
    const double y = sigmoid(x);
    CHECK(y > 0.0);
    CHECK(y < 1.0);
  }
  // monotone
  double prev = sigmoid(-10.0);
  for (double x = -9.5; x <= 10.0; x += 0.5) {
    CHECK(sigmoid(x) > prev);
    prev = sigmoid(x);
  }
}

TEST_CASE("tanh activation basics") {
  CHECK(tanhAct(0.0) == 0.0);
  CHECK(std::fabs(tanhAct(-0.3) + tanhAct(0.3)) < 1e-12);
  CHECK(tanhAct(20.0) > 1.0 - 1e-8);
  CHECK(tanhAct(20.0) <= 1.0);
  for (double x = -15.0; x <= 15.0; x += 0.41) {
    CHECK(tanhAct(x) > -1.0);
    CHECK(tanhAct(x) < 1.0);
  }
}

TEST_CASE("softmax examples and stability") {
  const Vec uniform = softmax({0.0, 0.0});
  CHECK(uniform[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(uniform[1] == doctest::Approx(0.5).epsilon(1e-15));

  const Vec thirds = softmax({3.7, 3.7, 3.7});
  for (double v : thirds) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const Vec large = softmax({1000.0, 1000.0});
  CHECK(std::isfinite(large[0]));
  CHECK(large[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("softmax sums to one and is permutation-equivariant") {
  Rng rng(17);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t n = 1 + rng.index(8);
    Vec v(n);
    for (auto& x : v) x = rng.uniform(-40.0, 40.0);
    const Vec s = softmax(v);
    double sum = 0.0;
    for (double x : s) {
      CHECK(x > 0.0);
      sum += x;
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);

    // permute by rotation
    Vec rotated(n);
    const std::size_t shift = rng.index(n);
    for (std::size_t i = 0; i < n; ++i) rotated[i] = v[(i + shift) % n];
    const Vec sRot = softmax(rotated);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(sRot[i] == doctest::Approx(s[(i + shift) % n]).epsilon(1e-13));
  }
}

TEST_CASE("rng reproducibility and divergence across seeds") {
  Rng a(123), b(123), c(124);
  bool anyDiff = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.nextU64();
    CHECK(va == b.nextU64());
    if (va != c.nextU64()) anyDiff = true;
  }
  CHECK(anyDiff);
}

TEST_CASE("uniform contract") {
  Rng rng(7);
  CHECK(rng.uniform(2.0, 2.0) == 2.0);
  CHECK_THROWS_AS(rng.uniform(1.0, 0.0), ArgumentError);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.uniform(-1.0, 1.0);
    CHECK(v >= -1.0);
    CHECK(v < 1.0);
  }
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) mean += rng.uniform(0.0, 1.0);
  mean /= 100000.0;
  CHECK(mean > 0.497);
  CHECK(mean < 0.503);
}

TEST_CASE("gaussian contract and moments") {
  Rng rng(11);
  CHECK(rng.gaussian(3.0, 0.0) == 3.0);
  CHECK_THROWS_AS(rng.gaussian(0.0, -1.0), ArgumentError);
  double mean = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.gaussian(0.0, 1.0);
    mean += v;
    sq += v * v;
  }
  mean /= n;
  const double var = sq / n - mean * mean;
  CHECK(mean > -0.02);
  CHECK(mean < 0.02);
  CHECK(var > 0.97);
  CHECK(var < 1.03);
}

TEST_CASE("derived streams differ") {
  const auto s1 = Rng::derive(42, 0);
  const auto s2 = Rng::derive(42, 1);
  const auto s3 = Rng::derive(43, 0);
  CHECK(s1 != s2);
  CHECK(s1 != s3);
  CHECK(Rng::derive(42, 0) == s1);
}

TEST_CASE("dense kernels") {
  Mat m(2, 3);
  m(0, 0) = 1; m(0, 1) = 2; m(0, 2) = 3;
  m(1, 0) = 4; m(1, 1) = 5; m(1, 2) = 6;
  const Vec v{1.0, 0.0, -1.0};
  const Vec mv = matVec(m, v);
  CHECK(mv[0] == doctest::Approx(-2.0));
  CHECK(mv[1] == doctest::Approx(-2.0));

  Vec acc(3, 0.0);
  matTVecAcc(acc, m, {1.0, 1.0});
  CHECK(acc[0] == doctest::Approx(5.0));
  CHECK(acc[1] == doctest::Approx(7.0));
  CHECK(acc[2] == doctest::Approx(9.0));

  CHECK_THROWS_AS(matVec(m, {1.0}), ArgumentError);
  CHECK_THROWS_AS(dot({1.0}, {1.0, 2.0}), ArgumentError);
}
