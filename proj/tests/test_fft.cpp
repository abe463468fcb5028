#include <gtest/gtest.h>

#include <random>

#include "discrepancy/fft.hpp"
#include "oracles.hpp"

using namespace discrepancy;
using fft::cplx;

namespace {

std::vector<cplx> random_signal(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> x(n);
  for (auto& v : x) v = {u(rng), u(rng)};
  return x;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

class FftLength : public ::testing::TestWithParam<std::size_t> {};

TEST_P(FftLength, MatchesNaiveDft) {
  const std::size_t n = GetParam();
  auto x = random_signal(n, static_cast<unsigned>(n));
  const auto want = oracle::naive_dft(x);
  fft::Plan plan(n);
  plan.forward(x);
  EXPECT_LT(max_abs_diff(x, want), 1e-11 * static_cast<double>(n));
}

TEST_P(FftLength, InverseRoundTrip) {
  const std::size_t n = GetParam();
  const auto x = random_signal(n, 100 + static_cast<unsigned>(n));
  auto y = x;
  fft::Plan plan(n);
  plan.forward(y);
  plan.inverse(y);
  EXPECT_LT(max_abs_diff(x, y), 1e-12 * static_cast<double>(n));
}

// Mixed radices, primes above the direct-radix limit (Bluestein) and the
// 18 d N shapes used by the cube engine.
INSTANTIATE_TEST_SUITE_P(Lengths, FftLength,
                         ::testing::Values(1, 2, 3, 4, 5, 6, 7, 8, 12, 16, 18, 30, 49, 54, 64, 67, 97, 128, 134, 360, 1000, 1018));

TEST(Fft, FactorizationOrder) {
  EXPECT_EQ(fft::factorize(360), (std::vector<std::size_t>{4, 2, 3, 3, 5}));
  EXPECT_EQ(fft::factorize(97), (std::vector<std::size_t>{97}));
  EXPECT_TRUE(fft::factorize(1).empty());
}

TEST(Fft, MultiDimensionalMatchesSeparableNaive) {
  const std::size_t m = 6;
  auto x = random_signal(m * m * m, 3);
  std::vector<cplx> want(x.size());
  for (std::size_t k0 = 0; k0 < m; ++k0)
    for (std::size_t k1 = 0; k1 < m; ++k1)
      for (std::size_t k2 = 0; k2 < m; ++k2) {
        std::complex<long double> acc = 0;
        for (std::size_t a = 0; a < m; ++a)
          for (std::size_t b = 0; b < m; ++b)
            for (std::size_t c = 0; c < m; ++c) {
              const auto t = static_cast<std::int64_t>((a * k0 + b * k1 + c * k2) % m);
              const cplx v = x[(a * m + b) * m + c];
              acc += std::complex<long double>(v.real(), v.imag()) *
                     std::complex<long double>(cos_2pi_frac(t, m), -sin_2pi_frac(t, m));
            }
        want[(k0 * m + k1) * m + k2] = {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
      }
  fft::transform_nd(x, 3, m);
  EXPECT_LT(max_abs_diff(x, want), 1e-10);
}

TEST(Fft, PlancherelOnGrid) {
  for (unsigned d = 1; d <= 3; ++d) {
    const std::size_t m = d == 3 ? 16 : 64;
    std::size_t total = 1;
    for (unsigned i = 0; i < d; ++i) total *= m;
    auto x = random_signal(total, d);
    long double lhs = 0, rhs = 0;
    for (auto v : x) lhs += std::norm(v);
    fft::transform_nd(x, d, m);
    for (auto v : x) rhs += std::norm(v);
    rhs /= static_cast<long double>(total);
    EXPECT_LT(std::abs(static_cast<double>((lhs - rhs) / lhs)), 1e-10) << "d=" << d;
  }
}

TEST(Fft, NdInverseRoundTrip) {
  const std::size_t m = 10;
  const auto x = random_signal(m * m, 8);
  auto y = x;
  fft::transform_nd(y, 2, m);
  fft::transform_nd(y, 2, m, true);
  EXPECT_LT(max_abs_diff(x, y), 1e-12);
}
