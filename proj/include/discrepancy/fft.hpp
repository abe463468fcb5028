#pragma once

// Complex FFT over binary64: recursive mixed radix for lengths whose prime
// factors are small, Bluestein's chirp-z otherwise, and an axis-by-axis
// multidimensional driver. Twiddles come from exactly reduced arguments.

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "discrepancy/core.hpp"

namespace discrepancy::fft {

using cplx = std::complex<double>;

inline constexpr std::size_t kMaxDirectRadix = 64;

inline std::vector<std::size_t> factorize(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t p : {4u, 2u, 3u, 5u}) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  for (std::size_t p = 7; p * p <= n; p += 2) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

/// Forward transform X(k) = sum_j x_j exp(-2 pi i jk/n) of one fixed length.
class Plan {
 public:
  explicit Plan(std::size_t n) : n_(n) {
    require(n >= 1, ErrorCode::invalid_argument, "FFT length must be positive");
    factors_ = factorize(n);
    for (auto p : factors_) bluestein_ = bluestein_ || p > kMaxDirectRadix;
    if (bluestein_) {
      init_bluestein();
    } else {
      twiddle_.resize(n);
      for (std::size_t k = 0; k < n; ++k) twiddle_[k] = unit(-static_cast<std::int64_t>(k), static_cast<std::int64_t>(n));
    }
  }

  std::size_t size() const { return n_; }

  void forward(std::span<cplx> data) const {
    require(data.size() == n_, ErrorCode::dimension_mismatch, "FFT buffer has the wrong length");
    if (n_ == 1) return;
    if (bluestein_) {
      run_bluestein(data);
      return;
    }
    std::vector<cplx> out(n_), scratch(n_);
    recurse(data.data(), 1, out.data(), scratch.data(), n_, 0);
    std::copy(out.begin(), out.end(), data.begin());
  }

  /// x_j = (1/n) sum_k X(k) exp(+2 pi i jk/n)
  void inverse(std::span<cplx> data) const {
    for (auto& v : data) v = std::conj(v);
    forward(data);
    const double s = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v = std::conj(v) * s;
  }

 private:
  static cplx unit(std::int64_t num, std::int64_t den) {
    return {static_cast<double>(cos_2pi_frac(num, den)), static_cast<double>(sin_2pi_frac(num, den))};
  }

  void recurse(const cplx* in, std::size_t stride, cplx* out, cplx* scratch, std::size_t n, std::size_t level) const {
    if (n == 1) {
      out[0] = in[0];
      return;
    }
    const std::size_t p = factors_[level];
    const std::size_t m = n / p;
    for (std::size_t r = 0; r < p; ++r) recurse(in + r * stride, stride * p, scratch + r * m, out + r * m, m, level + 1);
    // X[k + q m] = sum_r w_n^(r (k + q m)) Y_r[k]
    const std::size_t step = n_ / n;
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t q = 0; q < p; ++q) {
        const std::size_t kk = k + q * m;
        cplx acc = scratch[k];
        for (std::size_t r = 1; r < p; ++r) acc += scratch[r * m + k] * twiddle_[(r * kk % n) * step];
        out[kk] = acc;
      }
    }
  }

  void init_bluestein() {
    std::size_t len = 1;
    while (len < 2 * n_ - 1) len <<= 1;
    conv_ = std::make_unique<Plan>(len);
    chirp_.resize(n_);
    const std::int64_t two_n = 2 * static_cast<std::int64_t>(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      // exp(-pi i k^2 / n) with k^2 reduced mod 2n
      const std::int64_t k2 = static_cast<std::int64_t>((static_cast<u128>(k) * k) % static_cast<u128>(two_n));
      chirp_[k] = unit(-k2, two_n);
    }
    kernel_.assign(len, cplx(0, 0));
    kernel_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n_; ++k) {
      kernel_[k] = std::conj(chirp_[k]);
      kernel_[len - k] = std::conj(chirp_[k]);
    }
    conv_->forward(kernel_);
  }

  void run_bluestein(std::span<cplx> data) const {
    const std::size_t len = conv_->size();
    std::vector<cplx> a(len, cplx(0, 0));
    for (std::size_t k = 0; k < n_; ++k) a[k] = data[k] * chirp_[k];
    conv_->forward(a);
    for (std::size_t k = 0; k < len; ++k) a[k] *= kernel_[k];
    conv_->inverse(a);
    for (std::size_t k = 0; k < n_; ++k) data[k] = a[k] * chirp_[k];
  }

  std::size_t n_;
  std::vector<std::size_t> factors_;
  std::vector<cplx> twiddle_;
  bool bluestein_ = false;
  std::unique_ptr<Plan> conv_;
  std::vector<cplx> chirp_;
  std::vector<cplx> kernel_;
};

/// In-place d-dimensional transform of a row-major M^d array (last axis
/// fastest), one axis at a time. Lines are distributed over workers.
inline void transform_nd(std::vector<cplx>& data, unsigned d, std::size_t m, bool inverse = false) {
  std::size_t total = 1;
  for (unsigned i = 0; i < d; ++i) total *= m;
  require(data.size() == total, ErrorCode::dimension_mismatch, "array size is not M^d");
  const Plan plan(m);
  const std::size_t lines = total / m;
  std::size_t stride = 1;
  for (unsigned axis = 0; axis < d; ++axis) {
    const std::size_t block = stride * m;
    chunked_map<int>(lines, 64, [&](std::size_t begin, std::size_t end, std::size_t) {
      std::vector<cplx> line(m);
      for (std::size_t l = begin; l < end; ++l) {
        const std::size_t base = (l / stride) * block + (l % stride);
        for (std::size_t t = 0; t < m; ++t) line[t] = data[base + t * stride];
        if (inverse) {
          plan.inverse(line);
        } else {
          plan.forward(line);
        }
        for (std::size_t t = 0; t < m; ++t) data[base + t * stride] = line[t];
      }
      return 0;
    });
    stride = block;
  }
}

}  // namespace discrepancy::fft
