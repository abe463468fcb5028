#pragma once

// Fourier machinery on J_M^d: exponential sums of snapped point sets, the
// closed-form transforms of discrete cubes, the lattice-sum transform of
// shifted balls, the sinc product G and the Bessel main term.

#include <complex>
#include <ostream>
#include <span>
#include <vector>

#include "discrepancy/bessel.hpp"
#include "discrepancy/core.hpp"
#include "discrepancy/fft.hpp"
#include "discrepancy/geometry.hpp"

namespace discrepancy::spectral {

using cplx = std::complex<double>;

/// Representative of k mod M in 0..M-1.
inline std::int64_t mod_index(std::int64_t k, std::int64_t m) {
  std::int64_t r = k % m;
  return r < 0 ? r + m : r;
}

/// exp(-2 pi i num/den)
inline cplx phase(std::int64_t num, std::int64_t den) {
  return {static_cast<double>(cos_2pi_frac(num, den)), static_cast<double>(-sin_2pi_frac(num, den))};
}

/// W(k) = sum_n exp(-2 pi i k.z_n/M) for every k in J_M^d, stored by k mod M.
class SpectralTable {
 public:
  SpectralTable(unsigned d, std::int64_t m, std::vector<cplx> values, std::vector<std::uint32_t> histogram)
      : d_(d), m_(m), values_(std::move(values)), histogram_(std::move(histogram)) {}

  unsigned dim() const { return d_; }
  std::int64_t resolution() const { return m_; }
  std::size_t cells() const { return values_.size(); }

  std::size_t flat(std::span<const std::int64_t> k) const {
    std::size_t f = 0;
    for (unsigned i = 0; i < d_; ++i) f = f * static_cast<std::size_t>(m_) + static_cast<std::size_t>(mod_index(k[i], m_));
    return f;
  }

  cplx at(std::span<const std::int64_t> k) const { return values_[flat(k)]; }
  cplx at_flat(std::size_t f) const { return values_[f]; }
  const std::vector<cplx>& values() const { return values_; }
  const std::vector<std::uint32_t>& histogram() const { return histogram_; }

  /// Centered frequency of a flat index: each component in J_M.
  void centered(std::size_t f, std::span<std::int64_t> k) const {
    for (unsigned i = d_; i-- > 0;) {
      const std::int64_t t = static_cast<std::int64_t>(f % static_cast<std::size_t>(m_));
      k[i] = t >= m_ / 2 ? t - m_ : t;
      f /= static_cast<std::size_t>(m_);
    }
  }

 private:
  unsigned d_;
  std::int64_t m_;
  std::vector<cplx> values_;
  std::vector<std::uint32_t> histogram_;
};

/// Histogram of z_n mod M followed by a d-dimensional FFT.
inline SpectralTable exp_sums(const SnappedSet& s, std::uint64_t cap = kDefaultCellCap) {
  require(s.m >= 2 && s.m % 2 == 0, ErrorCode::precondition, "exponential sums need an even M");
  const std::uint64_t cells = checked_cells(static_cast<std::uint64_t>(s.m), s.d, cap);
  std::vector<std::uint32_t> hist(cells, 0);
  for (std::size_t n = 0; n < s.size(); ++n) {
    std::size_t f = 0;
    for (unsigned i = 0; i < s.d; ++i) f = f * static_cast<std::size_t>(s.m) + static_cast<std::size_t>(mod_index(s.zc(n, i), s.m));
    ++hist[f];
  }
  std::vector<cplx> data(cells);
  for (std::size_t f = 0; f < cells; ++f) data[f] = cplx(hist[f], 0.0);
  fft::transform_nd(data, s.d, static_cast<std::size_t>(s.m));
  return SpectralTable(s.d, s.m, std::move(data), std::move(hist));
}

// ---------------------------------------------------------------- cubes

/// Phi_r(k) = exp(-pi i k/M) sin(2 pi k r/M) / sin(pi k/M), and 2r at k = 0 mod M.
inline cplx cube_factor(std::int64_t k, std::int64_t r, std::int64_t m) {
  if (mod_index(k, m) == 0) return {2.0 * static_cast<double>(r), 0.0};
  const long double num = sin_2pi_frac(k * r, m);
  const long double den = sin_2pi_frac(k, 2 * m);
  const long double ratio = num / den;
  return {static_cast<double>(cos_2pi_frac(k, 2 * m) * ratio), static_cast<double>(-sin_2pi_frac(k, 2 * m) * ratio)};
}

/// Transform of the discrete cube -Q(r/M): sum over m in (-r, r]^d of exp(-2 pi i k.m/M).
inline cplx cube_transform(std::span<const std::int64_t> k, std::int64_t r, std::int64_t m) {
  require(r >= 1 && r <= m / 2 - 1, ErrorCode::invalid_argument, "cube radius index must lie in 1..M/2-1");
  cplx out(1.0, 0.0);
  for (auto ku : k) out *= cube_factor(ku, r, m);
  return out;
}

/// sum_{r=1}^{M/2-1} |cube_transform(k, r)|^2 through the closed form
/// 4^d / (2^(3h) prod sin^2(pi k_u/M)) sum_r r^(2d-2h) prod (1 - cos(4 pi k_u r/M)),
/// h the number of nonzero components.
inline double radius_weight(std::span<const std::int64_t> k, std::int64_t m) {
  const unsigned d = static_cast<unsigned>(k.size());
  std::vector<std::int64_t> nz;
  for (auto ku : k)
    if (mod_index(ku, m) != 0) nz.push_back(ku);
  require(!nz.empty(), ErrorCode::invalid_argument, "radius_weight is defined for k != 0");
  const unsigned h = static_cast<unsigned>(nz.size());
  long double pre = std::pow(4.0L, static_cast<long double>(d)) / std::pow(2.0L, 3.0L * h);
  for (auto ku : nz) {
    const long double s = sin_2pi_frac(ku, 2 * m);
    pre /= s * s;
  }
  KahanSum<long double> sum;
  for (std::int64_t r = 1; r <= m / 2 - 1; ++r) {
    long double t = std::pow(static_cast<long double>(r), 2.0L * (d - h));
    for (auto ku : nz) t *= 1.0L - cos_2pi_frac(2 * ku * r, m);
    sum.add(t);
  }
  return static_cast<double>(pre * sum.value());
}

/// Term-by-term sum of |cube_transform|^2, the reference for radius_weight.
inline double radius_weight_direct(std::span<const std::int64_t> k, std::int64_t m) {
  KahanSum<long double> sum;
  for (std::int64_t r = 1; r <= m / 2 - 1; ++r) sum.add(std::norm(std::complex<long double>(cube_transform(k, r, m))));
  return static_cast<double>(sum.value());
}

/// #{r in 0..M/2-1 : 1 - cos(4 pi k r/M) <= 1 - cos(2 pi eps)}, exact: with
/// t = 2kr mod M the condition reads min(t, M-t) <= eps M.
inline std::int64_t cyclic_small_angle_count(std::int64_t k, std::int64_t m, Fraction eps) {
  require(m >= 2 && m % 2 == 0, ErrorCode::precondition, "M must be even");
  require(eps.num > 0 && 2 * eps.num < eps.den, ErrorCode::invalid_argument, "epsilon must lie in (0, 1/2)");
  const std::int64_t ak = k < 0 ? -k : k;
  require(ak > 0, ErrorCode::invalid_argument, "k must be nonzero");
  require(static_cast<i128>(ak) * eps.den <= static_cast<i128>(eps.num) * m, ErrorCode::precondition,
          "|k| exceeds eps M; the count bound is not asserted there");
  std::int64_t count = 0;
  for (std::int64_t r = 0; r < m / 2; ++r) {
    const std::int64_t t = static_cast<std::int64_t>((static_cast<i128>(2 * ak) * r) % m);
    const std::int64_t dist = std::min(t, m - t);
    if (static_cast<i128>(dist) * eps.den <= static_cast<i128>(eps.num) * m) ++count;
  }
  return count;
}

// ---------------------------------------------------------------- balls

/// G(xi) = prod sin(pi xi_j) / (pi xi_j), 1 at xi_j = 0.
inline double sinc_product_G(std::span<const double> xi) {
  long double out = 1.0L;
  for (double x : xi) {
    if (x == 0.0) continue;
    const long double px = kPiL * static_cast<long double>(x);
    out *= std::sin(px) / px;
  }
  return static_cast<double>(out);
}

/// G(k/M) with the sine argument reduced exactly.
inline double sinc_product_grid(std::span<const std::int64_t> k, std::int64_t m) {
  long double out = 1.0L;
  for (auto ku : k) {
    if (ku == 0) continue;
    const long double px = kPiL * static_cast<long double>(ku) / static_cast<long double>(m);
    out *= sin_2pi_frac(ku, 2 * m) / px;
  }
  return static_cast<double>(out);
}

/// Membership m in M(-B_r + q), i.e. |m/M - q| < r, shared by every ball evaluator.
inline bool in_shifted_ball(std::span<const std::int64_t> lattice, std::int64_t m, std::span<const double> q, double r) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const long double v = static_cast<long double>(lattice[i]) / static_cast<long double>(m) - static_cast<long double>(q[i]);
    s += v * v;
  }
  const long double rl = r;
  return s < rl * rl;
}

namespace detail {

/// Calls fn(lattice vector) for every m with |m/M - q| < r.
template <typename Fn>
void for_each_ball_point(std::int64_t m, std::span<const double> q, double r, Fn&& fn) {
  const std::size_t d = q.size();
  std::vector<std::int64_t> lo(d), hi(d), cur(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = static_cast<std::int64_t>(std::floor((q[i] - r) * static_cast<double>(m))) - 1;
    hi[i] = static_cast<std::int64_t>(std::ceil((q[i] + r) * static_cast<double>(m))) + 1;
    cur[i] = lo[i];
  }
  while (true) {
    if (in_shifted_ball(cur, m, q, r)) fn(std::span<const std::int64_t>(cur));
    std::size_t i = d;
    while (i-- > 0) {
      if (++cur[i] <= hi[i]) break;
      cur[i] = lo[i];
    }
    if (i == static_cast<std::size_t>(-1)) return;
  }
}

}  // namespace detail

/// hat chi_{-B_r+q}(k) = sum over m in M(-B_r+q) of exp(-2 pi i k.m/M).
inline cplx ball_transform(std::span<const std::int64_t> k, double r, std::int64_t m, std::span<const double> q) {
  require(r > 0.0 && r < 0.25, ErrorCode::invalid_argument, "ball radius must lie in (0, 1/4)");
  require(k.size() == q.size(), ErrorCode::dimension_mismatch, "frequency and residual dimensions differ");
  std::complex<long double> acc = 0;
  detail::for_each_ball_point(m, q, r, [&](std::span<const std::int64_t> v) {
    i128 dot = 0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += static_cast<i128>(k[i]) * v[i];
    const std::int64_t red = static_cast<std::int64_t>(((dot % m) + m) % m);
    acc += std::complex<long double>(cos_2pi_frac(red, m), -sin_2pi_frac(red, m));
  });
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

/// card M(-B_r + q)
inline std::int64_t ball_lattice_count(double r, std::int64_t m, std::span<const double> q) {
  std::int64_t count = 0;
  detail::for_each_ball_point(m, q, r, [&](std::span<const std::int64_t>) { ++count; });
  return count;
}

/// Volume of the d-dimensional Euclidean ball of radius rho, via Gamma(d/2+1)
/// in closed form for integer and half-integer arguments.
inline long double ball_volume(unsigned d, long double rho) {
  require(d >= 1 && d <= 20, ErrorCode::invalid_argument, "ball volume is provided for 1 <= d <= 20");
  // Gamma(d/2 + 1): k! for d = 2k, and (2k+1)!! sqrt(pi) / 2^(k+1) for d = 2k+1.
  long double gamma = 1.0L;
  if (d % 2 == 0) {
    for (unsigned i = 2; i <= d / 2; ++i) gamma *= i;
  } else {
    const unsigned k = (d - 1) / 2;
    long double dfact = 1.0L;
    for (unsigned i = 3; i <= 2 * k + 1; i += 2) dfact *= i;
    gamma = dfact * std::sqrt(kPiL) / std::pow(2.0L, static_cast<long double>(k + 1));
  }
  return std::pow(kPiL, d / 2.0L) * std::pow(rho, static_cast<long double>(d)) / gamma;
}

/// I_{k,M}(r) = (rM + sqrt d)^(d/2) J_{d/2}(2 pi (rM + sqrt d)|k|/M) / (|k|/M)^(d/2).
inline double bessel_main_term(std::span<const std::int64_t> k, double r, std::int64_t m) {
  const unsigned d = static_cast<unsigned>(k.size());
  long double k2 = 0.0L;
  for (auto ku : k) k2 += static_cast<long double>(ku) * static_cast<long double>(ku);
  require(k2 > 0.0L, ErrorCode::invalid_argument, "the Bessel main term is defined for k != 0");
  const long double rho = static_cast<long double>(r) * m + std::sqrt(static_cast<long double>(d));
  const long double kn = std::sqrt(k2) / static_cast<long double>(m);
  const double arg = static_cast<double>(2.0L * kPiL * rho * kn);
  return static_cast<double>(std::pow(rho / kn, d / 2.0L) * bessel::j_half_order(d, arg));
}

struct BallDecomposition {
  cplx transform;        // hat chi_{-B_r+q}(k)
  double g = 0.0;        // G(k/M)
  double main_term = 0;  // I_{k,M}(r)
  cplx remainder;        // hat chi G - I
  double region = 0.0;   // |E| = vol(ball of radius rM + sqrt d) - card M(-B_r+q)
  bool bounded = false;  // |remainder| <= |E|
};

inline BallDecomposition ball_decomposition_check(std::span<const std::int64_t> k, double r, std::int64_t m, std::span<const double> q) {
  BallDecomposition out;
  out.transform = ball_transform(k, r, m, q);
  out.g = sinc_product_grid(k, m);
  out.main_term = bessel_main_term(k, r, m);
  out.remainder = out.transform * out.g - out.main_term;
  const unsigned d = static_cast<unsigned>(k.size());
  const long double rho = static_cast<long double>(r) * m + std::sqrt(static_cast<long double>(d));
  out.region = static_cast<double>(ball_volume(d, rho) - static_cast<long double>(ball_lattice_count(r, m, q)));
  out.bounded = std::abs(out.remainder) <= out.region * (1.0 + 1e-12);
  return out;
}

/// CSV of the table: k_1..k_d, Re W, Im W, in J_M order.
inline void write_spectral_csv(std::ostream& out, const SpectralTable& t) {
  const unsigned d = t.dim();
  for (unsigned i = 0; i < d; ++i) out << 'k' << (i + 1) << ',';
  out << "re,im\n";
  const std::int64_t m = t.resolution();
  std::vector<std::int64_t> k(d, -m / 2);
  while (true) {
    for (unsigned i = 0; i < d; ++i) out << k[i] << ',';
    const cplx v = t.at(k);
    out << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
    unsigned i = d;
    while (i-- > 0) {
      if (++k[i] <= m / 2 - 1) break;
      k[i] = -m / 2;
    }
    if (i == static_cast<unsigned>(-1)) return;
  }
}

}  // namespace discrepancy::spectral
