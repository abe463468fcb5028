#pragma once

// Toroidal cube discrepancy on the grid J_M^d with radii S_M, its direct and
// spectral l2 norms, and the ingredients of the torus-cube lower bound.

#include <optional>
#include <ostream>

#include "discrepancy/bounds.hpp"
#include "discrepancy/geometry.hpp"
#include "discrepancy/spectral.hpp"

namespace discrepancy::torus_cube {

namespace detail {

inline PointSet as_torus(const PointSet& p) { return p.mode() == PointMode::toroidal ? p : p.with_mode(PointMode::toroidal); }

inline void require_torus(const GridSpec& g) {
  require(g.kind() == GridKind::torus, ErrorCode::precondition, "cube discrepancy needs a torus grid");
}

/// Cyclic window sums of width 2r along one axis: out[j] = sum_{t=j-r}^{j+r-1} in[t mod M].
inline void box_filter_axis(const std::vector<std::int64_t>& in, std::vector<std::int64_t>& out, unsigned d, std::int64_t m,
                            unsigned axis, std::int64_t r, std::vector<std::int64_t>& prefix) {
  std::size_t stride = 1;
  for (unsigned i = axis + 1; i < d; ++i) stride *= static_cast<std::size_t>(m);
  const std::size_t block = stride * static_cast<std::size_t>(m);
  const std::size_t lines = in.size() / static_cast<std::size_t>(m);
  prefix.resize(static_cast<std::size_t>(m) + 1);
  for (std::size_t l = 0; l < lines; ++l) {
    const std::size_t base = (l / stride) * block + (l % stride);
    prefix[0] = 0;
    for (std::int64_t t = 0; t < m; ++t) prefix[t + 1] = prefix[t] + in[base + static_cast<std::size_t>(t) * stride];
    for (std::int64_t j = 0; j < m; ++j) {
      const std::int64_t a = spectral::mod_index(j - r, m);
      const std::int64_t e = a + 2 * r;
      const std::int64_t s = e <= m ? prefix[e] - prefix[a] : prefix[m] - prefix[a] + prefix[e - m];
      out[base + static_cast<std::size_t>(j) * stride] = s;
    }
  }
}

inline std::vector<std::int64_t> histogram(const SnappedSet& s) {
  std::vector<std::int64_t> h(checked_cells(static_cast<std::uint64_t>(s.m), s.d, kDefaultCellCap << 4), 0);
  for (std::size_t n = 0; n < s.size(); ++n) {
    std::size_t f = 0;
    for (unsigned i = 0; i < s.d; ++i) f = f * static_cast<std::size_t>(s.m) + static_cast<std::size_t>(spectral::mod_index(s.zc(n, i), s.m));
    ++h[f];
  }
  return h;
}

/// Counts #{n : z_n in [j - r, j + r) mod M} for every center j, flat by j mod M.
inline std::vector<std::int64_t> cube_counts(const std::vector<std::int64_t>& hist, unsigned d, std::int64_t m, std::int64_t r) {
  std::vector<std::int64_t> a = hist, b(hist.size()), prefix;
  for (unsigned axis = 0; axis < d; ++axis) {
    box_filter_axis(a, b, d, m, axis, r, prefix);
    a.swap(b);
  }
  return a;
}

}  // namespace detail

/// D_N(j/M, r/M) = #{n : p_n in j/M + Q(r/M)} - N (2r/M)^d, exact. The cube
/// is the wrapped half-open box [x - s, x + s) per coordinate.
inline Rational cube_disc(const PointSet& p, std::span<const std::int64_t> j, std::int64_t r, std::int64_t m) {
  require(j.size() == p.dim(), ErrorCode::dimension_mismatch, "center dimension differs from the point set");
  require(m >= 4 && m % 2 == 0, ErrorCode::precondition, "M must be even and at least 4");
  require(r >= 1 && r <= m / 2 - 1, ErrorCode::invalid_argument, "s = r/M must lie in S_M");
  const auto s = snap_corner(detail::as_torus(p), GridSpec::torus(p.dim(), m));
  std::int64_t count = 0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    bool in = true;
    for (unsigned i = 0; i < s.d && in; ++i) in = spectral::mod_index(s.zc(n, i) - (j[i] - r), m) < 2 * r;
    count += in;
  }
  Rational vol(integer_pow(static_cast<std::uint64_t>(2 * r), p.dim()), integer_pow(static_cast<std::uint64_t>(m), p.dim()));
  vol.canonicalize();
  return Rational(count) - Rational(static_cast<long>(p.size())) * vol;
}

struct EnsembleNorm {
  Rational sum_squares;  // sum over s in S_M, j in J_M^d of D^2
  Rational l2_squared;   // sum_squares / (M^d (M/2 - 1))
  double l2 = 0.0;
};

/// Direct path: box-filter counts for every radius, exact in rational arithmetic.
/// Uses sum_j D^2 = sum_j c^2 - N^2 (2r)^(2d) / M^d, since sum_j c = N (2r)^d.
inline EnsembleNorm ensemble_l2_direct(const PointSet& p, const GridSpec& g, std::uint64_t cap = kDefaultCellCap) {
  detail::require_torus(g);
  check_dims(p, g);
  const unsigned d = g.dim();
  const std::int64_t m = g.resolution();
  require(m >= 4, ErrorCode::precondition, "M must be at least 4");
  checked_cells(static_cast<std::uint64_t>(m), d, cap);
  const auto s = snap_corner(detail::as_torus(p), g);
  const auto hist = detail::histogram(s);
  const std::int64_t radii = m / 2 - 1;
  const auto parts = chunked_map<u128>(static_cast<std::size_t>(radii), 32, [&](std::size_t begin, std::size_t end, std::size_t) {
    u128 acc = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto c = detail::cube_counts(hist, d, m, static_cast<std::int64_t>(i) + 1);
      for (auto v : c) acc += static_cast<u128>(v) * static_cast<u128>(v);
    }
    return acc;
  });
  u128 squares = 0;
  for (auto v : parts) squares += v;
  Integer vol_sum = 0;
  for (std::int64_t r = 1; r <= radii; ++r) vol_sum += integer_pow(static_cast<std::uint64_t>(2 * r), 2 * d);
  const Integer md = integer_pow(static_cast<std::uint64_t>(m), d);
  const Integer n2 = to_integer(static_cast<i128>(s.size()) * static_cast<i128>(s.size()));
  EnsembleNorm out;
  out.sum_squares = Rational(to_integer_unsigned(squares)) - Rational(n2 * vol_sum, md);
  out.sum_squares.canonicalize();
  out.l2_squared = out.sum_squares / (Rational(md) * radii);
  out.l2 = std::sqrt(static_cast<double>(to_long_double(out.l2_squared)));
  return out;
}

/// Fast evaluator of radius_weight for every k of one grid. Expanding
/// prod (1 - cos(theta_u r)) into cosines of signed frequency sums turns the
/// r-sum into lookups of C_e[t] = sum_r r^(2e) cos(4 pi t r / M).
class RadiusWeightTable {
 public:
  RadiusWeightTable(unsigned d, std::int64_t m) : d_(d), m_(m), c_(d) {
    require(m >= 4 && m % 2 == 0, ErrorCode::precondition, "M must be even and at least 4");
    const std::size_t mm = static_cast<std::size_t>(m);
    for (auto& row : c_) row.assign(mm, 0.0L);
    chunked_map<int>(mm, 64, [&](std::size_t begin, std::size_t end, std::size_t) {
      for (std::size_t t = begin; t < end; ++t) {
        std::vector<KahanSum<long double>> acc(d_);
        for (std::int64_t r = 1; r <= m_ / 2 - 1; ++r) {
          const long double c = cos_2pi_frac(static_cast<std::int64_t>((2 * static_cast<i128>(t) * r) % m_), m_);
          long double w = c;
          const long double r2 = static_cast<long double>(r) * static_cast<long double>(r);
          for (unsigned e = 0; e < d_; ++e) {
            acc[e].add(w);
            w *= r2;
          }
        }
        for (unsigned e = 0; e < d_; ++e) c_[e][t] = acc[e].value();
      }
      return 0;
    });
  }

  double operator()(std::span<const std::int64_t> k) const {
    std::int64_t nz[16];
    unsigned h = 0;
    for (auto ku : k)
      if (spectral::mod_index(ku, m_) != 0) nz[h++] = ku;
    require(h > 0, ErrorCode::invalid_argument, "radius_weight is defined for k != 0");
    long double pre = std::pow(4.0L, static_cast<long double>(d_)) / std::pow(2.0L, 3.0L * h);
    for (unsigned u = 0; u < h; ++u) {
      const long double s = sin_2pi_frac(nz[u], 2 * m_);
      pre /= s * s;
    }
    const auto& row = c_[d_ - h];
    // Each factor contributes 1, -e^{+}/2 or -e^{-}/2: a base-3 digit per nonzero component.
    long double sum = 0.0L;
    unsigned total = 1;
    for (unsigned u = 0; u < h; ++u) total *= 3;
    for (unsigned code = 0; code < total; ++code) {
      unsigned c = code;
      std::int64_t freq = 0;
      long double coef = 1.0L;
      for (unsigned u = 0; u < h; ++u, c /= 3) {
        if (c % 3 == 1) {
          freq += nz[u];
          coef *= -0.5L;
        } else if (c % 3 == 2) {
          freq -= nz[u];
          coef *= -0.5L;
        }
      }
      sum += coef * row[static_cast<std::size_t>(spectral::mod_index(freq, m_))];
    }
    return static_cast<double>(pre * sum);
  }

 private:
  unsigned d_;
  std::int64_t m_;
  std::vector<std::vector<long double>> c_;
};

/// ||D_N||^2 = (M^(2d) (M/2 - 1))^-1 sum_{k != 0} |W(k)|^2 radius_weight(k).
inline double spectral_l2_squared(const spectral::SpectralTable& t) {
  const unsigned d = t.dim();
  const std::int64_t m = t.resolution();
  require(d <= 16, ErrorCode::invalid_argument, "dimension too large for the spectral path");
  const RadiusWeightTable weights(d, m);
  const auto parts = chunked_map<long double>(t.cells(), 64, [&](std::size_t begin, std::size_t end, std::size_t) {
    KahanSum<long double> acc;
    std::vector<std::int64_t> k(d);
    for (std::size_t f = std::max<std::size_t>(begin, 1); f < end; ++f) {
      t.centered(f, k);
      acc.add(static_cast<long double>(std::norm(t.at_flat(f))) * weights(k));
    }
    return acc.value();
  });
  KahanSum<long double> total;
  for (auto v : parts) total.add(v);
  const long double norm = std::pow(static_cast<long double>(m), 2.0L * d) * static_cast<long double>(m / 2 - 1);
  return static_cast<double>(total.value() / norm);
}

inline double spectral_l2(const spectral::SpectralTable& t) { return std::sqrt(spectral_l2_squared(t)); }

/// Spectral path from a point set.
inline double ensemble_l2_spectral(const PointSet& p, const GridSpec& g, std::uint64_t cap = kDefaultCellCap) {
  detail::require_torus(g);
  return spectral_l2(spectral::exp_sums(snap_corner(detail::as_torus(p), g), cap));
}

/// (1/(d-1)!) (log+ (p / prod max(1,|k_u|)))^(d-1). For d = 1 the nested
/// integral is empty and the value is the indicator of |k| <= p.
inline double log_box_weight(std::span<const std::int64_t> k, double p, unsigned d) {
  require(p >= 1.0, ErrorCode::invalid_argument, "p must be at least 1");
  require(k.size() == d, ErrorCode::dimension_mismatch, "frequency dimension differs from d");
  long double prod = 1.0L;
  for (auto ku : k) prod *= static_cast<long double>(std::max<std::int64_t>(1, ku < 0 ? -ku : ku));
  if (d == 1) return prod <= p ? 1.0 : 0.0;
  const long double lg = std::log(static_cast<long double>(p) / prod);
  if (lg <= 0.0L) return 0.0;
  return static_cast<double>(std::pow(lg, static_cast<long double>(d - 1)) / static_cast<long double>(factorial(d - 1)));
}

/// t^2 >= (2e/l)^l (log+ t)^l, with a relative slack of 1e-12 at the equality point t = e^(l/2).
inline bool lemma_log_check(double t, unsigned ell) {
  require(ell >= 1, ErrorCode::invalid_argument, "l must be a positive integer");
  const long double tl = t;
  const long double lg = tl > 1.0L ? std::log(tl) : 0.0L;
  const long double rhs = std::pow(2.0L * std::exp(1.0L) / ell, static_cast<long double>(ell)) * std::pow(lg, static_cast<long double>(ell));
  return tl * tl >= rhs * (1.0L - 1e-12L);
}

struct Proposition7 {
  double weight = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// radius_weight(k) against 2 4^d eta_d(eps) / (pi^(2d) prod max(1,|k_u|)^2) floor(M/4)^(2d+1).
inline Proposition7 proposition7_check(std::span<const std::int64_t> k, std::int64_t m, double eps) {
  const unsigned d = static_cast<unsigned>(k.size());
  require(eps > 0.0 && eps < 1.0 / (8.0 * d), ErrorCode::precondition, "epsilon must lie in (0, 1/(8d))");
  bool nonzero = false;
  for (auto ku : k) {
    const std::int64_t a = ku < 0 ? -ku : ku;
    require(static_cast<double>(a) <= eps * static_cast<double>(m), ErrorCode::precondition, "each |k_u| must be at most eps M");
    nonzero = nonzero || a != 0;
  }
  require(nonzero, ErrorCode::precondition, "k must be nonzero");
  Proposition7 out;
  out.weight = spectral::radius_weight(k, m);
  out.bound = bounds::radius_weight_lower_bound(k, m, eps);
  out.holds = out.weight >= out.bound;
  return out;
}

struct CasselsMontgomery {
  double sum = 0.0;    // sum over 0 != k in R_(x) of |W(k)|^2
  double bound = 0.0;  // pN - N^2
  bool holds = false;
};

/// One box R_(x) = prod [-x_u, x_u] x [-p/(x_1...x_{d-1}), p/(x_1...x_{d-1})].
inline CasselsMontgomery cassels_montgomery_check(const spectral::SpectralTable& t, std::int64_t p, std::span<const double> x) {
  const unsigned d = t.dim();
  const std::int64_t m = t.resolution();
  require(x.size() + 1 == d, ErrorCode::dimension_mismatch, "the box family needs d - 1 side lengths");
  require(p >= 1 && 2 * p < m, ErrorCode::precondition, "p must satisfy 1 <= p < M/2 so the box stays inside J_M^d");
  std::vector<std::int64_t> half(d);
  double prod = 1.0;
  for (unsigned u = 0; u + 1 < d; ++u) {
    require(x[u] >= 1.0, ErrorCode::invalid_argument, "side lengths must be at least 1");
    half[u] = static_cast<std::int64_t>(std::floor(x[u]));
    prod *= x[u];
  }
  half[d - 1] = static_cast<std::int64_t>(std::floor(static_cast<double>(p) / prod));
  for (auto h : half) require(h < m / 2, ErrorCode::precondition, "box leaves J_M^d");
  const double n = t.at_flat(0).real();
  KahanSum<long double> acc;
  std::vector<std::int64_t> k(d);
  for (unsigned u = 0; u < d; ++u) k[u] = -half[u];
  while (true) {
    bool zero = true;
    for (auto v : k) zero = zero && v == 0;
    if (!zero) acc.add(std::norm(t.at(k)));
    unsigned u = d;
    while (u-- > 0) {
      if (++k[u] <= half[u]) break;
      k[u] = -half[u];
    }
    if (u == static_cast<unsigned>(-1)) break;
  }
  CasselsMontgomery out;
  out.sum = static_cast<double>(acc.value());
  out.bound = static_cast<double>(p) * n - n * n;
  out.holds = out.sum >= out.bound - 1e-9 * std::max(1.0, std::abs(out.bound));
  return out;
}

/// Scans the family on a geometric grid of side lengths, steps + 1 values per
/// axis with x_u ranging over [1, p / (x_1...x_{u-1})]; returns the tightest box.
inline CasselsMontgomery cassels_montgomery_family(const spectral::SpectralTable& t, std::int64_t p, unsigned steps = 16) {
  const unsigned d = t.dim();
  CasselsMontgomery worst;
  bool first = true;
  std::vector<double> x(d - 1, 1.0);
  std::vector<unsigned> idx(d - 1, 0);
  while (true) {
    double rest = static_cast<double>(p);
    for (unsigned u = 0; u + 1 < d; ++u) {
      x[u] = std::pow(rest, static_cast<double>(idx[u]) / steps);
      rest /= x[u];
    }
    const auto res = cassels_montgomery_check(t, p, x);
    if (first || res.sum - res.bound < worst.sum - worst.bound) worst = res;
    first = false;
    if (!res.holds) worst = res;
    unsigned u = d - 1;
    while (u-- > 0) {
      if (++idx[u] <= steps) break;
      idx[u] = 0;
    }
    if (u == static_cast<unsigned>(-1)) break;
  }
  worst.holds = worst.sum >= worst.bound - 1e-9 * std::max(1.0, std::abs(worst.bound));
  return worst;
}

/// Smallest even M >= 18 d N.
inline std::int64_t theorem2_resolution(unsigned d, std::uint64_t n) {
  const std::int64_t m = 18 * static_cast<std::int64_t>(d) * static_cast<std::int64_t>(n);
  return m % 2 == 0 ? m : m + 1;
}

/// lhs = ||D_N||_2 over J_M^d x S_M (spectral path), rhs^2 = halasz_constant_squared(d) log(2N)^(d-1).
inline bounds::BoundReport theorem2_verify(const PointSet& p, std::optional<std::int64_t> m_override = {}, std::string tag = {},
                                           bool cross_check = false, std::uint64_t cap = kDefaultCellCap) {
  const unsigned d = p.dim();
  const std::uint64_t n = p.size();
  const std::int64_t floor_m = theorem2_resolution(d, n);
  const std::int64_t m = m_override.value_or(floor_m);
  require(m % 2 == 0, ErrorCode::precondition, "M must be even");
  require(m >= floor_m, ErrorCode::precondition,
          "M = " + std::to_string(m) + " is below the 18 d N = " + std::to_string(floor_m) + " floor of the torus-cube bound");
  const GridSpec g = GridSpec::torus(d, m);
  const auto table = spectral::exp_sums(snap_corner(detail::as_torus(p), g), cap);
  const double eps = 1.0 / (9.0 * d);

  bounds::BoundReport rep;
  rep.theorem = "2";
  rep.lhs_squared = spectral_l2_squared(table);
  rep.lhs = std::sqrt(rep.lhs_squared);
  rep.rhs_squared = bounds::halasz_rhs_squared(d, n);
  rep.rhs = std::sqrt(rep.rhs_squared);
  const auto conv = d == 1 ? bounds::ConstantSource::convention : bounds::ConstantSource::paper_explicit;
  rep.constants = {
      {"epsilon", eps, bounds::ConstantSource::paper_explicit},
      {"eta_d(epsilon)", bounds::eta(d, eps), bounds::ConstantSource::paper_explicit},
      {"(e/(d-1))^(d-1)", bounds::e_factor(d), conv},
      {"log(2N)^(d-1)", d == 1 ? 1.0 : std::pow(std::log(2.0 * static_cast<double>(n)), d - 1.0), conv},
      {"halasz_c", bounds::halasz_constant(d), bounds::ConstantSource::paper_explicit},
  };
  rep.input = {n, d, m, std::nullopt, std::nullopt, std::nullopt, std::move(tag)};
  bounds::finalize(rep);
  rep.extra["path"] = "spectral";
  if (cross_check) {
    const auto direct = ensemble_l2_direct(p, g, cap);
    rep.extra["direct_l2_squared_exact"] = to_string(direct.l2_squared);
    rep.extra["direct_l2"] = direct.l2;
  }
  return rep;
}

/// CSV of (j, r, s, D) over J_M^d x S_M.
inline void write_cube_field_csv(std::ostream& out, const PointSet& p, const GridSpec& g) {
  detail::require_torus(g);
  const unsigned d = g.dim();
  const std::int64_t m = g.resolution();
  const auto s = snap_corner(detail::as_torus(p), g);
  const auto hist = detail::histogram(s);
  for (unsigned i = 0; i < d; ++i) out << 'j' << (i + 1) << ',';
  out << "r,s,discrepancy\n";
  const long double n = static_cast<long double>(s.size());
  for (std::int64_t r = 1; r <= m / 2 - 1; ++r) {
    const auto c = detail::cube_counts(hist, d, m, r);
    const long double vol = std::pow(2.0L * r / m, static_cast<long double>(d));
    std::vector<std::int64_t> j(d, -m / 2);
    while (true) {
      std::size_t f = 0;
      for (unsigned i = 0; i < d; ++i) {
        out << j[i] << ',';
        f = f * static_cast<std::size_t>(m) + static_cast<std::size_t>(spectral::mod_index(j[i], m));
      }
      out << r << ',' << format_double(static_cast<double>(r) / static_cast<double>(m)) << ','
          << format_double(static_cast<double>(static_cast<long double>(c[f]) - n * vol)) << '\n';
      unsigned i = d;
      while (i-- > 0) {
        if (++j[i] <= m / 2 - 1) break;
        j[i] = -m / 2;
      }
      if (i == static_cast<unsigned>(-1)) break;
    }
  }
}

/// CSV of (k, radius_weight) over J_M^d \ {0}.
inline void write_radius_weight_csv(std::ostream& out, unsigned d, std::int64_t m) {
  const RadiusWeightTable w(d, m);
  for (unsigned i = 0; i < d; ++i) out << 'k' << (i + 1) << ',';
  out << "radius_weight\n";
  std::vector<std::int64_t> k(d, -m / 2);
  while (true) {
    bool zero = true;
    for (auto v : k) zero = zero && v == 0;
    if (!zero) {
      for (auto v : k) out << v << ',';
      out << format_double(w(k)) << '\n';
    }
    unsigned i = d;
    while (i-- > 0) {
      if (++k[i] <= m / 2 - 1) break;
      k[i] = -m / 2;
    }
    if (i == static_cast<unsigned>(-1)) return;
  }
}

}  // namespace discrepancy::torus_cube
