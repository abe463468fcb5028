#pragma once

// Toroidal ball discrepancy on J_M^d at radii r and 2r: exact lattice counts
// via per-row intervals, the two-radius l2 norm by three independent routes,
// the per-point Fourier formula, the cosine separation scan and the
// calibrated lower-bound verdict.

#include <algorithm>
#include <optional>
#include <ostream>

#include "discrepancy/bounds.hpp"
#include "discrepancy/fft.hpp"
#include "discrepancy/geometry.hpp"
#include "discrepancy/spectral.hpp"

namespace discrepancy::torus_ball {

/// Default multiplier C in the resolution floor M >= C N^(1 + 1/(2d)) / r.
inline constexpr double kResolutionConstant = 8.0;

/// c in lhs >= c r^(d/2) N^(1/2 - 1/(2d)). Frozen from the calibration run in
/// tools/calibrate_ball.cpp: d = 2, r = 0.2, N in {4, 8, 16, 32}, 20 random
/// seeds plus lattice and Hammersley sets; minimum ratio 2.200641 (lattice,
/// N = 16), halved and truncated.
inline constexpr double kCalibratedConstant = 1.1003;

/// |B_r| = pi^(d/2) r^d / Gamma(d/2 + 1)
inline double ball_measure(unsigned d, double r) { return static_cast<double>(spectral::ball_volume(d, r)); }

namespace detail {

inline PointSet as_torus(const PointSet& p) { return p.mode() == PointMode::toroidal ? p : p.with_mode(PointMode::toroidal); }

inline void require_radius(double rho) {
  require(rho > 0.0 && rho < 0.5, ErrorCode::invalid_argument, "ball radius must lie in (0, 1/2) for a single torus image");
}

/// The lattice points j (unwrapped, near M p) with |p - j/M| < rho, stored
/// as one interval of the last coordinate per row of the first d - 1.
class BallRows {
 public:
  BallRows(std::span<const long double> p, double rho, std::int64_t m) : d_(static_cast<unsigned>(p.size())), m_(m), p_(p.begin(), p.end()) {
    const long double rl = rho;
    r2_ = rl * rl;
    lo_.resize(d_);
    extent_.resize(d_);
    for (unsigned i = 0; i < d_; ++i) {
      lo_[i] = static_cast<std::int64_t>(std::floor((p_[i] - rl) * m)) - 1;
      extent_[i] = static_cast<std::int64_t>(std::ceil((p_[i] + rl) * m)) + 1 - lo_[i] + 1;
    }
    std::size_t rows = 1;
    for (unsigned i = 0; i + 1 < d_; ++i) rows *= static_cast<std::size_t>(extent_[i]);
    first_.assign(rows, 0);
    last_.assign(rows, -1);
    std::vector<std::int64_t> row(d_ > 1 ? d_ - 1 : 0);
    for (std::size_t f = 0; f < rows; ++f) {
      std::size_t g = f;
      long double rest = 0.0L;
      for (unsigned i = d_ - 1; i-- > 0;) {
        row[i] = lo_[i] + static_cast<std::int64_t>(g % static_cast<std::size_t>(extent_[i]));
        g /= static_cast<std::size_t>(extent_[i]);
        const long double v = p_[i] - static_cast<long double>(row[i]) / m_;
        rest += v * v;
      }
      if (rest >= r2_) continue;
      const long double half = std::sqrt(r2_ - rest);
      const long double c = p_[d_ - 1];
      std::int64_t a = static_cast<std::int64_t>(std::ceil((c - half) * m_));
      std::int64_t b = static_cast<std::int64_t>(std::floor((c + half) * m_));
      // Settle the ends on the exact predicate.
      while (a <= b && !member(rest, a)) ++a;
      while (member(rest, a - 1)) --a;
      while (b >= a && !member(rest, b)) --b;
      while (member(rest, b + 1)) ++b;
      first_[f] = a;
      last_[f] = b;
    }
  }

  unsigned dim() const { return d_; }
  std::size_t rows() const { return first_.size(); }
  std::int64_t row_lo(unsigned i) const { return lo_[i]; }
  std::int64_t row_extent(unsigned i) const { return extent_[i]; }
  std::int64_t first(std::size_t f) const { return first_[f]; }
  std::int64_t last(std::size_t f) const { return last_[f]; }

  std::int64_t count() const {
    std::int64_t c = 0;
    for (std::size_t f = 0; f < rows(); ++f) c += std::max<std::int64_t>(0, last_[f] - first_[f] + 1);
    return c;
  }

  /// Row index of a torus row (first d - 1 coordinates mod M), if the box has it.
  std::optional<std::size_t> find_row(std::span<const std::int64_t> torus_row) const {
    std::size_t f = 0;
    for (unsigned i = 0; i + 1 < d_; ++i) {
      const std::int64_t off = spectral::mod_index(torus_row[i] - lo_[i], m_);
      if (off >= extent_[i]) return std::nullopt;
      f = f * static_cast<std::size_t>(extent_[i]) + static_cast<std::size_t>(off);
    }
    return f;
  }

  void row_coords(std::size_t f, std::span<std::int64_t> out) const {
    for (unsigned i = d_ - 1; i-- > 0;) {
      out[i] = lo_[i] + static_cast<std::int64_t>(f % static_cast<std::size_t>(extent_[i]));
      f /= static_cast<std::size_t>(extent_[i]);
    }
  }

 private:
  bool member(long double rest, std::int64_t j) const {
    const long double v = p_[d_ - 1] - static_cast<long double>(j) / m_;
    return rest + v * v < r2_;
  }

  unsigned d_;
  std::int64_t m_;
  std::vector<long double> p_;
  long double r2_ = 0.0L;
  std::vector<std::int64_t> lo_, extent_;
  std::vector<std::int64_t> first_, last_;
};

inline std::vector<BallRows> all_rows(const PointSet& p, double rho, std::int64_t m) {
  std::vector<BallRows> out;
  out.reserve(p.size());
  std::vector<long double> x(p.dim());
  for (std::size_t n = 0; n < p.size(); ++n) {
    for (unsigned i = 0; i < p.dim(); ++i) x[i] = p.value(n, i);
    out.emplace_back(x, rho, m);
  }
  return out;
}

/// |[a1, b1] intersect [a2, b2]| counted mod M, both intervals shorter than M.
inline std::int64_t cyclic_overlap(std::int64_t a1, std::int64_t b1, std::int64_t a2, std::int64_t b2, std::int64_t m) {
  if (b1 < a1 || b2 < a2) return 0;
  // Move the second interval next to the first, then try the neighbouring images.
  const std::int64_t shift = ((a1 - a2) / m) * m;
  std::int64_t total = 0;
  for (std::int64_t s = -2; s <= 2; ++s) {
    const std::int64_t lo = std::max(a1, a2 + shift + s * m), hi = std::min(b1, b2 + shift + s * m);
    if (hi >= lo) total += hi - lo + 1;
  }
  return total;
}

/// #{j in Z_M^d : j in ball u and j in ball v}
inline std::int64_t overlap(const BallRows& u, const BallRows& v, std::int64_t m) {
  const unsigned d = u.dim();
  if (d == 1) return cyclic_overlap(u.first(0), u.last(0), v.first(0), v.last(0), m);
  std::vector<std::int64_t> row(d - 1);
  std::int64_t total = 0;
  for (std::size_t f = 0; f < u.rows(); ++f) {
    if (u.last(f) < u.first(f)) continue;
    u.row_coords(f, row);
    const auto g = v.find_row(row);
    if (!g) continue;
    total += cyclic_overlap(u.first(f), u.last(f), v.first(*g), v.last(*g), m);
  }
  return total;
}

/// Counts c(j) = #{n : |p_n - j/M| < rho} on the torus grid, flat by j mod M.
inline std::vector<std::int64_t> count_field(const std::vector<BallRows>& balls, unsigned d, std::int64_t m, std::uint64_t cap) {
  const std::size_t cells = checked_cells(static_cast<std::uint64_t>(m), d, cap);
  const std::size_t mm = static_cast<std::size_t>(m);
  // Difference array along the last axis, then a cyclic prefix sum per line.
  std::vector<std::int64_t> diff(cells, 0);
  std::vector<std::int64_t> row(d > 1 ? d - 1 : 0);
  for (const auto& b : balls) {
    for (std::size_t f = 0; f < b.rows(); ++f) {
      if (b.last(f) < b.first(f)) continue;
      b.row_coords(f, row);
      std::size_t base = 0;
      for (unsigned i = 0; i + 1 < d; ++i) base = base * mm + static_cast<std::size_t>(spectral::mod_index(row[i], m));
      base *= mm;
      const std::int64_t a = spectral::mod_index(b.first(f), m);
      const std::int64_t len = b.last(f) - b.first(f) + 1;
      if (a + len <= m) {
        diff[base + static_cast<std::size_t>(a)] += 1;
        if (a + len < m) diff[base + static_cast<std::size_t>(a + len)] -= 1;
      } else {
        diff[base + static_cast<std::size_t>(a)] += 1;
        diff[base] += 1;
        diff[base + static_cast<std::size_t>(a + len - m)] -= 1;
      }
    }
  }
  for (std::size_t base = 0; base < cells; base += mm)
    for (std::size_t t = 1; t < mm; ++t) diff[base + t] += diff[base + t - 1];
  return diff;
}

}  // namespace detail

/// D_N(j/M, r) = #{n : |p_n - j/M| < r} - N |B_r| with nearest-image distance.
inline double ball_disc(const PointSet& p, std::span<const std::int64_t> j, double r, std::int64_t m) {
  require(r > 0.0 && r < 0.25, ErrorCode::invalid_argument, "ball radius must lie in (0, 1/4)");
  require(j.size() == p.dim(), ErrorCode::dimension_mismatch, "center dimension differs from the point set");
  std::int64_t count = 0;
  const long double r2 = static_cast<long double>(r) * r;
  for (std::size_t n = 0; n < p.size(); ++n) {
    long double s = 0.0L;
    for (unsigned i = 0; i < p.dim(); ++i) {
      long double delta = std::abs(static_cast<long double>(p.value(n, i)) - static_cast<long double>(j[i]) / m);
      delta -= std::floor(delta);
      delta = std::min(delta, 1.0L - delta);
      s += delta * delta;
    }
    count += s < r2;
  }
  return static_cast<double>(count) - static_cast<double>(p.size()) * ball_measure(p.dim(), r);
}

/// M^-d sum_j D(j/M, rho)^2 from pairwise ball overlaps:
/// sum_j c^2 = sum_{n,n'} overlap(n, n'), sum_j c = sum_n L_n.
inline double single_radius_mean_square(const PointSet& p, double rho, std::int64_t m) {
  detail::require_radius(rho);
  const unsigned d = p.dim();
  const auto balls = detail::all_rows(p, rho, m);
  const std::size_t n = balls.size();
  const auto parts = chunked_map<i128>(n, 64, [&](std::size_t begin, std::size_t end, std::size_t) {
    i128 acc = 0;
    for (std::size_t a = begin; a < end; ++a) {
      acc += balls[a].count();
      for (std::size_t b = a + 1; b < n; ++b) acc += 2 * static_cast<i128>(detail::overlap(balls[a], balls[b], m));
    }
    return acc;
  });
  i128 squares = 0;
  for (auto v : parts) squares += v;
  i128 linear = 0;
  for (const auto& b : balls) linear += b.count();
  const long double md = std::pow(static_cast<long double>(m), static_cast<long double>(d));
  const long double nb = static_cast<long double>(n) * spectral::ball_volume(d, rho);
  const long double sum = static_cast<long double>(squares) - 2.0L * nb * static_cast<long double>(linear) + md * nb * nb;
  return static_cast<double>(sum / md);
}

/// Counts on the whole grid (materialized), flat by j mod M.
inline std::vector<std::int64_t> ball_count_field(const PointSet& p, double rho, std::int64_t m, std::uint64_t cap = kDefaultCellCap) {
  detail::require_radius(rho);
  return detail::count_field(detail::all_rows(p, rho, m), p.dim(), m, cap);
}

inline void require_grid(const GridSpec& g) {
  require(g.kind() == GridKind::torus, ErrorCode::precondition, "ball discrepancy needs a torus grid");
}

enum class BallPath { pairwise, field, spectral };

/// Smallest even M >= C N^(1 + 1/(2d)) / r.
inline std::int64_t theorem3_resolution(unsigned d, std::uint64_t n, double r, double c = kResolutionConstant) {
  const double raw = c * std::pow(static_cast<double>(n), 1.0 + 1.0 / (2.0 * d)) / r;
  auto m = static_cast<std::int64_t>(std::ceil(raw - 1e-9));
  if (m % 2 != 0) ++m;
  return std::max<std::int64_t>(m, 4);
}

namespace detail {

/// Per-point Fourier formula: hat D(k) = sum_n exp(-2 pi i k.p~_n) hat chi_{-B_rho+q_n}(k) - |B_rho| N M^d delta_0(k),
/// with each hat chi obtained by an FFT of the indicator of M(-B_rho + q_n).
inline std::vector<fft::cplx> lemma_spectrum(const PointSet& p, const GridSpec& g, double rho, std::uint64_t cap) {
  const unsigned d = g.dim();
  const std::int64_t m = g.resolution();
  const std::size_t cells = checked_cells(static_cast<std::uint64_t>(m), d, cap);
  const auto s = snap_nearest(as_torus(p), g);
  std::vector<fft::cplx> total(cells, fft::cplx(0, 0)), buf(cells);
  std::vector<std::int64_t> v(d);
  const std::size_t mm = static_cast<std::size_t>(m);
  for (std::size_t n = 0; n < s.size(); ++n) {
    std::fill(buf.begin(), buf.end(), fft::cplx(0, 0));
    std::span<const double> q(s.q.data() + n * d, d);
    spectral::detail::for_each_ball_point(m, q, rho, [&](std::span<const std::int64_t> lattice) {
      std::size_t f = 0;
      for (unsigned i = 0; i < d; ++i) f = f * mm + static_cast<std::size_t>(spectral::mod_index(lattice[i], m));
      buf[f] += 1.0;
    });
    fft::transform_nd(buf, d, mm);
    for (std::size_t f = 0; f < cells; ++f) {
      std::size_t g2 = f;
      std::int64_t dot = 0;
      for (unsigned i = d; i-- > 0;) {
        dot += static_cast<std::int64_t>(g2 % mm) * s.zc(n, i);
        g2 /= mm;
      }
      total[f] += spectral::phase(spectral::mod_index(dot, m), m) * buf[f];
    }
  }
  total[0] -= spectral::ball_volume(d, rho) * static_cast<long double>(s.size()) * std::pow(static_cast<long double>(m), static_cast<long double>(d));
  return total;
}

}  // namespace detail

/// M^-d sum_j D(j/M, rho)^2 along the chosen route.
inline double mean_square(const PointSet& p, const GridSpec& g, double rho, BallPath path, std::uint64_t cap = kDefaultCellCap) {
  require_grid(g);
  check_dims(p, g);
  const unsigned d = g.dim();
  const std::int64_t m = g.resolution();
  const long double md = std::pow(static_cast<long double>(m), static_cast<long double>(d));
  switch (path) {
    case BallPath::pairwise:
      return single_radius_mean_square(p, rho, m);
    case BallPath::field: {
      const auto c = ball_count_field(p, rho, m, cap);
      const long double nb = static_cast<long double>(p.size()) * spectral::ball_volume(d, rho);
      KahanSum<long double> acc;
      for (auto v : c) acc.add((static_cast<long double>(v) - nb) * (static_cast<long double>(v) - nb));
      return static_cast<double>(acc.value() / md);
    }
    case BallPath::spectral: {
      // Plancherel with the k = 0 term kept, so this is an identity.
      detail::require_radius(rho);
      const auto spec = detail::lemma_spectrum(p, g, rho, cap);
      KahanSum<long double> acc;
      for (auto v : spec) acc.add(std::norm(std::complex<long double>(v.real(), v.imag())));
      return static_cast<double>(acc.value() / (md * md));
    }
  }
  return 0.0;
}

/// (M^-d sum_{k=1,2} sum_j |D(j/M, k r)|^2)^(1/2)
inline double two_radius_l2(const PointSet& p, const GridSpec& g, double r, BallPath path = BallPath::pairwise,
                            std::uint64_t cap = kDefaultCellCap) {
  require(r > 0.0 && r < 0.25, ErrorCode::invalid_argument, "ball radius must lie in (0, 1/4)");
  return std::sqrt(mean_square(p, g, r, path, cap) + mean_square(p, g, 2.0 * r, path, cap));
}

/// Max over k of |DFT of the direct field - per-point formula|, relative to
/// the largest spectral magnitude (at least 1).
inline double ball_fourier_identity_check(const PointSet& p, const GridSpec& g, double r, std::uint64_t cap = kDefaultCellCap) {
  require_grid(g);
  check_dims(p, g);
  require(r > 0.0 && r < 0.25, ErrorCode::invalid_argument, "ball radius must lie in (0, 1/4)");
  const unsigned d = g.dim();
  const std::int64_t m = g.resolution();
  const auto counts = ball_count_field(p, r, m, cap);
  const double nb = static_cast<double>(p.size()) * ball_measure(d, r);
  std::vector<fft::cplx> direct(counts.size());
  for (std::size_t f = 0; f < counts.size(); ++f) direct[f] = fft::cplx(static_cast<double>(counts[f]) - nb, 0.0);
  fft::transform_nd(direct, d, static_cast<std::size_t>(m));
  const auto lemma = detail::lemma_spectrum(p, g, r, cap);
  double scale = 1.0, worst = 0.0;
  for (const auto& v : lemma) scale = std::max(scale, std::abs(v));
  for (std::size_t f = 0; f < lemma.size(); ++f) worst = std::max(worst, std::abs(direct[f] - lemma[f]));
  return worst / scale;
}

struct CosineFloor {
  double floor = 0.0;
  double argmin = 0.0;  // |k| attaining the floor
  std::size_t scanned = 0;
};

/// min of cos^2(w1) + cos^2(w2) over achievable |k| with 1 <= |k| < M/(10 sqrt d), where
/// w1 = (2 pi r + 2 pi sqrt(d)/M)|k| - (d+1) pi/4 and w2 = (4 pi r + 2 pi sqrt(d)/M)|k| - (d+1) pi/4.
inline CosineFloor cosine_floor_scan(unsigned d, double r, std::int64_t m) {
  require(d >= 1, ErrorCode::invalid_argument, "dimension must be positive");
  require(d % 4 != 1, ErrorCode::hypothesis,
          "cosine separation needs d not congruent to 1 mod 4 (d = " + std::to_string(d) + ")");
  require(r > 0.0 && r < 0.25, ErrorCode::invalid_argument, "ball radius must lie in (0, 1/4)");
  const double sd = std::sqrt(static_cast<double>(d));
  const double limit = static_cast<double>(m) / (10.0 * sd);
  // Squared norms |k|^2 < limit^2 reachable as sums of d squares.
  const auto top = static_cast<std::int64_t>(std::ceil(limit * limit));
  std::vector<char> reach(static_cast<std::size_t>(top) + 1, 0);
  reach[0] = 1;
  for (unsigned i = 0; i < d; ++i) {
    std::vector<char> next(reach.size(), 0);
    for (std::int64_t s = 0; s <= top; ++s) {
      if (!reach[static_cast<std::size_t>(s)]) continue;
      for (std::int64_t a = 0; s + a * a <= top; ++a) next[static_cast<std::size_t>(s + a * a)] = 1;
    }
    reach.swap(next);
  }
  CosineFloor out;
  out.floor = std::numeric_limits<double>::infinity();
  const double phase = (d + 1) * kPi / 4.0;
  for (std::int64_t s = 1; s <= top; ++s) {
    if (!reach[static_cast<std::size_t>(s)]) continue;
    const double k = std::sqrt(static_cast<double>(s));
    if (k >= limit) break;
    const double w1 = (2 * kPi * r + 2 * kPi * sd / m) * k - phase;
    const double w2 = (4 * kPi * r + 2 * kPi * sd / m) * k - phase;
    const double v = std::cos(w1) * std::cos(w1) + std::cos(w2) * std::cos(w2);
    ++out.scanned;
    if (v < out.floor) {
      out.floor = v;
      out.argmin = k;
    }
  }
  return out;
}

/// lhs = two_radius_l2, rhs = c r^(d/2) N^(1/2 - 1/(2d)) with the calibrated c.
inline bounds::BoundReport theorem3_verify(const PointSet& p, double r, std::optional<std::int64_t> m_override = {},
                                           double c_resolution = kResolutionConstant, double c_bound = kCalibratedConstant,
                                           std::string tag = {}, std::optional<std::uint64_t> seed = {}) {
  const unsigned d = p.dim();
  require(d % 4 != 1, ErrorCode::hypothesis, "the two-radius ball bound is stated for d not congruent to 1 mod 4");
  require(r > 0.0 && r < 0.25, ErrorCode::invalid_argument, "ball radius must lie in (0, 1/4)");
  const std::uint64_t n = p.size();
  const std::int64_t floor_m = theorem3_resolution(d, n, r, c_resolution);
  const std::int64_t m = m_override.value_or(floor_m);
  require(m % 2 == 0, ErrorCode::precondition, "M must be even");
  require(m >= floor_m, ErrorCode::precondition,
          "M = " + std::to_string(m) + " is below the C N^(1+1/(2d))/r = " + std::to_string(floor_m) + " floor");
  const GridSpec g = GridSpec::torus(d, m);
  const double exponent = 0.5 - 1.0 / (2.0 * d);

  bounds::BoundReport rep;
  rep.theorem = "3";
  rep.lhs = two_radius_l2(p, g, r);
  rep.lhs_squared = rep.lhs * rep.lhs;
  rep.rhs = c_bound * std::pow(r, d / 2.0) * std::pow(static_cast<double>(n), exponent);
  rep.rhs_squared = rep.rhs * rep.rhs;
  rep.constants = {
      {"C", c_resolution, bounds::ConstantSource::convention},
      {"c", c_bound, bounds::ConstantSource::calibrated},
      {"1/2-1/(2d)", exponent, bounds::ConstantSource::paper_explicit},
  };
  rep.input = {n, d, m, std::nullopt, r, seed, std::move(tag)};
  bounds::finalize(rep);
  rep.extra["path"] = "pairwise";
  return rep;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::invalid_argument, "slope fit needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// CSV of (j, D_r, D_2r) over J_M^d.
inline void write_ball_field_csv(std::ostream& out, const PointSet& p, const GridSpec& g, double r, std::uint64_t cap = kDefaultCellCap) {
  require_grid(g);
  require(r > 0.0 && r < 0.25, ErrorCode::invalid_argument, "ball radius must lie in (0, 1/4)");
  const unsigned d = g.dim();
  const std::int64_t m = g.resolution();
  const auto c1 = ball_count_field(p, r, m, cap), c2 = ball_count_field(p, 2 * r, m, cap);
  const double n1 = static_cast<double>(p.size()) * ball_measure(d, r), n2 = static_cast<double>(p.size()) * ball_measure(d, 2 * r);
  for (unsigned i = 0; i < d; ++i) out << 'j' << (i + 1) << ',';
  out << "d_r,d_2r\n";
  std::vector<std::int64_t> j(d, -m / 2);
  while (true) {
    std::size_t f = 0;
    for (unsigned i = 0; i < d; ++i) {
      out << j[i] << ',';
      f = f * static_cast<std::size_t>(m) + static_cast<std::size_t>(spectral::mod_index(j[i], m));
    }
    out << format_double(static_cast<double>(c1[f]) - n1) << ',' << format_double(static_cast<double>(c2[f]) - n2) << '\n';
    unsigned i = d;
    while (i-- > 0) {
      if (++j[i] <= m / 2 - 1) break;
      j[i] = -m / 2;
    }
    if (i == static_cast<unsigned>(-1)) return;
  }
}

}  // namespace discrepancy::torus_ball
