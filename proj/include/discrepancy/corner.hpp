#pragma once

// Corner (anchored box) discrepancy on the grid {1/M, ..., M/M}^d: counts by
// prefix sums, exact l2/linf norms, Haar coefficients of D_N, the test
// functions F and G, and the Theorem 1 verdict.

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "discrepancy/bounds.hpp"
#include "discrepancy/core.hpp"
#include "discrepancy/geometry.hpp"
#include "discrepancy/haar.hpp"

namespace discrepancy::corner {

namespace detail {

inline void require_corner_points(const PointSet& p) {
  require(p.mode() == PointMode::corner, ErrorCode::precondition, "corner engine needs a corner-mode point set");
}

/// Decodes a flat cell index (last axis fastest) into 1-based grid indices.
inline void decode_cell(std::uint64_t flat, std::int64_t m, std::span<std::int64_t> j) {
  for (std::size_t i = j.size(); i-- > 0;) {
    j[i] = static_cast<std::int64_t>(flat % static_cast<std::uint64_t>(m)) + 1;
    flat /= static_cast<std::uint64_t>(m);
  }
}

inline void advance_cell(std::int64_t m, std::span<std::int64_t> j) {
  for (std::size_t i = j.size(); i-- > 0;) {
    if (++j[i] <= m) return;
    j[i] = 1;
  }
}

inline constexpr std::size_t kChunks = 64;

}  // namespace detail

/// Counts c(j) = #{n : p_n in [0, j_1/M) x ... x [0, j_d/M)} for j in {1..M}^d.
class CornerDiscrepancyField {
 public:
  CornerDiscrepancyField(const PointSet& p, const GridSpec& g, std::uint64_t cap = kDefaultCellCap)
      : d_(p.dim()), m_(g.resolution()), n_(p.size()) {
    check_dims(p, g);
    detail::require_corner_points(p);
    require(g.kind() == GridKind::corner, ErrorCode::precondition, "corner engine needs a corner grid");
    require(n_ < (std::uint64_t{1} << 32), ErrorCode::cap_exceeded, "point count exceeds the 32-bit counter range");
    cells_ = checked_cells(static_cast<std::uint64_t>(m_), d_, cap);
    md_ = static_cast<i128>(ipow(static_cast<std::uint64_t>(m_), d_));
    counts_.assign(cells_, 0);
    const SnappedSet s = snap_corner(p, g);
    // c(j) = #{z < j} = #{z <= j-1}: histogram at z, inclusive prefix sum, read at j-1.
    for (std::size_t n = 0; n < n_; ++n) {
      std::uint64_t flat = 0;
      for (unsigned i = 0; i < d_; ++i) flat = flat * static_cast<std::uint64_t>(m_) + static_cast<std::uint64_t>(s.zc(n, i));
      ++counts_[flat];
    }
    std::uint64_t stride = 1;
    for (unsigned axis = d_; axis-- > 0;) {
      const std::uint64_t span = stride * static_cast<std::uint64_t>(m_);
      for (std::uint64_t base = 0; base < cells_; base += span) {
        for (std::uint64_t off = 0; off < stride; ++off) {
          for (std::int64_t t = 1; t < m_; ++t) {
            const std::uint64_t at = base + off + static_cast<std::uint64_t>(t) * stride;
            counts_[at] += counts_[at - stride];
          }
        }
      }
      stride = span;
    }
  }

  unsigned dim() const { return d_; }
  std::int64_t resolution() const { return m_; }
  std::size_t points() const { return n_; }
  std::uint64_t cells() const { return cells_; }

  std::uint64_t flat_index(std::span<const std::int64_t> j) const {
    std::uint64_t flat = 0;
    for (unsigned i = 0; i < d_; ++i) {
      require(j[i] >= 1 && j[i] <= m_, ErrorCode::invalid_argument, "grid index outside 1..M");
      flat = flat * static_cast<std::uint64_t>(m_) + static_cast<std::uint64_t>(j[i] - 1);
    }
    return flat;
  }

  std::uint32_t count(std::span<const std::int64_t> j) const { return counts_[flat_index(j)]; }
  std::uint32_t count_flat(std::uint64_t flat) const { return counts_[flat]; }

  /// M^d D(j/M) = M^d c(j) - N prod j_i, an integer.
  i128 scaled(std::uint64_t flat, std::span<const std::int64_t> j) const {
    i128 prod = static_cast<i128>(n_);
    for (auto v : j) prod *= v;
    return md_ * counts_[flat] - prod;
  }

  Rational discrepancy(std::span<const std::int64_t> j) const {
    return make_rational(to_integer(scaled(flat_index(j), j)), to_integer(md_));
  }

  i128 scale() const { return md_; }

 private:
  unsigned d_;
  std::int64_t m_;
  std::size_t n_;
  std::uint64_t cells_ = 0;
  i128 md_ = 1;
  std::vector<std::uint32_t> counts_;
};

struct GridNorms {
  Rational l2_squared;  // M^-d sum_j D(j/M)^2
  double l2 = 0.0;
  Rational linf;        // max_j |D(j/M)|
  std::vector<std::int64_t> argmax;
};

inline GridNorms grid_norms(const CornerDiscrepancyField& f) {
  struct Partial {
    u128 sumsq = 0;
    u128 best = 0;
    std::uint64_t best_flat = 0;
  };
  const unsigned d = f.dim();
  const std::int64_t m = f.resolution();
  auto parts = chunked_map<Partial>(f.cells(), detail::kChunks, [&](std::size_t begin, std::size_t end, std::size_t) {
    Partial p;
    std::vector<std::int64_t> j(d);
    if (begin < end) detail::decode_cell(begin, m, j);
    for (std::size_t flat = begin; flat < end; ++flat) {
      const i128 v = f.scaled(flat, j);
      const u128 a = v < 0 ? u128(-v) : u128(v);
      if (a > UINT64_MAX || p.sumsq + a * a < p.sumsq) throw Error(ErrorCode::overflow, "grid l2 accumulator overflow");
      p.sumsq += a * a;
      if (flat == begin || a > p.best) {
        p.best = a;
        p.best_flat = flat;
      }
      detail::advance_cell(m, j);
    }
    return p;
  });
  Integer total = 0;
  u128 best = 0;
  std::uint64_t best_flat = 0;
  bool first = true;
  for (const auto& p : parts) {
    total += to_integer_unsigned(p.sumsq);
    if (first || p.best > best) {
      best = p.best;
      best_flat = p.best_flat;
      first = false;
    }
  }
  GridNorms out;
  const Integer md = to_integer(f.scale());
  // sum (M^d D)^2 / M^(2d) / M^d
  out.l2_squared = Rational(total, md * md * md);
  out.l2_squared.canonicalize();
  out.l2 = std::sqrt(static_cast<double>(to_long_double(out.l2_squared)));
  out.linf = Rational(to_integer_unsigned(best), md);
  out.linf.canonicalize();
  out.argmax.assign(d, 0);
  detail::decode_cell(best_flat, m, out.argmax);
  return out;
}

/// Exact grid l2^2 without materializing the grid, from the pairwise expansion
///   sum_j c(j)^2         = sum_{n,n'} prod_i (M - max(z_ni, z_n'i))
///   sum_j c(j) prod j_i  = sum_n prod_i (M(M+1) - z(z+1))/2
///   sum_j prod j_i^2     = (M(M+1)(2M+1)/6)^d
/// Cost O(N^2 d), independent of M.
inline Rational grid_l2_squared_pairwise(const PointSet& p, std::int64_t m) {
  detail::require_corner_points(p);
  require(m >= 2, ErrorCode::invalid_argument, "grid resolution must be at least 2");
  const unsigned d = p.dim();
  const std::size_t n = p.size();
  std::vector<std::int64_t> z(n * d);
  for (std::size_t k = 0; k < n; ++k)
    for (unsigned i = 0; i < d; ++i) z[k * d + i] = p.coord(k, i).scaled_floor(m);

  auto parts = chunked_map<Integer>(n, detail::kChunks, [&](std::size_t begin, std::size_t end, std::size_t) {
    Integer acc = 0;
    for (std::size_t a = begin; a < end; ++a) {
      i128 row = 0;
      for (std::size_t b = 0; b < n; ++b) {
        i128 prod = 1;
        for (unsigned i = 0; i < d; ++i) prod = checked_mul(prod, m - std::max(z[a * d + i], z[b * d + i]));
        row = checked_add(row, prod);
      }
      acc += to_integer(row);
    }
    return acc;
  });
  Integer sum_c2 = 0;
  for (const auto& v : parts) sum_c2 += v;

  Integer sum_cj = 0;
  for (std::size_t k = 0; k < n; ++k) {
    Integer prod = 1;
    for (unsigned i = 0; i < d; ++i) {
      const i128 zz = z[k * d + i];
      prod *= to_integer((i128(m) * (m + 1) - zz * (zz + 1)) / 2);
    }
    sum_cj += prod;
  }
  Integer sum_j2 = 1;
  const Integer one_axis = to_integer(i128(m) * (m + 1) * (2 * m + 1) / 6);
  for (unsigned i = 0; i < d; ++i) sum_j2 *= one_axis;

  const Integer md = integer_pow(static_cast<std::uint64_t>(m), d);
  const Integer nn = to_integer(static_cast<std::uint64_t>(n));
  const Integer num = sum_c2 * md * md - 2 * nn * sum_cj * md + nn * nn * sum_j2;
  return make_rational(num, md * md * md);
}

/// D(A(x)) = #{n : p_n < x componentwise} - N x_1 ... x_d, exact.
inline Rational corner_disc(const PointSet& p, std::span<const Rational> x) {
  require(x.size() == p.dim(), ErrorCode::dimension_mismatch, "argument and point set dimensions differ");
  for (const auto& v : x) require(v > 0 && v <= 1, ErrorCode::invalid_argument, "corner argument outside (0,1]");
  std::int64_t count = 0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    bool inside = true;
    for (unsigned i = 0; i < p.dim() && inside; ++i) inside = p.coord(n, i).exact() < x[i];
    count += inside ? 1 : 0;
  }
  Rational vol = 1;
  for (const auto& v : x) vol *= v;
  return Rational(count) - Rational(static_cast<long>(p.size())) * vol;
}

/// <D_N, h_R> = M^-d sum_j D(j/M) h_R(j/M), exact, through the product structure:
/// sum_j D h_R = sum_n prod_i S_i(z_ni) - N prod_i T_i / M^d with
/// S_i(z) = sum_{j > z} h_i(j), T_i = sum_j j h_i(j).
inline Rational haar_coefficient(const PointSet& p, const haar::BAdicBox& box, const GridSpec& g) {
  check_dims(p, g);
  detail::require_corner_points(p);
  require(box.dim() == p.dim(), ErrorCode::dimension_mismatch, "box and point set dimensions differ");
  const std::int64_t m = g.resolution();
  const unsigned d = p.dim();
  std::vector<std::vector<std::int64_t>> suffix(d, std::vector<std::int64_t>(static_cast<std::size_t>(m) + 1, 0));
  std::vector<i128> t(d, 0);
  for (unsigned i = 0; i < d; ++i) {
    const auto iv = box.interval(i);
    for (std::int64_t j = m; j >= 1; --j) {
      const int h = haar::haar_1d_grid(iv, j, m);
      suffix[i][static_cast<std::size_t>(j - 1)] = suffix[i][static_cast<std::size_t>(j)] + h;
      t[i] += i128(j) * h;
    }
  }
  i128 a = 0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    i128 prod = 1;
    for (unsigned i = 0; i < d && prod != 0; ++i) {
      const std::int64_t z = p.coord(n, i).scaled_floor(m);
      prod *= suffix[i][static_cast<std::size_t>(z)];
    }
    a += prod;
  }
  Integer tprod = 1;
  for (unsigned i = 0; i < d; ++i) tprod *= to_integer(t[i]);
  const Integer md = integer_pow(static_cast<std::uint64_t>(m), d);
  const Integer num = to_integer(a) * md - to_integer(static_cast<std::uint64_t>(p.size())) * tprod;
  return make_rational(num, md * md);
}

/// nu with b^(nu-2) <= N < b^(nu-1).
inline unsigned derive_nu(std::uint64_t n, std::uint64_t b) {
  require(n >= 1, ErrorCode::invalid_argument, "N must be positive");
  require(b >= 2, ErrorCode::invalid_argument, "base must be at least 2");
  unsigned k = 0;
  u128 pw = 1;
  while (pw * b <= n) {
    pw *= b;
    ++k;
  }
  return k + 2;
}

// ---------------------------------------------------------------- F and G

struct TestFunctionF {
  std::uint64_t b = 2;
  unsigned d = 1;
  unsigned nu = 0;
  std::int64_t m = 0;
  std::vector<std::vector<unsigned>> index;           // H_nu^d
  std::vector<std::vector<bool>> empty;               // per r: box index -> empty of points
  std::vector<std::uint64_t> empty_count;             // per r
  std::vector<Rational> pairing;                      // <D_N, f_r>
  std::vector<Rational> norm_squared;                 // ||f_r||^2
  Rational pairing_total;                             // <D_N, F>
  Rational norm_squared_total;                        // ||F||^2
  Rational pairing_constant;                          // (b-1)/b^(2d+3)
  std::uint64_t card = 0;
  bool chain_holds = false;

  std::vector<std::vector<std::int64_t>> extent;  // per r, per axis: b^r_i
  std::vector<std::vector<std::int64_t>> length;  // per r, per axis: M / b^r_i

  /// f_r(j/M) in {-1, 0, 1}.
  int value(std::size_t r_index, std::span<const std::int64_t> j) const {
    const auto& ext = extent[r_index];
    const auto& len = length[r_index];
    std::uint64_t box = 0;
    int h = -1;  // f_r = -h_R on empty boxes
    for (unsigned i = 0; i < d; ++i) {
      const std::int64_t a = (j[i] - 1) / len[i];
      const std::int64_t child = ((j[i] - 1) % len[i]) / (len[i] / static_cast<std::int64_t>(b));
      box = box * static_cast<std::uint64_t>(ext[i]) + static_cast<std::uint64_t>(a);
      if (child == 0) {
        h = -h;
      } else if (child != 1) {
        h = 0;
      }
    }
    if (h == 0 || !empty[r_index][box]) return 0;
    return h;
  }
};

namespace detail {

inline void require_roth_grid(const PointSet& p, const GridSpec& g, std::uint64_t b, unsigned nu) {
  require(g.kind() == GridKind::corner && g.base() == b, ErrorCode::precondition,
          "test functions need a corner grid M = b^(nu+tau) in the same base");
  require(g.exponent() >= nu + 1, ErrorCode::precondition,
          "grid exponent " + std::to_string(g.exponent()) + " must exceed nu = " + std::to_string(nu) + " (tau >= 1)");
  const std::uint64_t n = p.size();
  require(ipow(b, nu - 2) <= n && n < ipow(b, nu - 1), ErrorCode::precondition,
          "N = " + std::to_string(n) + " is outside the window b^(nu-2) <= N < b^(nu-1); recompute nu with derive_nu");
}

}  // namespace detail

/// F = sum_{r in H_nu^d} f_r with f_r = -sum of h_R over the boxes of D_r^d
/// holding no point; nu is derived from N.
inline TestFunctionF build_F(const PointSet& p, const GridSpec& g, std::uint64_t cap = kDefaultCellCap) {
  check_dims(p, g);
  detail::require_corner_points(p);
  const std::uint64_t b = g.base();
  const unsigned nu = derive_nu(p.size(), b);
  detail::require_roth_grid(p, g, b, nu);
  const unsigned d = p.dim();
  const std::int64_t m = g.resolution();

  TestFunctionF f;
  f.b = b;
  f.d = d;
  f.nu = nu;
  f.m = m;
  f.index = haar::haar_index_set(nu, d);
  f.card = f.index.size();
  f.pairing_constant = bounds::roth_pairing_constant(b, d);
  const std::uint64_t boxes = ipow(b, nu);
  for (const auto& r : f.index) {
    std::vector<std::int64_t> ext(d), len(d);
    for (unsigned i = 0; i < d; ++i) {
      ext[i] = static_cast<std::int64_t>(ipow(b, r[i]));
      len[i] = m / ext[i];
    }
    f.extent.push_back(std::move(ext));
    f.length.push_back(std::move(len));
    std::vector<bool> empty(boxes, true);
    haar::BoxFamily fam(b, r);
    std::vector<std::uint64_t> a(d);
    for (std::size_t n = 0; n < p.size(); ++n) {
      bool inside = true;
      for (unsigned i = 0; i < d && inside; ++i) {
        auto off = haar::containing_offset(p.coord(n, i), b, r[i]);
        if (!off) {
          inside = false;
        } else {
          a[i] = *off;
        }
      }
      if (inside) empty[fam.index_of(a)] = false;
    }
    f.empty_count.push_back(static_cast<std::uint64_t>(std::count(empty.begin(), empty.end(), true)));
    f.empty.push_back(std::move(empty));
  }

  CornerDiscrepancyField field(p, g, cap);
  const std::size_t nr = f.index.size();
  struct Partial {
    std::vector<i128> pair;  // sum_j M^d D f_r
    std::vector<i128> sq;    // sum_j f_r^2
    i128 pair_total = 0;
    i128 sq_total = 0;       // sum_j F^2
  };
  auto parts = chunked_map<Partial>(field.cells(), detail::kChunks, [&](std::size_t begin, std::size_t end, std::size_t) {
    Partial part;
    part.pair.assign(nr, 0);
    part.sq.assign(nr, 0);
    std::vector<std::int64_t> j(d);
    if (begin < end) detail::decode_cell(begin, m, j);
    for (std::size_t flat = begin; flat < end; ++flat) {
      const i128 dv = field.scaled(flat, j);
      i128 fsum = 0;
      for (std::size_t k = 0; k < nr; ++k) {
        const int v = f.value(k, j);
        if (v == 0) continue;
        part.pair[k] = checked_add(part.pair[k], v * dv);
        part.sq[k] += 1;
        fsum += v;
      }
      part.pair_total = checked_add(part.pair_total, fsum * dv);
      part.sq_total += fsum * fsum;
      detail::advance_cell(m, j);
    }
    return part;
  });
  std::vector<Integer> pair(nr, 0), sq(nr, 0);
  Integer pair_total = 0, sq_total = 0;
  for (const auto& part : parts) {
    for (std::size_t k = 0; k < nr; ++k) {
      pair[k] += to_integer(part.pair[k]);
      sq[k] += to_integer(part.sq[k]);
    }
    pair_total += to_integer(part.pair_total);
    sq_total += to_integer(part.sq_total);
  }
  const Integer md = to_integer(field.scale());
  for (std::size_t k = 0; k < nr; ++k) {
    f.pairing.push_back(make_rational(pair[k], md * md));
    f.norm_squared.push_back(make_rational(sq[k], md));
  }
  f.pairing_total = make_rational(pair_total, md * md);
  f.norm_squared_total = make_rational(sq_total, md);

  bool ok = f.pairing_total >= Rational(static_cast<long>(f.card)) * f.pairing_constant;
  ok = ok && f.norm_squared_total <= Rational(static_cast<long>(f.card));
  for (const auto& v : f.pairing) ok = ok && v >= f.pairing_constant;
  f.chain_holds = ok;
  return f;
}

struct TestFunctionG {
  Rational kappa;
  Rational l1_norm;                    // ||G||_1 = M^-2 sum |G|
  Rational pairing;                    // <D_N, G>
  std::vector<Rational> order_sums;    // sum_j G_l(j/M) for l = 0 .. card(H); l >= 1 should vanish
  double linf_bound = 0.0;             // kappa (nu+1)[(b-1) b^-7 - kappa b^-5/(b-1-kappa)] / 2
  Rational implied_linf;               // <D_N,G> / ||G||_1
};

/// G = prod_r (1 + kappa f_r) - 1 on the grid, d = 2. Cells are grouped by
/// (#{r: f_r = +1}, #{r: f_r = -1}), on which G is constant.
inline TestFunctionG build_G(const PointSet& p, const GridSpec& g, const TestFunctionF& f, const Rational& kappa) {
  require(p.dim() == 2, ErrorCode::dimension_mismatch, "G is defined for d = 2 only");
  require(kappa > 0 && kappa < 1, ErrorCode::invalid_argument, "kappa must lie in (0,1)");
  require(f.m == g.resolution() && f.d == 2, ErrorCode::precondition, "F was built on a different grid");
  CornerDiscrepancyField field(p, g);
  const std::int64_t m = g.resolution();
  const std::size_t nr = f.index.size();
  const std::size_t classes = (nr + 1) * (nr + 1);
  struct Partial {
    std::vector<std::uint64_t> count;
    std::vector<i128> dsum;
  };
  auto parts = chunked_map<Partial>(field.cells(), detail::kChunks, [&](std::size_t begin, std::size_t end, std::size_t) {
    Partial part;
    part.count.assign(classes, 0);
    part.dsum.assign(classes, 0);
    std::vector<std::int64_t> j(2);
    if (begin < end) detail::decode_cell(begin, m, j);
    for (std::size_t flat = begin; flat < end; ++flat) {
      std::size_t plus = 0, minus = 0;
      for (std::size_t k = 0; k < nr; ++k) {
        const int v = f.value(k, j);
        plus += v > 0;
        minus += v < 0;
      }
      const std::size_t cls = plus * (nr + 1) + minus;
      part.count[cls] += 1;
      part.dsum[cls] = checked_add(part.dsum[cls], field.scaled(flat, j));
      detail::advance_cell(m, j);
    }
    return part;
  });
  std::vector<std::uint64_t> count(classes, 0);
  std::vector<Integer> dsum(classes, 0);
  for (const auto& part : parts) {
    for (std::size_t c = 0; c < classes; ++c) {
      count[c] += part.count[c];
      dsum[c] += to_integer(part.dsum[c]);
    }
  }

  TestFunctionG out;
  out.kappa = kappa;
  out.order_sums.assign(nr + 1, 0);
  const Rational one = 1;
  Rational l1 = 0;
  Rational pair = 0;
  for (std::size_t plus = 0; plus <= nr; ++plus) {
    for (std::size_t minus = 0; plus + minus <= nr; ++minus) {
      const std::size_t cls = plus * (nr + 1) + minus;
      if (count[cls] == 0) continue;
      Rational gv = 1;
      for (std::size_t i = 0; i < plus; ++i) gv *= one + kappa;
      for (std::size_t i = 0; i < minus; ++i) gv *= one - kappa;
      gv -= 1;
      l1 += abs(gv) * Rational(to_integer(count[cls]));
      pair += gv * Rational(dsum[cls]);
      // coefficients of (1+t)^plus (1-t)^minus
      std::vector<Integer> poly(plus + minus + 1, 0);
      poly[0] = 1;
      std::size_t deg = 0;
      for (std::size_t i = 0; i < plus + minus; ++i) {
        const int sign = i < plus ? 1 : -1;
        for (std::size_t l = deg + 2; l-- > 1;) poly[l] += sign * poly[l - 1];
        ++deg;
      }
      Rational kp = 1;
      for (std::size_t l = 0; l <= plus + minus; ++l) {
        out.order_sums[l] += kp * Rational(poly[l] * to_integer(count[cls]));
        kp *= kappa;
      }
    }
  }
  const Integer md = to_integer(field.scale());
  out.l1_norm = l1 / Rational(md);
  out.pairing = pair / Rational(md * md);
  for (auto& v : out.order_sums) v.canonicalize();
  out.linf_bound = bounds::linf_bound(f.b, f.nu, kappa.get_d());
  out.implied_linf = out.l1_norm > 0 ? Rational(out.pairing / out.l1_norm) : Rational(0);
  return out;
}

// ---------------------------------------------------------------- continuous oracle

/// int_{[0,1]^d} |D(A(x))|^2 dx by the pairwise formula
///   sum_{n,n'} prod (1 - max) - 2N sum_n prod (1 - p^2)/2 + N^2 3^-d,
/// exact in rationals.
inline Rational continuous_l2_squared_exact(const PointSet& p) {
  detail::require_corner_points(p);
  require(p.size() <= 5000, ErrorCode::cap_exceeded, "exact continuous oracle is limited to N <= 5000");
  const unsigned d = p.dim();
  const std::size_t n = p.size();
  std::vector<Rational> x(n * d);
  for (std::size_t k = 0; k < n; ++k)
    for (unsigned i = 0; i < d; ++i) x[k * d + i] = p.coord(k, i).exact();
  auto parts = chunked_map<Rational>(n, detail::kChunks, [&](std::size_t begin, std::size_t end, std::size_t) {
    Rational acc = 0;
    for (std::size_t a = begin; a < end; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        Rational prod = 1;
        for (unsigned i = 0; i < d; ++i) prod *= 1 - std::max(x[a * d + i], x[b * d + i]);
        acc += prod;
      }
    }
    return acc;
  });
  Rational pairs = 0;
  for (const auto& v : parts) pairs += v;
  Rational single = 0;
  for (std::size_t k = 0; k < n; ++k) {
    Rational prod = 1;
    for (unsigned i = 0; i < d; ++i) prod *= (1 - x[k * d + i] * x[k * d + i]) / 2;
    single += prod;
  }
  const Rational nn(static_cast<long>(n));
  Rational third = 1;
  for (unsigned i = 0; i < d; ++i) third /= 3;
  Rational out = pairs - 2 * nn * single + nn * nn * third;
  out.canonicalize();
  return out;
}

/// Square root of the continuous L2 discrepancy, in long double with
/// compensated summation; handles N up to 1e5.
inline double continuous_l2_oracle(const PointSet& p) {
  detail::require_corner_points(p);
  require(p.size() <= 100000, ErrorCode::cap_exceeded, "continuous oracle is limited to N <= 1e5");
  const unsigned d = p.dim();
  const std::size_t n = p.size();
  std::vector<long double> x(n * d);
  for (std::size_t k = 0; k < n; ++k)
    for (unsigned i = 0; i < d; ++i) x[k * d + i] = p.value(k, i);
  auto parts = chunked_map<KahanSum<long double>>(n, detail::kChunks, [&](std::size_t begin, std::size_t end, std::size_t) {
    KahanSum<long double> acc;
    for (std::size_t a = begin; a < end; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        long double prod = 1.0L;
        for (unsigned i = 0; i < d; ++i) prod *= 1.0L - std::max(x[a * d + i], x[b * d + i]);
        acc.add(prod);
      }
    }
    return acc;
  });
  KahanSum<long double> total;
  for (const auto& v : parts) total.merge(v);
  KahanSum<long double> single;
  for (std::size_t k = 0; k < n; ++k) {
    long double prod = 1.0L;
    for (unsigned i = 0; i < d; ++i) prod *= (1.0L - x[k * d + i] * x[k * d + i]) / 2.0L;
    single.add(prod);
  }
  const long double nn = static_cast<long double>(n);
  total.add(-2.0L * nn * single.value());
  total.add(nn * nn * std::pow(3.0L, -static_cast<long double>(d)));
  return static_cast<double>(std::sqrt(std::max(0.0L, total.value())));
}

// ---------------------------------------------------------------- Theorem 1

/// Exact grid l2^2, through the prefix-sum field when M^d fits the cap and
/// through the pairwise expansion otherwise.
inline Rational grid_l2_squared(const PointSet& p, const GridSpec& g, std::uint64_t cap = kDefaultCellCap) {
  bool fits = true;
  try {
    checked_cells(static_cast<std::uint64_t>(g.resolution()), g.dim(), cap);
  } catch (const Error&) {
    fits = false;
  }
  if (fits) return grid_norms(CornerDiscrepancyField(p, g, cap)).l2_squared;
  check_dims(p, g);
  return grid_l2_squared_pairwise(p, g.resolution());
}

inline bounds::BoundReport theorem1_verify(const PointSet& p, std::uint64_t b, unsigned tau, std::string tag = {},
                                           std::uint64_t cap = kDefaultCellCap) {
  detail::require_corner_points(p);
  require(b >= 2, ErrorCode::invalid_argument, "base must be at least 2");
  require(tau >= 1, ErrorCode::invalid_argument, "tau must be at least 1");
  const std::uint64_t n = p.size();
  require(n >= b, ErrorCode::precondition, "Theorem 1 needs N >= b");
  const unsigned d = p.dim();
  const unsigned nu = derive_nu(n, b);
  const GridSpec g = GridSpec::corner(d, b, nu + tau);
  const Rational lhs2 = grid_l2_squared(p, g, cap);

  const Rational c = bounds::roth_pairing_constant(b, d);
  const double logn = std::log(static_cast<double>(n)) / std::log(static_cast<double>(b));
  const double fact = static_cast<double>(factorial(d - 1));
  const double rhs = c.get_d() * std::pow(logn, (d - 1) / 2.0) / std::sqrt(fact);
  const std::uint64_t card = haar::haar_index_card(nu, d);

  bounds::BoundReport rep;
  rep.theorem = "1";
  rep.lhs_squared = to_long_double(lhs2);
  rep.lhs = std::sqrt(rep.lhs_squared);
  rep.rhs = rhs;
  rep.rhs_squared = rhs * rhs;
  rep.lhs_squared_exact = to_string(lhs2);
  if (d == 1) rep.rhs_squared_exact = to_string(Rational(c * c));
  rep.constants = {
      {"(b-1)/b^(2d+3)", c.get_d(), bounds::ConstantSource::paper_explicit},
      {"roth_c", bounds::roth_constant(b, d), bounds::ConstantSource::paper_explicit},
      {"(d-1)!", fact, d == 1 ? bounds::ConstantSource::convention : bounds::ConstantSource::paper_explicit},
  };
  rep.input = {n, d, g.resolution(), b, std::nullopt, std::nullopt, std::move(tag)};
  bounds::finalize(rep);
  // Exact form of the stronger intermediate step: ||D||^2 >= card(H_nu^d) c^2.
  const Rational chain = Rational(static_cast<long>(card)) * c * c;
  rep.extra["nu"] = nu;
  rep.extra["tau"] = tau;
  rep.extra["card_H"] = card;
  rep.extra["chain_rhs_squared_exact"] = to_string(chain);
  rep.extra["chain_holds"] = lhs2 >= chain;
  return rep;
}

/// The d = 2 linf bound: max_j |D(j/M)| against kappa (nu+1)[...]/2.
inline bounds::BoundReport theorem1_linf_verify(const PointSet& p, std::uint64_t b, unsigned tau, std::optional<double> kappa = {},
                                                std::string tag = {}) {
  detail::require_corner_points(p);
  require(p.dim() == 2, ErrorCode::dimension_mismatch, "the linf bound is stated for d = 2");
  const std::uint64_t n = p.size();
  require(n >= b, ErrorCode::precondition, "Theorem 1 needs N >= b");
  const unsigned nu = derive_nu(n, b);
  const GridSpec g = GridSpec::corner(2, b, nu + tau);
  const double k = kappa.value_or(bounds::kappa_opt(b));
  const GridNorms norms = grid_norms(CornerDiscrepancyField(p, g));

  bounds::BoundReport rep;
  rep.theorem = "1-linf";
  rep.lhs = norms.linf.get_d();
  rep.lhs_squared = rep.lhs * rep.lhs;
  rep.rhs = bounds::linf_bound(b, nu, k);
  rep.rhs_squared = rep.rhs * rep.rhs;
  rep.constants = {
      {"kappa", k, kappa ? bounds::ConstantSource::convention : bounds::ConstantSource::calibrated},
      {"(b-1)b^-7 - kappa b^-5/(b-1-kappa)", bounds::linf_objective(b, k) / k, bounds::ConstantSource::paper_explicit},
  };
  rep.input = {n, 2, g.resolution(), b, std::nullopt, std::nullopt, std::move(tag)};
  bounds::finalize(rep);
  rep.extra["nu"] = nu;
  rep.extra["tau"] = tau;
  rep.extra["argmax"] = norms.argmax;
  return rep;
}

/// CSV of the field: j_1..j_d, count, discrepancy (as a reduced rational).
inline void write_field_csv(std::ostream& out, const CornerDiscrepancyField& f) {
  const unsigned d = f.dim();
  for (unsigned i = 0; i < d; ++i) out << 'j' << (i + 1) << ',';
  out << "count,discrepancy\n";
  std::vector<std::int64_t> j(d, 1);
  for (std::uint64_t flat = 0; flat < f.cells(); ++flat) {
    for (unsigned i = 0; i < d; ++i) out << j[i] << ',';
    Rational v(to_integer(f.scaled(flat, j)), to_integer(f.scale()));
    v.canonicalize();
    out << f.count_flat(flat) << ',' << v.get_str() << '\n';
    detail::advance_cell(f.resolution(), j);
  }
}

}  // namespace discrepancy::corner
