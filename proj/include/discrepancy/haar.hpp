#pragma once

// b-adic intervals and boxes, their Haar functions, the index sets H_nu^d
// and the grid inner product <f,g> = M^-d sum f g, all in exact arithmetic.

#include <functional>
#include <span>
#include <vector>

#include "discrepancy/core.hpp"
#include "discrepancy/geometry.hpp"

namespace discrepancy::haar {

/// I = (a/b^r, (a+1)/b^r]
struct BAdicInterval {
  std::uint64_t b = 2;
  unsigned r = 0;
  std::uint64_t a = 0;

  BAdicInterval() = default;
  BAdicInterval(std::uint64_t base, unsigned resolution, std::uint64_t offset) : b(base), r(resolution), a(offset) {
    require(b >= 2, ErrorCode::invalid_argument, "base must be at least 2");
    require(a < ipow(b, r), ErrorCode::invalid_argument, "offset must satisfy 0 <= a < b^r");
  }

  Rational length() const { return Rational(1, 1) / Rational(integer_pow(b, r)); }
  Rational left() const { return make_rational(to_integer(a), integer_pow(b, r)); }
  Rational right() const { return make_rational(to_integer(a + 1), integer_pow(b, r)); }
};

/// h_I(x): -1 on the first child (a/b^r, a/b^r + b^-(r+1)], +1 on the second, 0 elsewhere.
inline int haar_1d(const BAdicInterval& iv, const Rational& x) {
  // t = x b^(r+1) - a b; the first child is t in (0,1], the second t in (1,2].
  const Rational t = x * Rational(integer_pow(iv.b, iv.r + 1)) - Rational(to_integer(iv.a * iv.b));
  if (t > 0 && t <= 1) return -1;
  if (t > 1 && t <= 2) return 1;
  return 0;
}

/// h_I(j/M) with integer comparisons only.
inline int haar_1d_grid(const BAdicInterval& iv, std::int64_t j, std::int64_t m) {
  const i128 scale = static_cast<i128>(ipow(iv.b, iv.r + 1));
  const i128 lhs = i128(j) * scale;     // j b^(r+1)
  const i128 base = i128(iv.a) * i128(iv.b) * m;  // a b M
  if (lhs > base && lhs <= base + m) return -1;
  if (lhs > base + m && lhs <= base + 2 * m) return 1;
  return 0;
}

/// R = I_1 x ... x I_d, all with the same base.
struct BAdicBox {
  std::uint64_t b = 2;
  std::vector<unsigned> r;
  std::vector<std::uint64_t> a;

  unsigned dim() const { return static_cast<unsigned>(r.size()); }
  BAdicInterval interval(unsigned i) const { return BAdicInterval(b, r[i], a[i]); }
  unsigned total_resolution() const {
    unsigned s = 0;
    for (unsigned v : r) s += v;
    return s;
  }
  Rational volume() const { return Rational(1, 1) / Rational(integer_pow(b, total_resolution())); }

  friend bool operator==(const BAdicBox& x, const BAdicBox& y) { return x.b == y.b && x.r == y.r && x.a == y.a; }
};

inline int haar_box(const BAdicBox& box, std::span<const Rational> x) {
  require(x.size() == box.dim(), ErrorCode::dimension_mismatch, "point and box dimensions differ");
  int v = 1;
  for (unsigned i = 0; i < box.dim() && v != 0; ++i) v *= haar_1d(box.interval(i), x[i]);
  return v;
}

inline int haar_box_grid(const BAdicBox& box, std::span<const std::int64_t> j, std::int64_t m) {
  int v = 1;
  for (unsigned i = 0; i < box.dim() && v != 0; ++i) v *= haar_1d_grid(box.interval(i), j[i], m);
  return v;
}

/// (1/M) sum_{j=1}^M h_I(j/M). `guaranteed` records whether the grid is fine
/// enough (b^(r+1) divides M) for the mean-zero identity to be promised.
struct MeanZeroResult {
  Rational value;
  bool guaranteed = false;
};

inline MeanZeroResult haar_mean_zero_check(const BAdicInterval& iv, const GridSpec& g) {
  const std::int64_t m = g.resolution();
  std::int64_t sum = 0;
  for (std::int64_t j = 1; j <= m; ++j) sum += haar_1d_grid(iv, j, m);
  MeanZeroResult out;
  out.value = make_rational(sum, m);
  out.guaranteed = g.kind() == GridKind::corner && g.base() == iv.b && iv.r + 1 <= g.exponent();
  return out;
}

/// sum_{j=1}^M (j/M) h_I(j/M); equals (M/b^2)|I|^2 whenever b^(r+1) | M.
inline Rational haar_weighted_sum(const BAdicInterval& iv, std::int64_t m) {
  i128 sum = 0;
  for (std::int64_t j = 1; j <= m; ++j) sum += i128(j) * haar_1d_grid(iv, j, m);
  return make_rational(to_integer(sum), to_integer(m));
}

// ---------------------------------------------------------------- H_nu^d

/// All r in N^d with r_1 + ... + r_d = nu, in lexicographic order.
inline std::vector<std::vector<unsigned>> haar_index_set(unsigned nu, unsigned d) {
  require(d >= 1, ErrorCode::invalid_argument, "dimension must be positive");
  std::vector<std::vector<unsigned>> out;
  std::vector<unsigned> cur(d, 0);
  std::function<void(unsigned, unsigned)> rec = [&](unsigned axis, unsigned left) {
    if (axis + 1 == d) {
      cur[axis] = left;
      out.push_back(cur);
      return;
    }
    for (unsigned v = 0; v <= left; ++v) {
      cur[axis] = v;
      rec(axis + 1, left - v);
    }
  };
  rec(0, nu);
  return out;
}

inline std::uint64_t haar_index_card(unsigned nu, unsigned d) { return binomial(nu + d - 1, d - 1); }

// ---------------------------------------------------------------- D_r^d

/// The b^(r_1+...+r_d) boxes of D_r^d, addressed by a mixed-radix index
/// (last axis fastest). Boxes are produced on demand.
class BoxFamily {
 public:
  BoxFamily(std::uint64_t b, std::vector<unsigned> r) : b_(b), r_(std::move(r)) {
    require(b_ >= 2, ErrorCode::invalid_argument, "base must be at least 2");
    extents_.reserve(r_.size());
    count_ = 1;
    for (unsigned v : r_) {
      extents_.push_back(ipow(b_, v));
      count_ = count_ * extents_.back();
    }
  }

  std::uint64_t size() const { return count_; }
  std::uint64_t base() const { return b_; }
  const std::vector<unsigned>& resolutions() const { return r_; }
  const std::vector<std::uint64_t>& extents() const { return extents_; }

  BAdicBox at(std::uint64_t index) const {
    require(index < count_, ErrorCode::invalid_argument, "box index out of range");
    BAdicBox box;
    box.b = b_;
    box.r = r_;
    box.a.assign(r_.size(), 0);
    for (std::size_t i = r_.size(); i-- > 0;) {
      box.a[i] = index % extents_[i];
      index /= extents_[i];
    }
    return box;
  }

  std::uint64_t index_of(std::span<const std::uint64_t> a) const {
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < r_.size(); ++i) idx = idx * extents_[i] + a[i];
    return idx;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::uint64_t i = 0; i < count_; ++i) fn(at(i));
  }

 private:
  std::uint64_t b_;
  std::vector<unsigned> r_;
  std::vector<std::uint64_t> extents_;
  std::uint64_t count_ = 1;
};

inline std::vector<BAdicBox> enumerate_boxes(std::uint64_t b, const std::vector<unsigned>& r) {
  BoxFamily fam(b, r);
  std::vector<BAdicBox> out;
  out.reserve(fam.size());
  fam.for_each([&](const BAdicBox& box) { out.push_back(box); });
  return out;
}

/// Offset a with c in (a/b^r, (a+1)/b^r], or nullopt when c = 0 (no box holds it).
inline std::optional<std::uint64_t> containing_offset(const Coordinate& c, std::uint64_t b, unsigned r) {
  bool integral = false;
  const std::int64_t scale = static_cast<std::int64_t>(ipow(b, r));
  const std::int64_t fl = c.scaled_floor(scale, &integral);
  const std::int64_t a = integral ? fl - 1 : fl;
  if (a < 0) return std::nullopt;
  return static_cast<std::uint64_t>(a);
}

// ---------------------------------------------------------------- grid functions

/// Rational-valued function sampled on {1/M, ..., M/M}^d (indices j in 1..M).
struct GridFunction {
  unsigned d = 1;
  std::int64_t m = 1;
  std::function<Rational(std::span<const std::int64_t>)> value;
};

inline GridFunction haar_grid_function(const BAdicBox& box, std::int64_t m) {
  return GridFunction{box.dim(), m, [box, m](std::span<const std::int64_t> j) {
                        return Rational(haar_box_grid(box, j, m));
                      }};
}

inline GridFunction constant_grid_function(unsigned d, std::int64_t m, Rational c) {
  return GridFunction{d, m, [c](std::span<const std::int64_t>) { return c; }};
}

/// Calls fn(j) for every j in {1..M}^d.
template <typename Fn>
void for_each_grid_index(unsigned d, std::int64_t m, Fn&& fn) {
  std::vector<std::int64_t> j(d, 1);
  while (true) {
    fn(std::span<const std::int64_t>(j));
    unsigned i = d;
    while (i-- > 0) {
      if (++j[i] <= m) break;
      j[i] = 1;
    }
    if (i == static_cast<unsigned>(-1)) return;
  }
}

/// <f,g> = M^-d sum_j f(j/M) g(j/M), exact.
inline Rational inner_product(const GridFunction& f, const GridFunction& g) {
  require(f.d == g.d && f.m == g.m, ErrorCode::dimension_mismatch, "grid functions live on different grids");
  checked_cells(static_cast<std::uint64_t>(f.m), f.d);
  Rational sum = 0;
  for_each_grid_index(f.d, f.m, [&](std::span<const std::int64_t> j) { sum += f.value(j) * g.value(j); });
  return sum / Rational(integer_pow(static_cast<std::uint64_t>(f.m), f.d));
}

/// <h_R, h_R'> through the product structure: prod_u (1/M) sum_j h_Iu h_I'u.
inline Rational haar_pair_inner(const BAdicBox& x, const BAdicBox& y, std::int64_t m) {
  require(x.dim() == y.dim(), ErrorCode::dimension_mismatch, "boxes have different dimensions");
  Rational out = 1;
  for (unsigned u = 0; u < x.dim(); ++u) {
    std::int64_t s = 0;
    const auto ix = x.interval(u);
    const auto iy = y.interval(u);
    for (std::int64_t j = 1; j <= m; ++j) s += haar_1d_grid(ix, j, m) * haar_1d_grid(iy, j, m);
    out *= make_rational(s, m);
    if (out == 0) break;
  }
  return out;
}

}  // namespace discrepancy::haar
