#pragma once

// Point sets, grids, snapping and the generator suite.

#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "discrepancy/core.hpp"

namespace discrepancy {

enum class PointMode { corner, toroidal };

inline const char* to_string(PointMode m) { return m == PointMode::corner ? "corner" : "toroidal"; }

/// One coordinate in [0,1): either an exact fraction num/den or a binary64 value.
class Coordinate {
 public:
  static Coordinate from_double(double v) {
    require(std::isfinite(v) && v >= 0.0 && v < 1.0, ErrorCode::invalid_argument,
            "coordinate " + std::to_string(v) + " outside [0,1)");
    Coordinate c;
    c.value_ = v;
    return c;
  }

  static Coordinate from_fraction(std::int64_t num, std::int64_t den) {
    require(den > 0, ErrorCode::invalid_argument, "coordinate denominator must be positive");
    require(num >= 0 && num < den, ErrorCode::invalid_argument,
            "coordinate " + std::to_string(num) + "/" + std::to_string(den) + " outside [0,1)");
    const std::int64_t g = std::gcd(num, den);
    Coordinate c;
    c.exact_ = true;
    c.num_ = g > 0 ? num / g : 0;
    c.den_ = g > 0 ? den / g : 1;
    c.value_ = static_cast<double>(c.num_) / static_cast<double>(c.den_);
    return c;
  }

  bool is_fraction() const { return exact_; }
  double value() const { return value_; }
  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }

  Rational exact() const { return exact_ ? make_rational(num_, den_) : rational_from_double(value_); }

  /// floor(scale * c), computed exactly. `is_integer` reports whether scale*c is integral.
  std::int64_t scaled_floor(std::int64_t scale, bool* is_integer = nullptr) const {
    require(scale > 0, ErrorCode::invalid_argument, "scale must be positive");
    if (exact_) {
      const i128 prod = i128(scale) * num_;
      if (is_integer) *is_integer = (prod % den_) == 0;
      return static_cast<std::int64_t>(prod / den_);
    }
    if (value_ == 0.0) {
      if (is_integer) *is_integer = true;
      return 0;
    }
    int exp = 0;
    const double frac = std::frexp(value_, &exp);  // value = frac * 2^exp, frac in [0.5,1)
    const std::uint64_t mant = static_cast<std::uint64_t>(std::ldexp(frac, 53));
    const int shift = 53 - exp;  // value = mant * 2^-shift, shift >= 54
    const u128 prod = u128(mant) * u128(scale);
    if (shift >= 127) {
      if (is_integer) *is_integer = false;
      return 0;
    }
    const u128 fl = prod >> shift;
    if (is_integer) *is_integer = (fl << shift) == prod;
    return static_cast<std::int64_t>(fl);
  }

  /// Exact test c < a / scale.
  bool less_than(std::int64_t a, std::int64_t scale) const {
    bool integral = false;
    const std::int64_t f = scaled_floor(scale, &integral);
    return f < a;
  }

  friend bool operator==(const Coordinate& x, const Coordinate& y) { return x.exact() == y.exact(); }

 private:
  double value_ = 0.0;
  bool exact_ = false;
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// N points in [0,1)^d, tagged for the corner engine or the torus engines.
class PointSet {
 public:
  PointSet(unsigned d, PointMode mode, std::vector<Coordinate> coords) : d_(d), mode_(mode), coords_(std::move(coords)) {
    require(d_ >= 1, ErrorCode::invalid_argument, "dimension must be positive");
    require(!coords_.empty(), ErrorCode::invalid_argument, "a point set needs at least one point");
    require(coords_.size() % d_ == 0, ErrorCode::dimension_mismatch, "coordinate count is not a multiple of d");
  }

  static PointSet from_doubles(unsigned d, PointMode mode, std::span<const double> flat) {
    std::vector<Coordinate> coords;
    coords.reserve(flat.size());
    for (double v : flat) coords.push_back(Coordinate::from_double(v));
    return PointSet(d, mode, std::move(coords));
  }

  unsigned dim() const { return d_; }
  std::size_t size() const { return coords_.size() / d_; }
  PointMode mode() const { return mode_; }
  const Coordinate& coord(std::size_t n, unsigned i) const { return coords_[n * d_ + i]; }
  double value(std::size_t n, unsigned i) const { return coords_[n * d_ + i].value(); }
  std::span<const Coordinate> point(std::size_t n) const { return {coords_.data() + n * d_, d_}; }
  const std::vector<Coordinate>& coordinates() const { return coords_; }

  PointSet with_mode(PointMode mode) const { return PointSet(d_, mode, coords_); }

 private:
  unsigned d_;
  PointMode mode_;
  std::vector<Coordinate> coords_;
};

enum class GridKind { corner, torus };

/// Grid resolution M in dimension d. Corner grids carry the base b and the
/// exponent with M = b^exponent; torus grids require M even.
class GridSpec {
 public:
  static GridSpec corner(unsigned d, std::uint64_t b, unsigned exponent) {
    require(b >= 2, ErrorCode::invalid_argument, "base must be at least 2");
    require(exponent >= 1, ErrorCode::invalid_argument, "corner grid exponent must be at least 1");
    GridSpec g(d, static_cast<std::int64_t>(ipow(b, exponent)), GridKind::corner);
    g.base_ = b;
    g.exponent_ = exponent;
    return g;
  }

  /// Corner grid of arbitrary resolution M (viewed as M = M^1).
  static GridSpec corner_resolution(unsigned d, std::int64_t m) {
    require(m >= 2, ErrorCode::invalid_argument, "grid resolution must be at least 2");
    return corner(d, static_cast<std::uint64_t>(m), 1);
  }

  static GridSpec torus(unsigned d, std::int64_t m) {
    require(m >= 2 && m % 2 == 0, ErrorCode::invalid_argument, "torus grid needs an even M >= 2");
    return GridSpec(d, m, GridKind::torus);
  }

  unsigned dim() const { return d_; }
  std::int64_t resolution() const { return m_; }
  GridKind kind() const { return kind_; }
  std::uint64_t base() const { return base_; }
  unsigned exponent() const { return exponent_; }

  /// J_M = {-M/2, ..., M/2-1}
  std::int64_t j_min() const { return -m_ / 2; }
  std::int64_t j_max() const { return m_ / 2 - 1; }
  std::int64_t card_j() const { return m_; }
  /// S_M = {1/M, ..., 1/2 - 1/M}; radii indices r = 1 .. M/2-1
  std::int64_t card_s() const { return m_ / 2 - 1; }

  std::uint64_t cells(std::uint64_t cap = kDefaultCellCap) const { return checked_cells(static_cast<std::uint64_t>(m_), d_, cap); }

  /// Representative of j mod M in J_M.
  std::int64_t wrap_j(std::int64_t j) const {
    std::int64_t r = j % m_;
    if (r < 0) r += m_;
    return r >= m_ / 2 ? r - m_ : r;
  }

 private:
  GridSpec(unsigned d, std::int64_t m, GridKind kind) : d_(d), m_(m), kind_(kind) {
    require(d_ >= 1, ErrorCode::invalid_argument, "dimension must be positive");
  }

  unsigned d_;
  std::int64_t m_;
  GridKind kind_;
  std::uint64_t base_ = 0;
  unsigned exponent_ = 0;
};

/// Grid representatives of a point set.
struct SnappedSet {
  unsigned d = 0;
  std::int64_t m = 0;
  GridKind kind = GridKind::corner;
  std::vector<std::int64_t> z;         // N*d integer vectors
  std::vector<double> q;               // N*d residuals (nearest snap only)
  std::vector<double> p_tilde;         // N*d grid points z/M mod 1 in [0,1) (nearest snap only)
  std::vector<Rational> q_exact;       // N*d exact residuals (nearest snap only)
  std::shared_ptr<const PointSet> origin;

  std::size_t size() const { return d == 0 ? 0 : z.size() / d; }
  std::int64_t zc(std::size_t n, unsigned i) const { return z[n * d + i]; }
};

inline void check_dims(const PointSet& p, const GridSpec& g) {
  require(p.dim() == g.dim(), ErrorCode::dimension_mismatch,
          "point set has d=" + std::to_string(p.dim()) + " but grid has d=" + std::to_string(g.dim()));
}

/// Floor snapping z_n = floor(M p_n). Corner grids keep z in {0..M-1};
/// torus grids re-center z into J_M.
inline SnappedSet snap_corner(const PointSet& p, const GridSpec& g) {
  check_dims(p, g);
  require(g.resolution() >= 2, ErrorCode::precondition, "M must be at least 2");
  require((g.kind() == GridKind::corner) == (p.mode() == PointMode::corner), ErrorCode::precondition,
          "point-set mode does not match the grid kind");
  SnappedSet s;
  s.d = p.dim();
  s.m = g.resolution();
  s.kind = g.kind();
  s.origin = std::make_shared<const PointSet>(p);
  s.z.reserve(p.size() * p.dim());
  for (std::size_t n = 0; n < p.size(); ++n) {
    for (unsigned i = 0; i < p.dim(); ++i) {
      std::int64_t z = p.coord(n, i).scaled_floor(s.m);
      if (g.kind() == GridKind::torus) z = g.wrap_j(z);
      s.z.push_back(z);
    }
  }
  return s;
}

/// Nearest snapping p = p~ + q with p~ in M^-1 Z^d (mod 1) and q in [-1/(2M), 1/(2M))^d.
inline SnappedSet snap_nearest(const PointSet& p, const GridSpec& g) {
  check_dims(p, g);
  require(g.kind() == GridKind::torus, ErrorCode::precondition, "nearest snapping needs a torus grid");
  require(p.mode() == PointMode::toroidal, ErrorCode::precondition, "nearest snapping needs a toroidal point set");
  const std::int64_t m = g.resolution();
  SnappedSet s;
  s.d = p.dim();
  s.m = m;
  s.kind = g.kind();
  s.origin = std::make_shared<const PointSet>(p);
  const std::size_t total = p.size() * p.dim();
  s.z.reserve(total);
  s.q.reserve(total);
  s.p_tilde.reserve(total);
  s.q_exact.reserve(total);
  for (std::size_t n = 0; n < p.size(); ++n) {
    for (unsigned i = 0; i < p.dim(); ++i) {
      const Coordinate& c = p.coord(n, i);
      // z = floor(M p + 1/2) = (floor(2 M p) + 1) >> 1
      const std::int64_t twice = c.scaled_floor(2 * m);
      const std::int64_t zraw = (twice + 1) >> 1;  // in 0..M
      const std::int64_t zmod = zraw % m;
      const double pt = static_cast<double>(zmod) / static_cast<double>(m);
      const double qv = (zraw == m) ? c.value() - 1.0 : c.value() - pt;
      s.z.push_back(g.wrap_j(zraw));
      s.p_tilde.push_back(pt);
      s.q.push_back(qv);
      s.q_exact.push_back(c.exact() - make_rational(zraw, m));
    }
  }
  return s;
}

// ---------------------------------------------------------------- generators

/// The K^d lattice points (j_1/K, ..., j_d/K).
inline PointSet gen_lattice(std::int64_t k, unsigned d, PointMode mode = PointMode::corner,
                            std::uint64_t cap = kDefaultCellCap) {
  require(k >= 1, ErrorCode::invalid_argument, "lattice size K must be positive");
  require(d >= 1, ErrorCode::invalid_argument, "dimension must be positive");
  const std::uint64_t count = checked_cells(static_cast<std::uint64_t>(k), d, cap);
  std::vector<Coordinate> coords;
  coords.reserve(count * d);
  std::vector<std::int64_t> idx(d, 0);
  for (std::uint64_t n = 0; n < count; ++n) {
    for (unsigned i = 0; i < d; ++i) coords.push_back(Coordinate::from_fraction(idx[i], k));
    for (unsigned i = d; i-- > 0;) {
      if (++idx[i] < k) break;
      idx[i] = 0;
    }
  }
  return PointSet(d, mode, std::move(coords));
}

/// Radical inverse of n in base b as an exact fraction.
inline Coordinate radical_inverse(std::uint64_t b, std::uint64_t n) {
  require(b >= 2, ErrorCode::invalid_argument, "base must be at least 2");
  std::int64_t num = 0;
  std::int64_t den = 1;
  while (n > 0) {
    require(den <= INT64_MAX / static_cast<std::int64_t>(b), ErrorCode::overflow, "radical inverse denominator overflow");
    num = num * static_cast<std::int64_t>(b) + static_cast<std::int64_t>(n % b);
    den *= static_cast<std::int64_t>(b);
    n /= b;
  }
  return Coordinate::from_fraction(num, den);
}

inline PointSet gen_van_der_corput(std::uint64_t b, std::size_t n, PointMode mode = PointMode::corner) {
  require(n >= 1, ErrorCode::invalid_argument, "N must be positive");
  std::vector<Coordinate> coords;
  coords.reserve(n);
  for (std::size_t i = 0; i < n; ++i) coords.push_back(radical_inverse(b, i));
  return PointSet(1, mode, std::move(coords));
}

/// Two-dimensional Hammersley set (n/N, phi_b(n)).
inline PointSet gen_hammersley(std::uint64_t b, std::size_t n, PointMode mode = PointMode::corner) {
  require(n >= 1, ErrorCode::invalid_argument, "N must be positive");
  std::vector<Coordinate> coords;
  coords.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    coords.push_back(Coordinate::from_fraction(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n)));
    coords.push_back(radical_inverse(b, i));
  }
  return PointSet(2, mode, std::move(coords));
}

/// i.i.d. uniform points from mt19937_64; the 53-bit conversion is spelled out
/// so the stream is identical across standard libraries.
inline PointSet gen_uniform_random(std::size_t n, unsigned d, std::uint64_t seed, PointMode mode = PointMode::corner) {
  require(n >= 1, ErrorCode::invalid_argument, "N must be positive");
  std::mt19937_64 rng(seed);
  std::vector<Coordinate> coords;
  coords.reserve(n * d);
  for (std::size_t i = 0; i < n * d; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    coords.push_back(Coordinate::from_double(u));
  }
  return PointSet(d, mode, std::move(coords));
}

// ---------------------------------------------------------------- CSV I/O

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::string format_coordinate(const Coordinate& c) {
  if (c.is_fraction()) {
    if (c.numerator() == 0) return "0";
    return std::to_string(c.numerator()) + "/" + std::to_string(c.denominator());
  }
  return format_double(c.value());
}

inline Coordinate parse_coordinate(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  require(!field.empty(), ErrorCode::parse_error, "empty coordinate field");
  const auto slash = field.find('/');
  if (slash != std::string_view::npos) {
    std::int64_t num = 0, den = 0;
    auto a = field.substr(0, slash);
    auto b = field.substr(slash + 1);
    auto ra = std::from_chars(a.data(), a.data() + a.size(), num);
    auto rb = std::from_chars(b.data(), b.data() + b.size(), den);
    require(ra.ec == std::errc{} && ra.ptr == a.data() + a.size() && rb.ec == std::errc{} && rb.ptr == b.data() + b.size(),
            ErrorCode::parse_error, "bad rational literal '" + std::string(field) + "'");
    return Coordinate::from_fraction(num, den);
  }
  double v = 0.0;
  auto r = std::from_chars(field.data(), field.data() + field.size(), v);
  require(r.ec == std::errc{} && r.ptr == field.data() + field.size(), ErrorCode::parse_error,
          "bad decimal literal '" + std::string(field) + "'");
  return Coordinate::from_double(v);
}

/// Writes the point-set CSV: "# d=<d> mode=<mode>" then one point per line.
inline void write_points_csv(std::ostream& out, const PointSet& p) {
  out << "# d=" << p.dim() << " mode=" << to_string(p.mode()) << '\n';
  for (std::size_t n = 0; n < p.size(); ++n) {
    for (unsigned i = 0; i < p.dim(); ++i) {
      if (i) out << ',';
      out << format_coordinate(p.coord(n, i));
    }
    out << '\n';
  }
}

inline PointSet read_points_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::parse_error, "missing header line");
  unsigned d = 0;
  PointMode mode = PointMode::corner;
  {
    require(line.rfind("#", 0) == 0, ErrorCode::parse_error, "header must start with '#'");
    std::istringstream hs(line.substr(1));
    std::string tok;
    bool have_d = false, have_mode = false;
    while (hs >> tok) {
      if (tok.rfind("d=", 0) == 0) {
        auto v = std::string_view(tok).substr(2);
        auto r = std::from_chars(v.data(), v.data() + v.size(), d);
        require(r.ec == std::errc{} && d >= 1, ErrorCode::parse_error, "bad d in header");
        have_d = true;
      } else if (tok.rfind("mode=", 0) == 0) {
        auto v = tok.substr(5);
        if (v == "corner") {
          mode = PointMode::corner;
        } else if (v == "toroidal") {
          mode = PointMode::toroidal;
        } else {
          throw Error(ErrorCode::parse_error, "unknown mode '" + v + "'");
        }
        have_mode = true;
      }
    }
    require(have_d && have_mode, ErrorCode::parse_error, "header needs d=<d> and mode=<corner|toroidal>");
  }
  std::vector<Coordinate> coords;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    std::string_view rest(line);
    unsigned fields = 0;
    while (true) {
      const auto comma = rest.find(',');
      coords.push_back(parse_coordinate(rest.substr(0, comma)));
      ++fields;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    require(fields == d, ErrorCode::dimension_mismatch,
            "line " + std::to_string(lineno) + " has " + std::to_string(fields) + " fields, expected " + std::to_string(d));
  }
  return PointSet(d, mode, std::move(coords));
}

}  // namespace discrepancy
