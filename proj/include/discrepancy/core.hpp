#pragma once

// Shared plumbing: structured errors, exact-integer helpers, rationals,
// compensated summation and a chunked parallel reducer.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace discrepancy {

using Rational = mpq_class;
using Integer = mpz_class;
using i128 = __int128;
using u128 = unsigned __int128;

enum class ErrorCode {
  dimension_mismatch,
  invalid_argument,
  precondition,
  cap_exceeded,
  overflow,
  parse_error,
  hypothesis,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::cap_exceeded: return "cap_exceeded";
    case ErrorCode::overflow: return "overflow";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::hypothesis: return "hypothesis";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

/// Default cap on materialized grids (M^d cells) and generated lattices (K^d points).
inline constexpr std::uint64_t kDefaultCellCap = std::uint64_t{1} << 26;

/// Checked integer power; throws on overflow of the 64-bit range.
inline std::uint64_t ipow(std::uint64_t base, unsigned exp) {
  std::uint64_t result = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (base != 0 && result > UINT64_MAX / base) throw Error(ErrorCode::overflow, "integer power overflows 64 bits");
    result *= base;
  }
  return result;
}

/// M^d with a cap check, used before every grid materialization.
inline std::uint64_t checked_cells(std::uint64_t m, unsigned d, std::uint64_t cap = kDefaultCellCap) {
  std::uint64_t cells = 1;
  for (unsigned i = 0; i < d; ++i) {
    if (cells > cap / std::max<std::uint64_t>(m, 1)) {
      throw Error(ErrorCode::cap_exceeded, "grid of " + std::to_string(m) + "^" + std::to_string(d) +
                                               " cells exceeds the cap of " + std::to_string(cap));
    }
    cells *= m;
  }
  require(cells <= cap, ErrorCode::cap_exceeded, "grid exceeds the cell cap");
  return cells;
}

inline Integer to_integer(i128 v) {
  const bool neg = v < 0;
  u128 mag = neg ? u128(0) - u128(v) : u128(v);
  Integer hi(static_cast<unsigned long>(std::uint64_t(mag >> 64)));
  Integer lo(static_cast<unsigned long>(std::uint64_t(mag)));
  Integer out = (hi << 64) + lo;
  return neg ? Integer(-out) : out;
}

inline Integer to_integer_unsigned(u128 v) {
  Integer hi(static_cast<unsigned long>(std::uint64_t(v >> 64)));
  Integer lo(static_cast<unsigned long>(std::uint64_t(v)));
  return (hi << 64) + lo;
}

inline Integer to_integer(std::uint64_t v) { return Integer(static_cast<unsigned long>(v)); }
inline Integer to_integer(std::int64_t v) { return Integer(static_cast<long>(v)); }

inline Integer integer_pow(std::uint64_t base, unsigned exp) {
  Integer out;
  mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(base), exp);
  return out;
}

inline Rational make_rational(const Integer& num, const Integer& den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline Rational make_rational(std::int64_t num, std::int64_t den) {
  return make_rational(to_integer(num), to_integer(den));
}

/// Exact rational value of a finite double.
inline Rational rational_from_double(double x) {
  Rational q(x);  // mpq_set_d is exact
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline long double to_long_double(const Rational& q) {
  // mpq_get_d truncates; go through a scaled integer division for a few extra bits.
  const Integer& num = q.get_num();
  const Integer& den = q.get_den();
  if (num == 0) return 0.0L;
  long nexp = 0, dexp = 0;
  double nm = mpz_get_d_2exp(&nexp, num.get_mpz_t());
  double dm = mpz_get_d_2exp(&dexp, den.get_mpz_t());
  return std::ldexp(static_cast<long double>(nm) / static_cast<long double>(dm), static_cast<int>(nexp - dexp));
}

inline i128 checked_add(i128 a, i128 b) {
  i128 out;
  if (__builtin_add_overflow(a, b, &out)) throw Error(ErrorCode::overflow, "128-bit accumulator overflow");
  return out;
}

inline i128 checked_mul(i128 a, i128 b) {
  i128 out;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(ErrorCode::overflow, "128-bit product overflow");
  return out;
}

/// Small exact fraction for user-facing parameters such as epsilon = 1/18.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Fraction() = default;
  Fraction(std::int64_t n, std::int64_t d) : num(n), den(d) {
    require(d != 0, ErrorCode::invalid_argument, "zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Neumaier's variant of Kahan summation.
template <typename Real = double>
class KahanSum {
 public:
  void add(Real x) {
    const Real t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  KahanSum& operator+=(Real x) {
    add(x);
    return *this;
  }
  void merge(const KahanSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  Real value() const { return sum_ + comp_; }

 private:
  Real sum_ = 0;
  Real comp_ = 0;
};

/// Worker count used by the chunked reducers; 0 means hardware concurrency.
inline unsigned& thread_limit() {
  static unsigned limit = 0;
  return limit;
}

inline unsigned worker_count() {
  unsigned limit = thread_limit();
  if (limit == 0) limit = std::max(1u, std::thread::hardware_concurrency());
  return limit;
}

/// Splits [0, n) into fixed chunks (independent of the worker count), runs
/// `body(begin, end, chunk_index)` over them and returns per-chunk results in
/// chunk order, so floating reductions are reproducible for any --threads.
template <typename Result, typename Body>
std::vector<Result> chunked_map(std::size_t n, std::size_t chunks, Body body) {
  chunks = std::max<std::size_t>(1, std::min(chunks, n == 0 ? std::size_t{1} : n));
  std::vector<Result> results(chunks);
  const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(chunks));
  auto run = [&](std::size_t c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    results[c] = body(begin, end, c);
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers) run(c);
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

inline constexpr long double kPiL = 3.141592653589793238462643383279502884L;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// sin(2*pi*num/den) and cos(2*pi*num/den) with the argument reduced exactly
/// in integers before any floating point is involved.
inline long double sin_2pi_frac(std::int64_t num, std::int64_t den) {
  std::int64_t r = num % den;
  if (r < 0) r += den;
  if (2 * r > den) r -= den;  // r in (-den/2, den/2]
  return std::sin(2.0L * kPiL * static_cast<long double>(r) / static_cast<long double>(den));
}

inline long double cos_2pi_frac(std::int64_t num, std::int64_t den) {
  std::int64_t r = num % den;
  if (r < 0) r += den;
  if (2 * r > den) r -= den;
  return std::cos(2.0L * kPiL * static_cast<long double>(r) / static_cast<long double>(den));
}

/// Binomial coefficient with overflow check.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  u128 out = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    out = out * (n - k + i) / i;
    if (out > UINT64_MAX) throw Error(ErrorCode::overflow, "binomial overflows 64 bits");
  }
  return static_cast<std::uint64_t>(out);
}

inline std::uint64_t factorial(unsigned n) {
  std::uint64_t out = 1;
  for (unsigned i = 2; i <= n; ++i) out *= i;
  return out;
}

}  // namespace discrepancy
