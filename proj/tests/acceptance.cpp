// Acceptance runner: one pass/fail line per criterion. `--criterion N` runs a
// single criterion; without it all seventeen run in order.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "discrepancy/corner.hpp"
#include "discrepancy/identity.hpp"
#include "discrepancy/suite.hpp"
#include "discrepancy/torus_ball.hpp"
#include "discrepancy/torus_cube.hpp"
#include "oracles.hpp"

using namespace discrepancy;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Tally {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) {
      ++failures_;
      if (first_.empty()) first_ = what;
    }
  }
  std::uint64_t checks() const { return checks_; }
  std::uint64_t failures() const { return failures_; }
  Outcome outcome(std::string detail) const {
    std::ostringstream s;
    s << checks_ << " checks, " << failures_ << " failures";
    if (!detail.empty()) s << "; " << detail;
    if (!first_.empty()) s << "; first: " << first_;
    return {failures_ == 0, s.str()};
  }

 private:
  std::uint64_t checks_ = 0, failures_ = 0;
  std::string first_;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// h_I(x) for I = (a/b^r, (a+1)/b^r]: -1 on the first b-adic child, +1 on the second.
int haar_oracle(std::uint64_t b, unsigned r, std::uint64_t a, const Rational& x) {
  const Rational w = Rational(1) / Rational(integer_pow(b, r + 1));
  const Rational left = make_rational(to_integer(a), integer_pow(b, r));
  if (x > left && x <= left + w) return -1;
  if (x > left + w && x <= left + 2 * w) return 1;
  return 0;
}

template <typename Fn>
void for_each_index(unsigned d, std::int64_t lo, std::int64_t hi, Fn&& fn) {
  std::vector<std::int64_t> j(d, lo);
  while (true) {
    fn(std::span<const std::int64_t>(j));
    unsigned i = d;
    while (i-- > 0) {
      if (++j[i] <= hi) break;
      j[i] = lo;
    }
    if (i == static_cast<unsigned>(-1)) return;
  }
}

// ---------------------------------------------------------------- 1

Outcome criterion1() {
  Tally t;
  std::mt19937_64 rng(1001);
  const std::uint64_t bases[] = {2, 3, 5};
  std::uint64_t brute = 0;
  for (int cfg = 0; cfg < 1000; ++cfg) {
    const std::uint64_t b = bases[rng() % 3];
    const unsigned d = 1 + static_cast<unsigned>(rng() % 3);
    const unsigned tau = 1 + static_cast<unsigned>(rng() % 2);
    // nu <= 8 with the grid b^(nu+tau) kept below 2^20 per axis.
    unsigned nu_max = 8;
    while (ipow(b, nu_max + tau) > (1u << 20)) --nu_max;
    const unsigned nu = 2 + static_cast<unsigned>(rng() % (nu_max - 1));
    const std::uint64_t lo = ipow(b, nu - 2), hi = ipow(b, nu - 1);
    const std::uint64_t n = lo + rng() % (hi - lo);
    const auto p = gen_uniform_random(n, d, rng());
    const auto g = GridSpec::corner(d, b, nu + tau);
    const std::int64_t m = g.resolution();
    const Rational expected = make_rational(-to_integer(n), integer_pow(b, 2 * d + 2 * nu));

    const auto index = haar::haar_index_set(nu, d);
    const auto& r = index[rng() % index.size()];
    // Occupied boxes from exact membership a/b^r < x <= (a+1)/b^r.
    haar::BoxFamily fam(b, r);
    std::vector<bool> empty(fam.size(), true);
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<std::uint64_t> a(d);
      bool inside = true;
      for (unsigned i = 0; i < d && inside; ++i) {
        const Rational x = p.coord(k, i).exact() * Rational(integer_pow(b, r[i]));
        Integer c;
        mpz_cdiv_q(c.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
        inside = c >= 1;
        if (inside) a[i] = c.get_ui() - 1;
      }
      if (inside) empty[fam.index_of(a)] = false;
    }
    std::vector<std::uint64_t> candidates;
    for (std::uint64_t i = 0; i < fam.size(); ++i)
      if (empty[i]) candidates.push_back(i);
    for (int pick = 0; pick < 4 && !candidates.empty(); ++pick) {
      const auto idx = candidates[rng() % candidates.size()];
      const auto box = fam.at(idx);
      const Rational got = corner::haar_coefficient(p, box, g);
      t.check(got == expected, "b=" + std::to_string(b) + " d=" + std::to_string(d) + " nu=" + std::to_string(nu) + " N=" +
                                   std::to_string(n) + ": " + got.get_str() + " vs " + expected.get_str());
      // Direct grid sum on small grids: M^-d sum_j D(j/M) h_R(j/M).
      if (checked_cells(static_cast<std::uint64_t>(m), d, UINT64_MAX) * n <= 200000) {
        ++brute;
        Rational sum = 0;
        for_each_index(d, 1, m, [&](std::span<const std::int64_t> j) {
          std::vector<Rational> x(d);
          int h = 1;
          Rational vol = 1;
          for (unsigned i = 0; i < d; ++i) {
            x[i] = make_rational(j[i], m);
            vol *= x[i];
            h *= haar_oracle(b, box.r[i], box.a[i], x[i]);
          }
          if (h != 0) sum += h * (Rational(oracle::corner_count(p, x)) - Rational(static_cast<long>(n)) * vol);
        });
        Rational md = 1;
        for (unsigned i = 0; i < d; ++i) md *= m;
        sum /= md;
        t.check(sum == expected, "brute sum " + sum.get_str() + " vs " + expected.get_str());
      }
    }
  }
  return t.outcome(std::to_string(brute) + " boxes also summed over the grid");
}

// ---------------------------------------------------------------- 2

Outcome criterion2() {
  Tally t;
  for (std::uint64_t b : {2u, 3u, 5u}) {
    for (unsigned nu = 1; ipow(b, nu + 1) <= 729; ++nu) {
      for (unsigned tau = 1; ipow(b, nu + tau) <= 729; ++tau) {
        const auto m = static_cast<std::int64_t>(ipow(b, nu + tau));
        for (unsigned r = 0; r <= nu; ++r) {
          for (std::uint64_t a = 0; a < ipow(b, r); ++a) {
            const Rational len = Rational(1) / Rational(integer_pow(b, r));
            const Rational expected = Rational(m) / Rational(static_cast<long>(b * b)) * len * len;
            Rational direct = 0;
            for (std::int64_t j = 1; j <= m; ++j) {
              const Rational x = make_rational(j, m);
              direct += x * haar_oracle(b, r, a, x);
            }
            const Rational lib = haar::haar_weighted_sum(haar::BAdicInterval(b, r, a), m);
            t.check(direct == expected && lib == expected,
                    "b=" + std::to_string(b) + " M=" + std::to_string(m) + " r=" + std::to_string(r) + " a=" + std::to_string(a));
          }
        }
      }
    }
  }
  return t.outcome("");
}

// ---------------------------------------------------------------- 3

Outcome criterion3() {
  Tally t;
  std::uint64_t sets = 0, brute = 0;
  for (std::uint64_t b : {2u, 3u}) {
    for (unsigned d = 1; d <= 3; ++d) {
      for (std::size_t n : {5u, 12u, 30u, 64u, 120u}) {
        const unsigned nu = corner::derive_nu(n, b);
        const auto m = static_cast<std::int64_t>(ipow(b, nu + 1));
        if (checked_cells(static_cast<std::uint64_t>(m), d, UINT64_MAX) > (1u << 24)) continue;
        const auto g = GridSpec::corner(d, b, nu + 1);
        const Rational c = make_rational(to_integer(b - 1), integer_pow(b, 2 * d + 3));
        for (const auto& s : point_suite(d, n, PointMode::corner, 3)) {
          ++sets;
          const auto f = corner::build_F(s.points, g);
          const std::string tag = s.name + " b=" + std::to_string(b) + " d=" + std::to_string(d) + " N=" + std::to_string(n);
          for (const auto& v : f.pairing) t.check(v >= c, "<D,f_r> below (b-1)/b^(2d+3), " + tag);
          t.check(f.pairing_total >= Rational(static_cast<long>(f.card)) * c, "<D,F> below card(H) c, " + tag);
          t.check(f.norm_squared_total <= Rational(static_cast<long>(f.card)), "||F||^2 above card(H), " + tag);
          if (d == 2) {
            const auto gg = corner::build_G(s.points, g, f, rational_from_double(bounds::kappa_opt(b)));
            t.check(gg.l1_norm <= 2, "||G||_1 above 2, " + tag);
          }
          // Recount <D, F> and ||F||^2 from the grid on small cases.
          if (checked_cells(static_cast<std::uint64_t>(m), d, UINT64_MAX) * n <= 300000) {
            ++brute;
            Rational pair = 0, norm = 0;
            for_each_index(d, 1, m, [&](std::span<const std::int64_t> j) {
              int fv = 0;
              for (std::size_t k = 0; k < f.index.size(); ++k) fv += f.value(k, j);
              if (fv == 0) return;
              std::vector<Rational> x(d);
              Rational vol = 1;
              for (unsigned i = 0; i < d; ++i) {
                x[i] = make_rational(j[i], m);
                vol *= x[i];
              }
              pair += fv * (Rational(oracle::corner_count(s.points, x)) - Rational(static_cast<long>(n)) * vol);
              norm += fv * fv;
            });
            Rational md = 1;
            for (unsigned i = 0; i < d; ++i) md *= m;
            t.check(pair / md == f.pairing_total && norm / md == f.norm_squared_total, "grid recount differs, " + tag);
          }
        }
      }
    }
  }
  return t.outcome(std::to_string(sets) + " sets, " + std::to_string(brute) + " recounted");
}

// ---------------------------------------------------------------- 4

Outcome criterion4() {
  Tally t;
  double worst = 1e300;
  for (std::uint64_t b : {2u, 3u}) {
    for (unsigned d = 1; d <= 3; ++d) {
      for (std::size_t n : {4u, 9u, 27u, 50u, 64u, 100u, 125u, 200u}) {
        for (const auto& s : point_suite(d, n, PointMode::corner, 5)) {
          const auto rep = corner::theorem1_verify(s.points, b, 1);
          const double rhs = (b - 1.0) / std::pow(static_cast<double>(b), 2.0 * d + 3) *
                             std::pow(std::log(static_cast<double>(n)) / std::log(static_cast<double>(b)), (d - 1) / 2.0) /
                             std::sqrt(std::tgamma(static_cast<double>(d)));
          const std::string tag = s.name + " b=" + std::to_string(b) + " d=" + std::to_string(d) + " N=" + std::to_string(n);
          t.check(std::abs(rep.rhs - rhs) <= 1e-12 * rhs, "rhs differs from the formula, " + tag);
          t.check(rep.lhs >= rhs, "lhs " + num(rep.lhs) + " < rhs " + num(rhs) + ", " + tag);
          worst = std::min(worst, rep.lhs / rhs);
          if (rep.input.m <= 64 && d <= 2) {
            const Rational exact = oracle::grid_l2_squared(s.points, rep.input.m);
            t.check(exact.get_str() == rep.lhs_squared_exact, "grid l2 recount differs, " + tag);
          }
        }
      }
    }
  }
  return t.outcome("smallest margin " + num(worst));
}

// ---------------------------------------------------------------- 5

Outcome criterion5() {
  Tally t;
  double worst = 1e300;
  for (std::size_t n : {2u, 4u, 9u, 16u, 27u, 50u, 64u, 100u, 128u, 200u}) {
    for (const auto& s : point_suite(2, n, PointMode::corner, 5)) {
      const auto rep = corner::theorem1_linf_verify(s.points, 2, 1);
      const double kappa = rep.constants[0].value;
      const unsigned nu = corner::derive_nu(n, 2);
      const double rhs = kappa * (nu + 1) * (1.0 / 128 - kappa / 32 / (1 - kappa)) / 2;
      const std::string tag = s.name + " N=" + std::to_string(n);
      t.check(std::abs(rep.rhs - rhs) <= 1e-12 * rhs, "rhs differs from the formula, " + tag);
      t.check(rep.lhs >= rhs, "linf " + num(rep.lhs) + " < " + num(rhs) + ", " + tag);
      worst = std::min(worst, rep.lhs / rhs);
    }
  }
  return t.outcome("smallest margin " + num(worst));
}

// ---------------------------------------------------------------- 6

Outcome criterion6() {
  Tally t;
  std::mt19937_64 rng(606);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const unsigned d = 1 + trial % 2;
    const std::int64_t m = 2 * (2 + static_cast<std::int64_t>(rng() % 31));  // 4..64
    const std::size_t n = 1 + rng() % 20;
    const auto p = gen_uniform_random(n, d, rng(), PointMode::toroidal);
    const auto g = GridSpec::torus(d, m);
    const auto direct = torus_cube::ensemble_l2_direct(p, g);
    const double dv = static_cast<double>(to_long_double(direct.l2_squared));
    const double sv = torus_cube::spectral_l2_squared(spectral::exp_sums(snap_corner(p, g)));
    const double err = std::abs(dv - sv) / std::max(dv, 1e-300);
    worst = std::max(worst, err);
    t.check(err <= 1e-9, "d=" + std::to_string(d) + " M=" + std::to_string(m) + " rel " + num(err));
    if ((d == 1 && m <= 32) || (d == 2 && m <= 12)) t.check(direct.l2_squared == oracle::cube_l2_squared(p, m), "direct path differs from recount");
  }
  return t.outcome("max relative difference " + num(worst));
}

// ---------------------------------------------------------------- 7

Outcome criterion7() {
  Tally t;
  double worst = 0;
  auto run = [&](unsigned d, std::int64_t m) {
    for (std::int64_t r = 1; r <= m / 2 - 1; ++r) {
      for_each_index(d, -m / 2, m / 2 - 1, [&](std::span<const std::int64_t> k) {
        std::complex<long double> acc = 0;
        for_each_index(d, -r + 1, r, [&](std::span<const std::int64_t> v) {
          std::int64_t dot = 0;
          for (unsigned i = 0; i < d; ++i) dot += k[i] * v[i];
          const long double ang = -2.0L * kPiL * static_cast<long double>(((dot % m) + m) % m) / m;
          acc += std::complex<long double>(std::cos(ang), std::sin(ang));
        });
        const auto got = spectral::cube_transform(k, r, m);
        const double err = std::abs(std::complex<double>(acc) - got) / std::max(1.0, static_cast<double>(std::abs(acc)));
        worst = std::max(worst, err);
        t.check(err <= 1e-12, "d=" + std::to_string(d) + " M=" + std::to_string(m) + " r=" + std::to_string(r));
      });
    }
  };
  for (std::int64_t m = 4; m <= 32; m += 2) run(1, m);
  for (std::int64_t m : {8, 16, 32}) run(2, m);
  for (std::int64_t m : {8, 12}) run(3, m);
  return t.outcome("max relative error " + num(worst));
}

// ---------------------------------------------------------------- 8

Outcome criterion8() {
  Tally t;
  for (std::int64_t m : {16, 32, 64, 128}) {
    for (const Fraction eps : {Fraction(1, 8), Fraction(1, 16), Fraction(1, 18)}) {
      const Rational e(eps.num, eps.den);
      for (std::int64_t k = 1; Rational(k) <= e * m; ++k) {
        // r with dist(2kr/M, Z) <= eps, exact.
        std::int64_t count = 0;
        for (std::int64_t r = 0; r < m / 2; ++r) {
          const Rational x = make_rational(2 * k * r % m, m);
          const Rational dist = x <= Rational(1, 2) ? x : Rational(1 - x);
          count += dist <= e;
        }
        const auto lib = spectral::cyclic_small_angle_count(k, m, eps);
        const std::string tag = "M=" + std::to_string(m) + " eps=" + std::to_string(eps.num) + "/" + std::to_string(eps.den) + " k=" + std::to_string(k);
        t.check(lib == count, "count differs from enumeration, " + tag);
        t.check(Rational(count) <= 2 * e * m, "count above 2 eps M, " + tag);
        t.check(spectral::cyclic_small_angle_count(-k, m, eps) == lib, "count not even in k, " + tag);
      }
    }
  }
  return t.outcome("");
}

// ---------------------------------------------------------------- 9

Outcome criterion9() {
  Tally t;
  double worst = 1e300;
  for (unsigned d = 1; d <= 2; ++d) {
    const double eps = 1.0 / (9.0 * d);
    const double eta = (1 - 8 * eps * d) * std::pow(1 - std::cos(2 * kPi * eps), d);
    for (std::int64_t m : {32, 64}) {
      const auto kmax = static_cast<std::int64_t>(std::floor(eps * m));
      for_each_index(d, -kmax, kmax, [&](std::span<const std::int64_t> k) {
        double prod = 1;
        bool zero = true;
        for (auto v : k) {
          prod *= std::max<std::int64_t>(1, std::abs(v));
          zero = zero && v == 0;
        }
        if (zero) return;
        const double bound = 2 * std::pow(4.0, d) * eta / (std::pow(kPi, 2.0 * d) * prod * prod) * std::pow(static_cast<double>(m / 4), 2.0 * d + 1);
        const auto res = torus_cube::proposition7_check(k, m, eps);
        const double direct = spectral::radius_weight_direct(k, m);
        t.check(std::abs(res.bound - bound) <= 1e-12 * bound, "bound formula differs");
        t.check(res.holds && direct >= bound, "d=" + std::to_string(d) + " M=" + std::to_string(m) + " weight " + num(direct) + " < " + num(bound));
        worst = std::min(worst, direct / bound);
      });
    }
  }
  return t.outcome("smallest ratio " + num(worst));
}

// ---------------------------------------------------------------- 10

Outcome criterion10() {
  Tally t;
  std::mt19937_64 rng(1010);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const unsigned d = 2 + trial % 2;
    const double p = 2.0 + static_cast<double>(rng() % 63);  // 2..64
    std::vector<std::int64_t> k(d);
    for (auto& v : k) v = static_cast<std::int64_t>(rng() % 11) - 5;
    const double closed = torus_cube::log_box_weight(k, p, d);
    const double quad = oracle::nested_integral(k, p);
    if (closed == 0.0) {
      t.check(std::abs(quad) < 1e-9, "quadrature nonzero where the closed form vanishes");
      continue;
    }
    const double err = std::abs(quad - closed) / closed;
    worst = std::max(worst, err);
    t.check(err <= 1e-6, "d=" + std::to_string(d) + " p=" + num(p) + " rel " + num(err));
  }
  return t.outcome("max relative error " + num(worst));
}

// ---------------------------------------------------------------- 11

Outcome criterion11() {
  Tally t;
  double worst = 1e300;
  for (unsigned d = 1; d <= 2; ++d) {
    const double eps = 1.0 / (9.0 * d);
    const double eta = (1 - 8 * eps * d) * std::pow(1 - std::cos(2 * kPi * eps), d);
    const double efac = d == 1 ? 1.0 : std::pow(std::exp(1.0) / (d - 1), d - 1.0);
    for (std::size_t n : {2u, 5u, 10u, 20u, 40u, 60u}) {
      const double rhs = std::sqrt(eta / (std::pow(2.0, 3.0 * d + 4) * std::pow(kPi, 2.0 * d)) * efac) *
                         (d == 1 ? 1.0 : std::pow(std::log(2.0 * n), (d - 1) / 2.0));
      for (const auto& s : point_suite(d, n, PointMode::toroidal, 5)) {
        const bool cross = d == 1 || n <= 10;
        const auto rep = torus_cube::theorem2_verify(s.points, std::nullopt, s.name, cross);
        const std::string tag = s.name + " d=" + std::to_string(d) + " N=" + std::to_string(n);
        t.check(rep.input.m == static_cast<std::int64_t>(18 * d * n + (18 * d * n) % 2), "resolution is not 18 d N, " + tag);
        t.check(std::abs(rep.rhs - rhs) <= 1e-12 * rhs, "rhs differs from the formula, " + tag);
        t.check(rep.lhs >= rhs, "lhs " + num(rep.lhs) + " < rhs " + num(rhs) + ", " + tag);
        if (cross) t.check(std::abs(rep.extra["direct_l2"].get<double>() - rep.lhs) <= 1e-9 * rep.lhs, "spectral and direct differ, " + tag);
        worst = std::min(worst, rep.lhs / rhs);
      }
    }
  }
  return t.outcome("smallest margin " + num(worst));
}

// ---------------------------------------------------------------- 12

Outcome criterion12() {
  Tally t;
  double worst = 0;
  std::uint64_t seed = 1200;
  for (unsigned d = 2; d <= 3; ++d) {
    for (std::int64_t m : {16, 32, 64}) {
      for (std::size_t n : {1u, 4u, 10u}) {
        for (double r : {0.1, 0.2}) {
          const auto p = gen_uniform_random(n, d, ++seed, PointMode::toroidal);
          const double err = torus_ball::ball_fourier_identity_check(p, GridSpec::torus(d, m), r);
          worst = std::max(worst, err);
          t.check(err <= 1e-8, "d=" + std::to_string(d) + " M=" + std::to_string(m) + " N=" + std::to_string(n) + " r=" + num(r) + " err " + num(err));
        }
      }
    }
  }
  // Independent evaluation at d = 2, M = 16: naive DFT of the recounted field
  // against sum_n exp(-2 pi i k.z_n/M) hat chi_{-B_r+q_n}(k) with hat chi summed point by point.
  const std::int64_t m = 16;
  const auto g = GridSpec::torus(2, m);
  for (double r : {0.1, 0.2}) {
    const auto p = gen_uniform_random(6, 2, 77, PointMode::toroidal);
    const auto s = snap_nearest(p, g);
    const double vol = kPi * r * r;
    std::vector<std::complex<double>> field(static_cast<std::size_t>(m * m));
    for (std::int64_t a = 0; a < m; ++a)
      for (std::int64_t b = 0; b < m; ++b)
        field[static_cast<std::size_t>(a * m + b)] = static_cast<double>(oracle::ball_count(p, {a, b}, r, m)) - 6 * vol;
    double scale = 1, err = 0;
    std::vector<std::complex<double>> lemma;
    for_each_index(2, 0, m - 1, [&](std::span<const std::int64_t> k) {
      std::complex<double> v = 0;
      for (std::size_t n = 0; n < 6; ++n) {
        const std::int64_t dot = k[0] * s.zc(n, 0) + k[1] * s.zc(n, 1);
        v += spectral::phase(dot, m) * spectral::ball_transform(k, r, m, std::span<const double>(s.q.data() + 2 * n, 2));
      }
      if (k[0] == 0 && k[1] == 0) v -= 6 * vol * m * m;
      lemma.push_back(v);
      scale = std::max(scale, std::abs(v));
    });
    std::size_t f = 0;
    for_each_index(2, 0, m - 1, [&](std::span<const std::int64_t> k) {
      std::complex<double> direct = 0;
      for (std::int64_t a = 0; a < m; ++a)
        for (std::int64_t b = 0; b < m; ++b)
          direct += field[static_cast<std::size_t>(a * m + b)] * spectral::phase(k[0] * a + k[1] * b, m);
      err = std::max(err, std::abs(direct - lemma[f++]));
    });
    t.check(err / scale <= 1e-8, "independent evaluation at r=" + num(r) + " err " + num(err / scale));
    worst = std::max(worst, err / scale);
  }
  return t.outcome("max relative error " + num(worst));
}

// ---------------------------------------------------------------- 13

Outcome criterion13() {
  Tally t;
  std::mt19937_64 rng(1313);
  std::uniform_real_distribution<double> uq(-0.5 / 64, 0.5 / 64);
  const std::int64_t m = 64;
  const double r = 0.2;
  double tightest = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::int64_t> k(2);
    do {
      for (auto& v : k) v = static_cast<std::int64_t>(rng() % 64) - 32;
    } while (k[0] == 0 && k[1] == 0);
    const std::vector<double> q{uq(rng), uq(rng)};
    const auto res = spectral::ball_decomposition_check(k, r, m, q);
    // Region |E| recomputed: area of the radius rM + sqrt 2 disc minus the lattice points of M(-B_r + q).
    long count = 0;
    for (std::int64_t a = -m; a <= m; ++a)
      for (std::int64_t b = -m; b <= m; ++b) {
        const double x = static_cast<double>(a) / m - q[0], y = static_cast<double>(b) / m - q[1];
        count += x * x + y * y < r * r;
      }
    const double rho = r * m + std::sqrt(2.0);
    const double region = kPi * rho * rho - static_cast<double>(count);
    t.check(std::abs(region - res.region) <= 1e-9 * region, "region differs from recount");
    t.check(std::abs(res.remainder) <= region, "|remainder| " + num(std::abs(res.remainder)) + " > |E| " + num(region));
    tightest = std::max(tightest, std::abs(res.remainder) / region);
  }
  // Bessel evaluator against closed forms (odd d) and the standard library (even d).
  double berr = 0;
  for (double x = 0.05; x < 120; x *= 1.07) {
    const double s = std::sin(x), c = std::cos(x), pre = std::sqrt(2 / (kPi * x));
    const double closed[] = {pre * s, pre * (s / x - c), pre * ((3 / (x * x) - 1) * s - 3 * c / x)};
    for (unsigned i = 0; i < 3; ++i) {
      const double e = std::abs(bessel::j_half_order(2 * i + 1, x) - closed[i]);
      berr = std::max(berr, e);
      t.check(e <= 1e-9, "J_" + std::to_string(2 * i + 1) + "/2(" + num(x) + ") off by " + num(e));
    }
    for (unsigned d : {2u, 4u, 6u}) {
      const double ref = static_cast<double>(std::cyl_bessel_j(static_cast<long double>(d / 2), static_cast<long double>(x)));
      const double e = std::abs(bessel::j_half_order(d, x) - ref);
      berr = std::max(berr, e);
      t.check(e <= 1e-9, "J_" + std::to_string(d / 2) + "(" + num(x) + ") off by " + num(e));
    }
  }
  return t.outcome("largest |remainder|/|E| " + num(tightest) + ", Bessel max error " + num(berr));
}

// ---------------------------------------------------------------- 14

Outcome criterion14() {
  Tally t;
  double lowest = 1e300;
  for (unsigned d : {2u, 3u, 4u})
    for (double r : {0.1, 0.15, 0.2})
      for (std::int64_t m : {64, 128, 256}) {
        const auto res = torus_ball::cosine_floor_scan(d, r, m);
        t.check(res.scanned > 0 && res.floor > 0.0, "d=" + std::to_string(d) + " r=" + num(r) + " M=" + std::to_string(m));
        lowest = std::min(lowest, res.floor);
      }
  for (unsigned d : {1u, 5u}) {
    bool refused = false;
    try {
      torus_ball::cosine_floor_scan(d, 0.1, 128);
    } catch (const Error& e) {
      refused = e.code() == ErrorCode::hypothesis;
    }
    t.check(refused, "d=" + std::to_string(d) + " not refused");
  }
  return t.outcome("lowest floor " + num(lowest));
}

// ---------------------------------------------------------------- 15

Outcome criterion15() {
  Tally t;
  const double r = 0.2;
  const double c = torus_ball::kCalibratedConstant;
  std::vector<double> xs, ys;
  double worst = 1e300;
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    const double floor_m = 8.0 * std::pow(static_cast<double>(n), 1.25) / r;
    auto m = static_cast<std::int64_t>(std::ceil(floor_m));
    if (m % 2) ++m;
    const double rhs = c * r * std::pow(static_cast<double>(n), 0.25);
    double mean = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto p = gen_uniform_random(n, 2, seed, PointMode::toroidal);
      const auto rep = torus_ball::theorem3_verify(p, r);
      t.check(rep.input.m == m, "resolution differs from even-ceil(8 N^(5/4)/r)");
      t.check(std::abs(rep.rhs - rhs) <= 1e-12 * rhs, "rhs differs from the formula");
      t.check(rep.lhs >= rhs, "N=" + std::to_string(n) + " seed=" + std::to_string(seed) + " lhs " + num(rep.lhs) + " < " + num(rhs));
      worst = std::min(worst, rep.lhs / rhs);
      mean += rep.lhs / 20;
    }
    xs.push_back(static_cast<double>(n));
    ys.push_back(mean);
  }
  const double slope = torus_ball::loglog_slope(xs, ys);
  t.check(slope >= 0.10 && slope <= 0.40, "fitted slope " + num(slope) + " outside [0.10, 0.40]");
  return t.outcome("smallest margin " + num(worst) + ", fitted slope " + num(slope) + " (target 0.25)");
}

// ---------------------------------------------------------------- 16

// Continuous L2^2 of the corner discrepancy by the pairwise formula, in long double.
double warnock(const PointSet& p) {
  const unsigned d = p.dim();
  const std::size_t n = p.size();
  long double pairs = 0, single = 0;
  for (std::size_t a = 0; a < n; ++a) {
    long double s = 1;
    for (unsigned i = 0; i < d; ++i) s *= (1.0L - p.value(a, i) * p.value(a, i)) / 2;
    single += s;
    for (std::size_t b = 0; b < n; ++b) {
      long double v = 1;
      for (unsigned i = 0; i < d; ++i) v *= 1.0L - std::max(p.value(a, i), p.value(b, i));
      pairs += v;
    }
  }
  return static_cast<double>(pairs - 2.0L * n * single + static_cast<long double>(n) * n * std::pow(3.0L, -static_cast<long double>(d)));
}

Outcome criterion16() {
  Tally t;
  double final_gap = 0;
  for (unsigned d = 1; d <= 3; ++d) {
    for (std::int64_t k : {2, 4, 8}) {
      const auto p = gen_lattice(k, d);
      const std::string tag = "K=" + std::to_string(k) + " d=" + std::to_string(d);
      t.check(corner::grid_l2_squared(p, GridSpec::corner_resolution(d, k)) == 0, "lattice l2 nonzero at M=K, " + tag);
      const double cont = std::sqrt(warnock(p));
      t.check(std::abs(cont - corner::continuous_l2_oracle(p)) <= 1e-12 * cont, "continuous oracle differs from recomputation, " + tag);
      double prev = 1e300;
      for (int s = 0; s <= 6; ++s) {
        const std::int64_t m = k << s;
        const double grid = std::sqrt(static_cast<double>(to_long_double(corner::grid_l2_squared(p, GridSpec::corner_resolution(d, m)))));
        const double gap = std::abs(grid - cont);
        t.check(gap < prev, "gap not decreasing at M=" + std::to_string(m) + ", " + tag);
        prev = gap;
        if (s == 6) {
          t.check(gap <= 0.02 * cont, "final gap " + num(gap / cont) + " above 2%, " + tag);
          final_gap = std::max(final_gap, gap / cont);
        }
      }
    }
  }
  return t.outcome("largest final relative gap " + num(final_gap));
}

// ---------------------------------------------------------------- 17

Outcome criterion17() {
  Tally t;
  double worst = 1e300;
  for (std::size_t n : {2u, 5u, 10u, 20u, 40u}) {
    const std::int64_t m = torus_cube::theorem2_resolution(2, n);
    const auto p2 = static_cast<std::int64_t>(2 * n);
    t.check(static_cast<double>(p2) <= m / 18.0, "p = 2N exceeds eps M");
    const auto g = GridSpec::torus(2, m);
    for (const auto& s : point_suite(2, n, PointMode::toroidal, 5)) {
      const auto snapped = snap_corner(s.points, g);
      const auto table = spectral::exp_sums(snapped);
      const auto fam = torus_cube::cassels_montgomery_family(table, p2);
      const std::string tag = s.name + " N=" + std::to_string(n);
      t.check(fam.holds, "sum " + num(fam.sum) + " < pN - N^2 = " + num(fam.bound) + ", " + tag);
      worst = std::min(worst, fam.sum - fam.bound);
      // One box recomputed from raw exponential sums: x = 1, so R = [-1,1] x [-p, p].
      if (n <= 10) {
        long double sum = 0;
        for (std::int64_t a = -1; a <= 1; ++a)
          for (std::int64_t b = -p2; b <= p2; ++b) {
            if (a == 0 && b == 0) continue;
            std::complex<long double> w = 0;
            for (std::size_t k = 0; k < n; ++k) {
              const long double ang = -2.0L * kPiL * static_cast<long double>(a * snapped.zc(k, 0) + b * snapped.zc(k, 1)) / m;
              w += std::complex<long double>(std::cos(ang), std::sin(ang));
            }
            sum += std::norm(w);
          }
        const std::vector<double> x{1.0};
        const auto one = torus_cube::cassels_montgomery_check(table, p2, x);
        t.check(std::abs(one.sum - static_cast<double>(sum)) <= 1e-9 * std::max(1.0, one.sum), "box sum differs from recomputation, " + tag);
        t.check(static_cast<double>(sum) >= static_cast<double>(p2 * n) - static_cast<double>(n * n), "recomputed box violates the bound, " + tag);
      }
    }
  }
  return t.outcome("smallest slack " + num(worst));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  unsigned threads = 0;
  app.add_option("--criterion", only, "Run one criterion (1-17)")->check(CLI::Range(1, 17));
  app.add_option("--threads", threads, "Worker cap");
  CLI11_PARSE(app, argc, argv);
  thread_limit() = threads;

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Haar coefficient identity on empty boxes", criterion1},
      {"1-d weighted Haar sum", criterion2},
      {"test-function chain", criterion3},
      {"corner l2 bound", criterion4},
      {"corner linf bound, d=2", criterion5},
      {"cube Plancherel identity", criterion6},
      {"closed-form cube transform", criterion7},
      {"small-angle group counts", criterion8},
      {"radius-weight lower bound", criterion9},
      {"log box weight vs quadrature", criterion10},
      {"cube ensemble l2 bound", criterion11},
      {"ball Fourier formula", criterion12},
      {"ball decomposition and Bessel", criterion13},
      {"cosine separation floor", criterion14},
      {"ball bound and scaling", criterion15},
      {"zero-discrepancy controls", criterion16},
      {"Cassels-Montgomery property", criterion17},
  };
  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i + 1) != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2zu %s  %s (%.1fs): %s\n", i + 1, out.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), secs, out.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
