#pragma once

// Exact-identity suites run by the `identity` command: Haar coefficients on
// empty boxes, the cube Plancherel identity and the ball Fourier formula.

#include <string>

#include "discrepancy/corner.hpp"
#include "discrepancy/torus_ball.hpp"
#include "discrepancy/torus_cube.hpp"

namespace discrepancy::identity {

struct SuiteResult {
  std::string suite;
  std::uint64_t checked = 0;
  std::uint64_t failures = 0;
  double max_error = 0.0;  // relative, for the floating suites

  bool ok() const { return failures == 0; }
};

/// <D_N, h_R> = -N / b^(2d + 2 nu) for every box R of every D_r^d, r in H_nu^d, that holds no point.
inline SuiteResult haar_empty_boxes(const PointSet& p, std::uint64_t b, unsigned tau) {
  const unsigned d = p.dim();
  const unsigned nu = corner::derive_nu(p.size(), b);
  const GridSpec g = GridSpec::corner(d, b, nu + tau);
  const Rational expected = make_rational(-to_integer(static_cast<std::uint64_t>(p.size())), integer_pow(b, 2 * d + 2 * nu));
  SuiteResult out{"haar"};
  for (const auto& r : haar::haar_index_set(nu, d)) {
    haar::BoxFamily fam(b, r);
    std::vector<bool> empty(fam.size(), true);
    std::vector<std::uint64_t> a(d);
    for (std::size_t n = 0; n < p.size(); ++n) {
      bool inside = true;
      for (unsigned i = 0; i < d && inside; ++i) {
        const auto off = haar::containing_offset(p.coord(n, i), b, r[i]);
        inside = off.has_value();
        if (inside) a[i] = *off;
      }
      if (inside) empty[fam.index_of(a)] = false;
    }
    for (std::uint64_t idx = 0; idx < fam.size(); ++idx) {
      if (!empty[idx]) continue;
      ++out.checked;
      if (corner::haar_coefficient(p, fam.at(idx), g) != expected) ++out.failures;
    }
  }
  return out;
}

/// Direct against spectral cube l2 on J_M^d x S_M.
inline SuiteResult cube_plancherel(const PointSet& p, std::int64_t m, double tol = 1e-9) {
  const GridSpec g = GridSpec::torus(p.dim(), m);
  const double direct = static_cast<double>(to_long_double(torus_cube::ensemble_l2_direct(p, g).l2_squared));
  const double spectral = torus_cube::spectral_l2_squared(
      spectral::exp_sums(snap_corner(p.mode() == PointMode::toroidal ? p : p.with_mode(PointMode::toroidal), g)));
  SuiteResult out{"plancherel", 1};
  out.max_error = std::abs(direct - spectral) / std::max(std::abs(direct), 1e-300);
  out.failures = out.max_error <= tol ? 0 : 1;
  return out;
}

/// DFT of the direct ball field against the per-point formula.
inline SuiteResult ball_lemma(const PointSet& p, std::int64_t m, double r, double tol = 1e-8) {
  SuiteResult out{"ball", 1};
  out.max_error = torus_ball::ball_fourier_identity_check(p, GridSpec::torus(p.dim(), m), r);
  out.failures = out.max_error <= tol ? 0 : 1;
  return out;
}

}  // namespace discrepancy::identity
