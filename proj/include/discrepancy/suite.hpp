#pragma once

// The named point-set suite shared by the verifiers, the CLI sweeps and the
// acceptance runs: random sets over a seed range plus the structured
// generators that exist for the requested (d, N).

#include <cmath>
#include <string>
#include <vector>

#include "discrepancy/geometry.hpp"

namespace discrepancy {

struct NamedSet {
  std::string name;
  PointSet points;
  std::optional<std::uint64_t> seed;
};

/// Largest K with K^d <= n, or 0 when n is not a perfect d-th power.
inline std::int64_t exact_root(std::size_t n, unsigned d) {
  auto k = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / d)));
  for (std::int64_t c = std::max<std::int64_t>(1, k - 1); c <= k + 1; ++c) {
    std::uint64_t p = 1;
    for (unsigned i = 0; i < d; ++i) p *= static_cast<std::uint64_t>(c);
    if (p == n) return c;
  }
  return 0;
}

/// (i/N, phi_2(i), phi_3(i)) for i < N.
inline PointSet gen_hammersley3(std::size_t n, PointMode mode = PointMode::corner) {
  require(n >= 1, ErrorCode::invalid_argument, "N must be positive");
  std::vector<Coordinate> coords;
  coords.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    coords.push_back(Coordinate::from_fraction(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n)));
    coords.push_back(radical_inverse(2, i));
    coords.push_back(radical_inverse(3, i));
  }
  return PointSet(3, mode, std::move(coords));
}

/// Random sets for seeds first_seed .. first_seed + seeds - 1, then the
/// structured sets of size exactly n available in dimension d.
inline std::vector<NamedSet> point_suite(unsigned d, std::size_t n, PointMode mode, unsigned seeds = 5,
                                         std::uint64_t first_seed = 1) {
  require(d >= 1 && n >= 1, ErrorCode::invalid_argument, "suite needs d >= 1 and N >= 1");
  std::vector<NamedSet> out;
  for (unsigned s = 0; s < seeds; ++s) {
    const std::uint64_t seed = first_seed + s;
    out.push_back({"random", gen_uniform_random(n, d, seed, mode), seed});
  }
  if (const auto k = exact_root(n, d); k > 0) out.push_back({"lattice", gen_lattice(k, d, mode), std::nullopt});
  if (d == 1) {
    out.push_back({"vdc2", gen_van_der_corput(2, n, mode), std::nullopt});
    out.push_back({"vdc3", gen_van_der_corput(3, n, mode), std::nullopt});
  } else if (d == 2) {
    out.push_back({"hammersley2", gen_hammersley(2, n, mode), std::nullopt});
    out.push_back({"hammersley3", gen_hammersley(3, n, mode), std::nullopt});
  } else if (d == 3) {
    out.push_back({"hammersley23", gen_hammersley3(n, mode), std::nullopt});
  }
  return out;
}

}  // namespace discrepancy
