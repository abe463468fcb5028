// One-off calibration of the constant c in the two-radius ball bound:
// c = min over the d = 2, r = 0.2, N <= 32 suite of lhs / (r^(d/2) N^(1/2 - 1/(2d))), halved.

#include <cstdio>

#include "discrepancy/suite.hpp"
#include "discrepancy/torus_ball.hpp"

using namespace discrepancy;

int main() {
  const unsigned d = 2;
  const double r = 0.2;
  double best = 1e300;
  std::string where;
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    const auto m = torus_ball::theorem3_resolution(d, n, r);
    const auto g = GridSpec::torus(d, m);
    for (const auto& s : point_suite(d, n, PointMode::toroidal, 20)) {
      const double lhs = torus_ball::two_radius_l2(s.points, g, r);
      const double ratio = lhs / (std::pow(r, d / 2.0) * std::pow(static_cast<double>(n), 0.5 - 0.5 / d));
      std::printf("N=%zu M=%lld %s seed=%llu lhs=%.6f ratio=%.6f\n", n, static_cast<long long>(m), s.name.c_str(),
                  static_cast<unsigned long long>(s.seed.value_or(0)), lhs, ratio);
      if (ratio < best) {
        best = ratio;
        where = s.name + " N=" + std::to_string(n);
      }
    }
  }
  std::printf("min ratio %.6f at %s; c = %.6f\n", best, where.c_str(), best / 2);
}
