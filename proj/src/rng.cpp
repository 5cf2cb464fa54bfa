#include "otmatch/rng.hpp"

#include <cmath>
#include <numbers>

namespace otm {

std::pair<double, double> RngStream::normal_pair() noexcept {
  // 1 - u keeps the argument of log strictly positive.
  const double u1 = 1.0 - next_unit();
  const double u2 = next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

Eigen::Vector3d RngStream::unit_vector() noexcept {
  for (;;) {
    const auto [z0, z1] = normal_pair();
    const auto [z2, z3] = normal_pair();
    (void)z3;
    Eigen::Vector3d v(z0, z1, z2);
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

}  // namespace otm
