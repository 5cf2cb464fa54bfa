#pragma once

// Test-only reference implementations.  These stay independent of the
// library's solver and geometry code paths: assignments are enumerated by
// brute force and closest points come from a QR least-squares solve.

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "otmatch/geometry.hpp"
#include "otmatch/rng.hpp"
#include "otmatch/transport.hpp"

namespace oracle {

/// Minimum of sum_i C[i, sigma(i)] over all permutations (N = M).
inline double min_permutation_cost(const otm::CostMatrix& cost) {
  const int n = cost.rows();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost.at(i, perm[i]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Minimum of sum_i C[i, pi(i)] over all injections of the smaller side
/// into the larger one.  Works on either orientation of the matrix.
inline double min_injection_cost(const otm::CostMatrix& cost) {
  const bool transposed = cost.rows() > cost.cols();
  const int small = transposed ? cost.cols() : cost.rows();
  const int large = transposed ? cost.rows() : cost.cols();
  const auto value = [&](int s, int l) { return transposed ? cost.at(l, s) : cost.at(s, l); };

  std::vector<int> chosen(large);
  std::iota(chosen.begin(), chosen.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  // Enumerate ordered selections: permute all large indices and read the
  // first `small` as the injection image (dedup via sorted-suffix skip).
  std::vector<int> pick(small);
  const std::function<void(int, std::vector<int>&)> recurse = [&](int depth,
                                                                  std::vector<int>& used) {
    if (depth == small) {
      double total = 0.0;
      for (int s = 0; s < small; ++s) total += value(s, pick[s]);
      best = std::min(best, total);
      return;
    }
    for (int l = 0; l < large; ++l) {
      if (std::find(used.begin(), used.end(), l) != used.end()) continue;
      used.push_back(l);
      pick[depth] = l;
      recurse(depth + 1, used);
      used.pop_back();
    }
  };
  std::vector<int> used;
  recurse(0, used);
  return best;
}

/// Closest points of two lines via least squares on the 3x2 system
/// [r_x, -r_y] [a b]^T ~ s_y - s_x; an independent route from the
/// implementation's explicit 2x2 solve.
struct ClosestPair {
  Eigen::Vector3d on_left;
  Eigen::Vector3d on_right;
};

inline ClosestPair closest_points_qr(const otm::Ray3& left, const otm::Ray3& right) {
  Eigen::Matrix<double, 3, 2> a;
  a.col(0) = left.direction;
  a.col(1) = -right.direction;
  const Eigen::Vector2d params = a.colPivHouseholderQr().solve(right.origin - left.origin);
  return {left.origin + params[0] * left.direction, right.origin + params[1] * right.direction};
}

/// Random proper rotation from a normalized quaternion.
inline Eigen::Matrix3d random_rotation(otm::RngStream& rng) {
  for (;;) {
    const auto [a, b] = rng.normal_pair();
    const auto [c, d] = rng.normal_pair();
    Eigen::Quaterniond q(a, b, c, d);
    if (q.norm() < 1e-9) continue;
    q.normalize();
    return q.toRotationMatrix();
  }
}

/// Random intrinsics: positive diagonal, small upper-triangular skew.
inline otm::IntrinsicMatrix random_intrinsics(otm::RngStream& rng) {
  Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
  k(0, 0) = rng.uniform(0.5, 2.0);
  k(1, 1) = rng.uniform(0.5, 2.0);
  k(2, 2) = 1.0;
  k(0, 1) = rng.uniform(-0.1, 0.1);
  k(0, 2) = rng.uniform(-0.2, 0.2);
  k(1, 2) = rng.uniform(-0.2, 0.2);
  return otm::IntrinsicMatrix::from(k);
}

/// Random rig with a unit-scale baseline and a mild relative rotation, so
/// that a useful share of random world points is visible to both cameras.
inline otm::StereoRig random_rig(otm::RngStream& rng) {
  const double angle = rng.uniform(-0.3, 0.3);
  const Eigen::Vector3d axis = rng.unit_vector();
  const Eigen::Matrix3d r = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  Eigen::Vector3d t(rng.uniform(-1.5, -0.5), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2));
  return {random_intrinsics(rng), random_intrinsics(rng), otm::RelativePose::from(r, t)};
}

/// Random world point in front of both cameras (rejection sampled).
inline otm::WorldPoint random_front_point(otm::RngStream& rng, const otm::StereoRig& rig) {
  for (;;) {
    const otm::WorldPoint w(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(1.0, 6.0));
    if (otm::is_in_front(rig, w)) return w;
  }
}

inline otm::CostMatrix random_cost_matrix(otm::RngStream& rng, int rows, int cols, double lo = 0.0,
                                          double hi = 1.0) {
  std::vector<double> values(static_cast<std::size_t>(rows) * cols);
  for (double& v : values) v = rng.uniform(lo, hi);
  return otm::CostMatrix::from(rows, cols, std::move(values));
}

inline otm::CostMatrix random_integer_cost_matrix(otm::RngStream& rng, int rows, int cols,
                                                  int max_value) {
  std::vector<double> values(static_cast<std::size_t>(rows) * cols);
  for (double& v : values)
    v = static_cast<double>(rng.next_u64() % static_cast<std::uint64_t>(max_value + 1));
  return otm::CostMatrix::from(rows, cols, std::move(values));
}

}  // namespace oracle
