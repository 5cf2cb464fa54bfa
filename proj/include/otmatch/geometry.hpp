#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "otmatch/error.hpp"

namespace otm {

/// Observation on a camera plane; semantically the projective element
/// (u, v, 1) with the third homogeneous component fixed to one.
struct ImagePoint {
  double u = 0.0;
  double v = 0.0;

  Eigen::Vector3d homogeneous() const { return {u, v, 1.0}; }
};

using WorldPoint = Eigen::Vector3d;

/// Upper-triangular 3x3 camera intrinsics with strictly positive diagonal.
class IntrinsicMatrix {
 public:
  static IntrinsicMatrix from(const Eigen::Matrix3d& entries);
  static IntrinsicMatrix identity() { return IntrinsicMatrix(Eigen::Matrix3d::Identity()); }

  const Eigen::Matrix3d& entries() const { return entries_; }
  Eigen::Matrix3d inverse() const;

 private:
  explicit IntrinsicMatrix(const Eigen::Matrix3d& entries) : entries_(entries) {}
  Eigen::Matrix3d entries_;
};

/// Relative orientation (R in SO(3)) and position (t != 0) of the right
/// camera with respect to the left.
class RelativePose {
 public:
  static RelativePose from(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

 private:
  RelativePose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) : rotation_(r), translation_(t) {}
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

struct StereoRig {
  IntrinsicMatrix k_left;
  IntrinsicMatrix k_right;
  RelativePose pose;
};

enum class Side { Left, Right };

struct Projection {
  ImagePoint point;
  double depth = 0.0;
};

struct Ray3 {
  Eigen::Vector3d direction;
  Eigen::Vector3d origin;
};

/// Endpoints of the shortest segment between two non-parallel 3D lines,
/// the two auxiliary normals, and the depth of the segment midpoint.
struct ClosestPointSolution {
  WorldPoint b_left;
  WorldPoint b_right;
  Eigen::Vector3d n_left;
  Eigen::Vector3d n_right;
  double midpoint_depth = 0.0;
};

/// Quadratic hinge on the closest-approach midpoint depth: zero inside
/// [gamma_low, gamma_high], beta * (b - gamma)^2 outside.
struct DepthRegParams {
  double beta = 0.0;
  double gamma_low = 0.0;
  double gamma_high = 0.0;

  static DepthRegParams from(double beta, double gamma_low, double gamma_high);
  double penalty(double depth) const;
};

struct FundamentalMatrix {
  Eigen::Matrix3d entries;
  Eigen::Matrix3d skew_t;
};

enum class DistanceKind { Epipolar, Ray, RegularizedRay };

struct DistanceSpec {
  DistanceKind kind = DistanceKind::Ray;
  std::optional<DepthRegParams> reg;

  static DistanceSpec epipolar() { return {DistanceKind::Epipolar, std::nullopt}; }
  static DistanceSpec ray() { return {DistanceKind::Ray, std::nullopt}; }
  static DistanceSpec regularized(const DepthRegParams& p) { return {DistanceKind::RegularizedRay, p}; }
  void validate() const;
};

// Thresholds for the degenerate branches.  Both are relative, so they are
// insensitive to the overall scale of the rig.
inline constexpr double kParallelEps = 1e-12;
inline constexpr double kDegenerateEpipolarEps = 1e-12;

Projection project(const StereoRig& rig, const WorldPoint& w, Side side);

/// Collapses a two-camera model with per-camera extrinsics into the
/// canonical rig where the left camera sits at the origin.
StereoRig reduce_general_rig(const IntrinsicMatrix& k_left, const IntrinsicMatrix& k_right,
                             const Eigen::Matrix3d& r_left, const Eigen::Matrix3d& r_right,
                             const Eigen::Vector3d& t_left, const Eigen::Vector3d& t_right);

std::pair<Ray3, Ray3> back_rays(const StereoRig& rig, const ImagePoint& x, const ImagePoint& y);

ClosestPointSolution closest_points(const Ray3& left, const Ray3& right);

bool is_in_front(const StereoRig& rig, const WorldPoint& w);

double ray_distance(const StereoRig& rig, const ImagePoint& x, const ImagePoint& y);

double regularized_ray_distance(const StereoRig& rig, const ImagePoint& x, const ImagePoint& y,
                                const DepthRegParams& params);

FundamentalMatrix fundamental_matrix(const StereoRig& rig);

double epipolar_distance(const FundamentalMatrix& f, const ImagePoint& x, const ImagePoint& y);

ImagePoint epipole(const StereoRig& rig, Side side);

/// True iff y sits on the epipolar half-line of x: small constraint residual
/// and positive alignment of the two baseline cross products.
bool epipolar_ray_contains(const StereoRig& rig, const FundamentalMatrix& f, const ImagePoint& x,
                           const ImagePoint& y, double tol);

struct Triangulation {
  WorldPoint point;
  bool in_front = false;
};

/// Midpoint of the shortest segment between the two viewing rays.  Points
/// behind a camera are still returned, flagged via in_front.
Triangulation triangulate(const StereoRig& rig, const ImagePoint& x, const ImagePoint& y);

/// Scalar cost for the selected distance.  For the epipolar kind the
/// fundamental matrix must be precomputed by the caller (pairwise_cost does
/// this once per matrix).
double point_distance(const StereoRig& rig, const DistanceSpec& spec,
                      const FundamentalMatrix* f, const ImagePoint& x, const ImagePoint& y);

}  // namespace otm
