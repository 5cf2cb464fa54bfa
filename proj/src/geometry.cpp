#include "otmatch/geometry.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace otm {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& t) {
  Eigen::Matrix3d s;
  s << 0.0, -t.z(), t.y(), t.z(), 0.0, -t.x(), -t.y(), t.x(), 0.0;
  return s;
}

bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-9) {
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

}  // namespace

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::CalibrationError: return "CalibrationError";
    case Errc::BehindCamera: return "BehindCamera";
    case Errc::ParallelRays: return "ParallelRays";
    case Errc::DegenerateRig: return "DegenerateRig";
    case Errc::DegenerateEpipole: return "DegenerateEpipole";
    case Errc::InfeasibleMarginals: return "InfeasibleMarginals";
    case Errc::InfeasibleMass: return "InfeasibleMass";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyCloud: return "EmptyCloud";
    case Errc::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

IntrinsicMatrix IntrinsicMatrix::from(const Eigen::Matrix3d& entries) {
  for (int i = 1; i < 3; ++i)
    for (int j = 0; j < i; ++j)
      if (entries(i, j) != 0.0)
        raise(Errc::ValidationError, "intrinsic matrix must be upper triangular");
  for (int i = 0; i < 3; ++i)
    if (!(entries(i, i) > 0.0))
      raise(Errc::ValidationError, "intrinsic matrix needs a strictly positive diagonal");
  if (!entries.allFinite()) raise(Errc::ValidationError, "intrinsic matrix has non-finite entries");
  return IntrinsicMatrix(entries);
}

Eigen::Matrix3d IntrinsicMatrix::inverse() const {
  // Upper triangular with positive diagonal, so plain inversion is stable.
  return entries_.inverse();
}

RelativePose RelativePose::from(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation) {
  if (!rotation.allFinite() || !translation.allFinite())
    raise(Errc::ValidationError, "pose has non-finite entries");
  if (!is_rotation(rotation))
    raise(Errc::ValidationError, "rotation must be special orthogonal within 1e-9");
  if (translation.norm() == 0.0)
    raise(Errc::DegenerateRig, "translation must be nonzero (coincident focal points)");
  return RelativePose(rotation, translation);
}

DepthRegParams DepthRegParams::from(double beta, double gamma_low, double gamma_high) {
  if (!(beta >= 0.0)) raise(Errc::ValidationError, "beta must be >= 0");
  if (!(gamma_low < gamma_high)) raise(Errc::ValidationError, "gamma1 must be < gamma2");
  return {beta, gamma_low, gamma_high};
}

double DepthRegParams::penalty(double depth) const {
  if (depth < gamma_low) {
    const double d = depth - gamma_low;
    return beta * d * d;
  }
  if (depth > gamma_high) {
    const double d = depth - gamma_high;
    return beta * d * d;
  }
  return 0.0;
}

void DistanceSpec::validate() const {
  if ((kind == DistanceKind::RegularizedRay) != reg.has_value())
    raise(Errc::ValidationError,
          "regularization parameters are required exactly for the regularized ray distance");
}

Projection project(const StereoRig& rig, const WorldPoint& w, Side side) {
  Eigen::Vector3d h;
  if (side == Side::Left) {
    h = rig.k_left.entries() * w;
  } else {
    h = rig.k_right.entries() * (rig.pose.rotation() * w + rig.pose.translation());
  }
  const double depth = h.z();
  if (!(depth > 0.0)) raise(Errc::BehindCamera, "point projects with non-positive depth");
  return {{h.x() / depth, h.y() / depth}, depth};
}

StereoRig reduce_general_rig(const IntrinsicMatrix& k_left, const IntrinsicMatrix& k_right,
                             const Eigen::Matrix3d& r_left, const Eigen::Matrix3d& r_right,
                             const Eigen::Vector3d& t_left, const Eigen::Vector3d& t_right) {
  if (!is_rotation(r_left) || !is_rotation(r_right))
    raise(Errc::ValidationError, "camera rotations must be special orthogonal");
  const Eigen::Matrix3d r = r_right * r_left.transpose();
  const Eigen::Vector3d t = t_right - r * t_left;
  if (t.norm() == 0.0)
    raise(Errc::DegenerateRig, "reduced translation is zero (coincident focal points)");
  return {k_left, k_right, RelativePose::from(r, t)};
}

std::pair<Ray3, Ray3> back_rays(const StereoRig& rig, const ImagePoint& x, const ImagePoint& y) {
  const Eigen::Matrix3d rt = rig.pose.rotation().transpose();
  Ray3 left{rig.k_left.inverse() * x.homogeneous(), Eigen::Vector3d::Zero()};
  Ray3 right{rt * (rig.k_right.inverse() * y.homogeneous()), -rt * rig.pose.translation()};
  return {left, right};
}

ClosestPointSolution closest_points(const Ray3& left, const Ray3& right) {
  const Eigen::Vector3d& rx = left.direction;
  const Eigen::Vector3d& ry = right.direction;
  const Eigen::Vector3d cross = rx.cross(ry);
  if (cross.norm() <= kParallelEps * rx.norm() * ry.norm())
    raise(Errc::ParallelRays, "rays are parallel; closest points are not unique");

  // Minimize ||(s_x + a r_x) - (s_y + b r_y)||^2 over (a, b).
  const Eigen::Vector3d w0 = left.origin - right.origin;
  const double a = rx.dot(rx);
  const double b = rx.dot(ry);
  const double c = ry.dot(ry);
  const double d = rx.dot(w0);
  const double e = ry.dot(w0);
  const double det = a * c - b * b;
  const double lambda_x = (b * e - c * d) / det;
  const double lambda_y = (a * e - b * d) / det;

  ClosestPointSolution sol;
  sol.b_left = left.origin + lambda_x * rx;
  sol.b_right = right.origin + lambda_y * ry;
  sol.n_left = rx.cross(cross);
  sol.n_right = ry.cross(cross);
  sol.midpoint_depth = 0.5 * (sol.b_left.z() + sol.b_right.z());
  return sol;
}

bool is_in_front(const StereoRig& rig, const WorldPoint& w) {
  const double left_depth = w.z();
  const double right_depth = (rig.pose.rotation() * w + rig.pose.translation()).z();
  return left_depth > 0.0 && right_depth > 0.0;
}

namespace {

struct RayDistanceParts {
  double distance = 0.0;
  bool has_midpoint = false;  // rays non-parallel, so closest points exist
  double midpoint_depth = 0.0;
};

RayDistanceParts ray_distance_parts(const StereoRig& rig, const ImagePoint& x, const ImagePoint& y) {
  const auto [left, right] = back_rays(rig, x, y);
  const Eigen::Vector3d rt_t = -right.origin;  // R^T t
  const Eigen::Vector3d cross = left.direction.cross(right.direction);

  RayDistanceParts parts;
  if (cross.norm() <= kParallelEps * left.direction.norm() * right.direction.norm()) {
    parts.distance = left.direction.cross(rt_t).norm() / left.direction.norm();
    return parts;
  }

  const ClosestPointSolution sol = closest_points(left, right);
  parts.has_midpoint = true;
  parts.midpoint_depth = sol.midpoint_depth;
  if (is_in_front(rig, sol.b_left) && is_in_front(rig, sol.b_right)) {
    parts.distance = std::abs(cross.dot(rt_t)) / cross.norm();
  } else {
    // Closest approach is invisible to at least one camera; fall back to
    // the focal-point separation.
    parts.distance = rig.pose.translation().norm();
  }
  return parts;
}

}  // namespace

double ray_distance(const StereoRig& rig, const ImagePoint& x, const ImagePoint& y) {
  return ray_distance_parts(rig, x, y).distance;
}

double regularized_ray_distance(const StereoRig& rig, const ImagePoint& x, const ImagePoint& y,
                                const DepthRegParams& params) {
  const RayDistanceParts parts = ray_distance_parts(rig, x, y);
  if (!parts.has_midpoint) return parts.distance;  // midpoint undefined for parallel rays
  return parts.distance + params.penalty(parts.midpoint_depth);
}

FundamentalMatrix fundamental_matrix(const StereoRig& rig) {
  const Eigen::Matrix3d t_cross = skew(rig.pose.translation());
  const Eigen::Matrix3d f = rig.k_right.inverse().transpose() * t_cross * rig.pose.rotation() *
                            rig.k_left.inverse();
  return {f, t_cross};
}

namespace {

double epipolar_line_distance(const Eigen::Vector3d& line, const Eigen::Vector3d& point) {
  const double plane_norm = std::hypot(line.x(), line.y());
  if (plane_norm <= kDegenerateEpipolarEps * line.norm()) return std::abs(line.z());
  return std::abs(line.dot(point)) / plane_norm;
}

}  // namespace

double epipolar_distance(const FundamentalMatrix& f, const ImagePoint& x, const ImagePoint& y) {
  const Eigen::Vector3d xh = x.homogeneous();
  const Eigen::Vector3d yh = y.homogeneous();
  const double right = epipolar_line_distance(f.entries * xh, yh);
  const double left = epipolar_line_distance(f.entries.transpose() * yh, xh);
  return 0.5 * (left + right);
}

ImagePoint epipole(const StereoRig& rig, Side side) {
  // Each epipole is the other camera's focal point projected into this image.
  Eigen::Vector3d h;
  if (side == Side::Left) {
    h = rig.k_left.entries() * (-rig.pose.rotation().transpose() * rig.pose.translation());
  } else {
    h = rig.k_right.entries() * rig.pose.translation();
  }
  if (h.z() == 0.0) raise(Errc::DegenerateEpipole, "epipole lies at infinity");
  return {h.x() / h.z(), h.y() / h.z()};
}

bool epipolar_ray_contains(const StereoRig& rig, const FundamentalMatrix& f, const ImagePoint& x,
                           const ImagePoint& y, double tol) {
  const Eigen::Vector3d fx = f.entries * x.homogeneous();
  const double residual = std::abs(fx.dot(y.homogeneous()));
  if (residual > tol * (1.0 + std::hypot(fx.x(), fx.y()))) return false;
  const Eigen::Vector3d& t = rig.pose.translation();
  const Eigen::Vector3d lhs = t.cross(rig.k_right.inverse() * y.homogeneous());
  const Eigen::Vector3d rhs = t.cross(rig.pose.rotation() * (rig.k_left.inverse() * x.homogeneous()));
  return lhs.dot(rhs) > 0.0;
}

Triangulation triangulate(const StereoRig& rig, const ImagePoint& x, const ImagePoint& y) {
  const auto [left, right] = back_rays(rig, x, y);
  const ClosestPointSolution sol = closest_points(left, right);
  const WorldPoint midpoint = 0.5 * (sol.b_left + sol.b_right);
  return {midpoint, is_in_front(rig, midpoint)};
}

double point_distance(const StereoRig& rig, const DistanceSpec& spec, const FundamentalMatrix* f,
                      const ImagePoint& x, const ImagePoint& y) {
  switch (spec.kind) {
    case DistanceKind::Epipolar: {
      if (f == nullptr) {
        const FundamentalMatrix local = fundamental_matrix(rig);
        return epipolar_distance(local, x, y);
      }
      return epipolar_distance(*f, x, y);
    }
    case DistanceKind::Ray:
      return ray_distance(rig, x, y);
    case DistanceKind::RegularizedRay:
      return regularized_ray_distance(rig, x, y, *spec.reg);
  }
  raise(Errc::ValidationError, "unknown distance kind");
}

}  // namespace otm
