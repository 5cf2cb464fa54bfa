#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "otmatch/evaluation.hpp"
#include "otmatch/geometry.hpp"
#include "otmatch/hierarchy.hpp"
#include "otmatch/rng.hpp"

namespace otm {

struct SphereSpec {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
  int points_per_sphere = 0;
};

/// One synthetic scene: ground-truth 3D points grouped by sphere, the rig,
/// the (possibly noisy) projections on both cameras, and the identity
/// ground-truth correspondence induced by construction.
struct Scene {
  std::vector<SphereSpec> spheres;
  std::vector<std::vector<WorldPoint>> world_points;  // grouped by sphere
  StereoRig rig;
  LabeledCloud projections_left;
  LabeledCloud projections_right;
  GroundTruthCorrespondence gt;
  double noise_sigma = 0.0;
  std::uint64_t base_seed = 0;
  int scene_index = 0;

  std::vector<WorldPoint> flat_world_points() const;
};

enum class Matcher { Naive, OT, HOT };

struct SweepConfig {
  int n_scenes = 100;
  int n_objects = 5;
  int points_per_object = 10;
  Eigen::Vector3d center_min = {-0.5, -0.5, 2.5};
  Eigen::Vector3d center_max = {0.5, 0.5, 3.5};
  double radius_min = 0.05;
  double radius_max = 0.1;
  std::vector<double> sigmas = {0.0, 0.001, 0.005, 0.01, 0.05};
  double max_rotation_deg = 15.0;
  std::uint64_t base_seed = 23;
  std::vector<DistanceKind> distances = {DistanceKind::Epipolar, DistanceKind::Ray,
                                         DistanceKind::RegularizedRay};
  std::vector<Matcher> matchers = {Matcher::Naive, Matcher::OT, Matcher::HOT};
  DepthRegParams reg = {10.0, 2.5, 3.5};

  void validate() const;
  DistanceSpec distance_spec(DistanceKind kind) const;
};

Scene sample_scene(const SweepConfig& cfg, int scene_index, double sigma);

/// Identity intrinsics, camera centers (0,0,0) and (1,0,0), independent
/// random rotations of both cameras (intrinsic XYZ Euler angles, each
/// uniform in [-max_rotation_deg, +max_rotation_deg]), reduced to the
/// canonical left-at-origin form.
StereoRig make_random_rig(const SweepConfig& cfg, RngStream& stream);

struct SweepRow {
  DistanceKind distance;
  Matcher matcher;
  double sigma = 0.0;
  double mismatch_mean_pct = 0.0;
  double mismatch_std_pct = 0.0;
  double w2_mean = 0.0;
  double w2_std = 0.0;
  std::optional<double> object_mismatch_mean_pct;  // HOT rows only
  std::optional<double> object_mismatch_std_pct;
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepRow> rows;  // ordered by (distance, matcher, sigma)
};

/// Full sweep over scenes and noise levels.  The default entry point
/// parallelizes over (sigma, scene) tasks; per-scene results land in
/// preallocated slots and are aggregated in a fixed order, so the output is
/// bitwise independent of scheduling and identical to the serial variant.
SweepResult run_sweep(const SweepConfig& cfg);
SweepResult run_sweep_serial(const SweepConfig& cfg);

const char* matcher_name(Matcher m);
const char* distance_name(DistanceKind k);
std::optional<Matcher> matcher_from_name(const std::string& name);
std::optional<DistanceKind> distance_from_name(const std::string& name);

}  // namespace otm
