#include "otmatch/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "otmatch/cost.hpp"

namespace otm {

namespace {

constexpr int kCenterRejectionBudget = 100000;
constexpr int kSceneRegenerationBudget = 100;
// Regeneration attempts (never observed with sane configs) shift the stream
// index far past any realistic scene count.
constexpr std::uint64_t kAttemptStride = 0x100000000ULL;

Eigen::Matrix3d euler_xyz(double ax, double ay, double az) {
  return (Eigen::AngleAxisd(ax, Eigen::Vector3d::UnitX()) *
          Eigen::AngleAxisd(ay, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(az, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

}  // namespace

void SweepConfig::validate() const {
  if (n_scenes < 1 || n_objects < 1 || points_per_object < 1)
    raise(Errc::ValidationError, "scene, object, and point counts must be >= 1");
  for (int k = 0; k < 3; ++k)
    if (!(center_min[k] < center_max[k]))
      raise(Errc::ValidationError, "center box must have positive extent");
  if (!(radius_min > 0.0) || !(radius_min <= radius_max))
    raise(Errc::ValidationError, "radius range must satisfy 0 < min <= max");
  if (sigmas.empty()) raise(Errc::ValidationError, "at least one noise level is required");
  for (double s : sigmas)
    if (!(s >= 0.0)) raise(Errc::ValidationError, "noise levels must be >= 0");
  if (!(max_rotation_deg >= 0.0)) raise(Errc::ValidationError, "max rotation must be >= 0");
  if (distances.empty()) raise(Errc::ValidationError, "at least one distance is required");
  if (matchers.empty()) raise(Errc::ValidationError, "at least one matcher is required");
  DepthRegParams::from(reg.beta, reg.gamma_low, reg.gamma_high);
}

DistanceSpec SweepConfig::distance_spec(DistanceKind kind) const {
  if (kind == DistanceKind::RegularizedRay) return DistanceSpec::regularized(reg);
  return {kind, std::nullopt};
}

std::vector<WorldPoint> Scene::flat_world_points() const {
  std::vector<WorldPoint> points;
  for (const auto& group : world_points) points.insert(points.end(), group.begin(), group.end());
  return points;
}

StereoRig make_random_rig(const SweepConfig& cfg, RngStream& stream) {
  const double max_rad = cfg.max_rotation_deg * std::numbers::pi / 180.0;
  double angles[6];
  for (double& a : angles) a = stream.uniform(-max_rad, max_rad);
  const Eigen::Matrix3d r_left = euler_xyz(angles[0], angles[1], angles[2]);
  const Eigen::Matrix3d r_right = euler_xyz(angles[3], angles[4], angles[5]);

  const Eigen::Vector3d pos_left(0.0, 0.0, 0.0);
  const Eigen::Vector3d pos_right(1.0, 0.0, 0.0);
  return reduce_general_rig(IntrinsicMatrix::identity(), IntrinsicMatrix::identity(), r_left,
                            r_right, -r_left * pos_left, -r_right * pos_right);
}

Scene sample_scene(const SweepConfig& cfg, int scene_index, double sigma) {
  cfg.validate();

  for (int attempt = 0; attempt < kSceneRegenerationBudget; ++attempt) {
    const std::uint64_t stream_index =
        static_cast<std::uint64_t>(scene_index) + kAttemptStride * static_cast<std::uint64_t>(attempt);

    RngStream rig_stream = make_stream(cfg.base_seed, stream_index, StreamPurpose::Rig);
    const StereoRig rig = make_random_rig(cfg, rig_stream);

    RngStream geometry = make_stream(cfg.base_seed, stream_index, StreamPurpose::Geometry);

    // Radii are drawn once per sphere; the rejection loop resamples only the
    // proposed center.
    std::vector<SphereSpec> spheres;
    for (int k = 0; k < cfg.n_objects; ++k) {
      SphereSpec sphere;
      sphere.radius = geometry.uniform(cfg.radius_min, cfg.radius_max);
      sphere.points_per_sphere = cfg.points_per_object;
      int rejections = 0;
      for (;;) {
        for (int c = 0; c < 3; ++c)
          sphere.center[c] = geometry.uniform(cfg.center_min[c], cfg.center_max[c]);
        bool overlaps = false;
        for (const SphereSpec& placed : spheres)
          if ((sphere.center - placed.center).norm() <= sphere.radius + placed.radius) {
            overlaps = true;
            break;
          }
        if (!overlaps) break;
        if (++rejections > kCenterRejectionBudget)
          raise(Errc::RejectionBudgetExceeded,
                "sphere placement rejected 1e5 consecutive centers; check the box/radius config");
      }
      spheres.push_back(sphere);
    }

    std::vector<std::vector<WorldPoint>> world_points(spheres.size());
    bool all_in_front = true;
    for (std::size_t k = 0; k < spheres.size(); ++k) {
      for (int p = 0; p < cfg.points_per_object; ++p) {
        const WorldPoint w = spheres[k].center + spheres[k].radius * geometry.unit_vector();
        if (!is_in_front(rig, w)) all_in_front = false;
        world_points[k].push_back(w);
      }
    }
    if (!all_in_front) continue;  // regenerate with a shifted stream index

    RngStream noise_left = make_stream(cfg.base_seed, stream_index, StreamPurpose::NoiseLeft);
    RngStream noise_right = make_stream(cfg.base_seed, stream_index, StreamPurpose::NoiseRight);

    std::vector<LabeledObject> left_objects, right_objects;
    std::vector<IdPair> point_pairs, object_pairs;
    for (std::size_t k = 0; k < spheres.size(); ++k) {
      const std::string object_id = "s" + std::to_string(k);
      LabeledObject left{object_id, {}, {}};
      LabeledObject right{object_id, {}, {}};
      for (int p = 0; p < cfg.points_per_object; ++p) {
        const std::string point_id = object_id + "_p" + std::to_string(p);
        ImagePoint xl = project(rig, world_points[k][p], Side::Left).point;
        ImagePoint xr = project(rig, world_points[k][p], Side::Right).point;
        const auto [zul, zvl] = noise_left.normal_pair();
        const auto [zur, zvr] = noise_right.normal_pair();
        xl.u += sigma * zul;
        xl.v += sigma * zvl;
        xr.u += sigma * zur;
        xr.v += sigma * zvr;
        left.points.push_back(xl);
        left.point_ids.push_back(point_id);
        right.points.push_back(xr);
        right.point_ids.push_back(point_id);
        point_pairs.push_back({point_id, point_id});
      }
      left_objects.push_back(std::move(left));
      right_objects.push_back(std::move(right));
      object_pairs.push_back({object_id, object_id});
    }

    Scene scene{std::move(spheres),
                std::move(world_points),
                rig,
                LabeledCloud::from(std::move(left_objects)),
                LabeledCloud::from(std::move(right_objects)),
                GroundTruthCorrespondence::from(std::move(point_pairs), std::move(object_pairs)),
                sigma,
                cfg.base_seed,
                scene_index};
    return scene;
  }
  raise(Errc::RejectionBudgetExceeded, "scene regeneration budget exhausted");
}

namespace {

struct CellMetrics {
  double mismatch = 0.0;  // fraction
  double w2 = 0.0;
  double object_mismatch = 0.0;  // fraction; HOT only
  bool has_object = false;
};

// Metrics for every (distance, matcher) cell of one scene.  Uses only the
// serial kernels so results do not depend on nesting of parallel regions.
std::vector<CellMetrics> scene_metrics(const SweepConfig& cfg, int scene_index, double sigma) {
  const Scene scene = sample_scene(cfg, scene_index, sigma);
  const std::vector<ImagePoint> left = scene.projections_left.flat_points();
  const std::vector<ImagePoint> right = scene.projections_right.flat_points();
  const std::vector<std::string> left_ids = scene.projections_left.flat_ids();
  const std::vector<std::string> right_ids = scene.projections_right.flat_ids();
  const std::vector<WorldPoint> gt_world = scene.flat_world_points();
  const int n = static_cast<int>(left.size());
  const int m = static_cast<int>(right.size());

  std::vector<std::string> left_object_ids, right_object_ids;
  for (const LabeledObject& obj : scene.projections_left.objects())
    left_object_ids.push_back(obj.object_id);
  for (const LabeledObject& obj : scene.projections_right.objects())
    right_object_ids.push_back(obj.object_id);

  std::vector<CellMetrics> cells(cfg.distances.size() * cfg.matchers.size());
  for (std::size_t d = 0; d < cfg.distances.size(); ++d) {
    const DistanceSpec spec = cfg.distance_spec(cfg.distances[d]);
    const CostMatrix cost = pairwise_cost_serial(scene.rig, spec, left, right);
    for (std::size_t mi = 0; mi < cfg.matchers.size(); ++mi) {
      CellMetrics& cell = cells[d * cfg.matchers.size() + mi];
      Matching pred;
      switch (cfg.matchers[mi]) {
        case Matcher::Naive:
          pred = naive_match(cost);
          break;
        case Matcher::OT:
          pred = binarize(solve_ot(cost, MarginalWeights::uniform(n, m)), MatchSource::OT);
          break;
        case Matcher::HOT: {
          const ObjectCostMatrix oc =
              object_costs_serial(scene.rig, spec, scene.projections_left, scene.projections_right);
          const ObjectMatchResult omr = match_objects(oc, ObjectMatchMode::Balanced);
          const GlobalPlan gp =
              global_plan(omr.plan, oc, scene.projections_left, scene.projections_right);
          pred = global_matching(gp);
          cell.object_mismatch = objectwise_mismatch(
              to_id_pairs(omr.matching, left_object_ids, right_object_ids), scene.gt,
              scene.projections_left.object_count(), scene.projections_right.object_count());
          cell.has_object = true;
          break;
        }
      }
      cell.mismatch = pointwise_mismatch(to_id_pairs(pred, left_ids, right_ids), scene.gt, n, m);
      const ReconstructionResult rec = reconstruct(scene.rig, pred, left, right);
      cell.w2 = w2_squared(rec.points, gt_world);
    }
  }
  return cells;
}

std::pair<double, double> mean_and_population_std(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

SweepResult run_sweep_impl(const SweepConfig& cfg, bool parallel) {
  cfg.validate();
  const int n_sigmas = static_cast<int>(cfg.sigmas.size());
  const int n_tasks = n_sigmas * cfg.n_scenes;
  const std::size_t cells_per_scene = cfg.distances.size() * cfg.matchers.size();

  // task -> per-cell metrics, stored by index so aggregation order (and
  // therefore the output) is independent of scheduling.
  std::vector<std::vector<CellMetrics>> all(static_cast<std::size_t>(n_tasks));

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int task = 0; task < n_tasks; ++task) {
    const int sigma_index = task / cfg.n_scenes;
    const int scene_index = task % cfg.n_scenes;
    all[task] = scene_metrics(cfg, scene_index, cfg.sigmas[sigma_index]);
  }

  SweepResult result;
  result.config = cfg;
  for (std::size_t d = 0; d < cfg.distances.size(); ++d) {
    for (std::size_t mi = 0; mi < cfg.matchers.size(); ++mi) {
      for (int si = 0; si < n_sigmas; ++si) {
        std::vector<double> mismatches, w2s, objects;
        for (int sc = 0; sc < cfg.n_scenes; ++sc) {
          const CellMetrics& cell =
              all[static_cast<std::size_t>(si) * cfg.n_scenes + sc][d * cfg.matchers.size() + mi];
          mismatches.push_back(cell.mismatch * 100.0);
          w2s.push_back(cell.w2);
          if (cell.has_object) objects.push_back(cell.object_mismatch * 100.0);
        }
        SweepRow row;
        row.distance = cfg.distances[d];
        row.matcher = cfg.matchers[mi];
        row.sigma = cfg.sigmas[si];
        std::tie(row.mismatch_mean_pct, row.mismatch_std_pct) = mean_and_population_std(mismatches);
        std::tie(row.w2_mean, row.w2_std) = mean_and_population_std(w2s);
        if (!objects.empty()) {
          const auto [om, os] = mean_and_population_std(objects);
          row.object_mismatch_mean_pct = om;
          row.object_mismatch_std_pct = os;
        }
        result.rows.push_back(row);
      }
    }
  }
  return result;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) { return run_sweep_impl(cfg, true); }

SweepResult run_sweep_serial(const SweepConfig& cfg) { return run_sweep_impl(cfg, false); }

const char* matcher_name(Matcher m) {
  switch (m) {
    case Matcher::Naive: return "naive";
    case Matcher::OT: return "ot";
    case Matcher::HOT: return "hot";
  }
  return "?";
}

const char* distance_name(DistanceKind k) {
  switch (k) {
    case DistanceKind::Epipolar: return "epi";
    case DistanceKind::Ray: return "ray";
    case DistanceKind::RegularizedRay: return "reg";
  }
  return "?";
}

std::optional<Matcher> matcher_from_name(const std::string& name) {
  if (name == "naive") return Matcher::Naive;
  if (name == "ot") return Matcher::OT;
  if (name == "hot") return Matcher::HOT;
  return std::nullopt;
}

std::optional<DistanceKind> distance_from_name(const std::string& name) {
  if (name == "epi") return DistanceKind::Epipolar;
  if (name == "ray") return DistanceKind::Ray;
  if (name == "reg") return DistanceKind::RegularizedRay;
  return std::nullopt;
}

}  // namespace otm
