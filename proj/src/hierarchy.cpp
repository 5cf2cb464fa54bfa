#include "otmatch/hierarchy.hpp"

#include <algorithm>
#include <unordered_set>

namespace otm {

LabeledCloud LabeledCloud::from(std::vector<LabeledObject> objects) {
  if (objects.empty()) raise(Errc::ValidationError, "labeled cloud needs at least one object");
  std::unordered_set<std::string> object_ids, point_ids;
  for (const LabeledObject& obj : objects) {
    if (obj.points.empty())
      raise(Errc::ValidationError, "object '" + obj.object_id + "' has no points");
    if (obj.points.size() != obj.point_ids.size())
      raise(Errc::ValidationError, "object '" + obj.object_id + "' has mismatched point/id counts");
    if (!object_ids.insert(obj.object_id).second)
      raise(Errc::ValidationError, "duplicate object id '" + obj.object_id + "'");
    for (const std::string& pid : obj.point_ids)
      if (!point_ids.insert(pid).second)
        raise(Errc::ValidationError, "duplicate point id '" + pid + "'");
  }
  return LabeledCloud(std::move(objects));
}

int LabeledCloud::total_points() const {
  int total = 0;
  for (const LabeledObject& obj : objects_) total += static_cast<int>(obj.points.size());
  return total;
}

std::vector<ImagePoint> LabeledCloud::flat_points() const {
  std::vector<ImagePoint> points;
  points.reserve(total_points());
  for (const LabeledObject& obj : objects_)
    points.insert(points.end(), obj.points.begin(), obj.points.end());
  return points;
}

std::vector<std::string> LabeledCloud::flat_ids() const {
  std::vector<std::string> ids;
  ids.reserve(total_points());
  for (const LabeledObject& obj : objects_)
    ids.insert(ids.end(), obj.point_ids.begin(), obj.point_ids.end());
  return ids;
}

namespace {

ObjectCostMatrix object_costs_impl(const StereoRig& rig, const DistanceSpec& spec,
                                   const LabeledCloud& left, const LabeledCloud& right,
                                   bool parallel) {
  spec.validate();
  const int n = left.object_count();
  const int m = right.object_count();
  std::vector<double> values(static_cast<std::size_t>(n) * m, 0.0);
  std::vector<TransportPlan> plans(static_cast<std::size_t>(n) * m);

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int pair = 0; pair < n * m; ++pair) {
    const int i = pair / m;
    const int j = pair % m;
    const LabeledObject& a = left.objects()[i];
    const LabeledObject& b = right.objects()[j];
    const CostMatrix local = pairwise_cost_serial(rig, spec, a.points, b.points);
    TransportPlan plan = solve_pot(local);
    values[pair] = plan.objective;
    plans[pair] = std::move(plan);
  }

  return {CostMatrix::from(n, m, std::move(values)), std::move(plans)};
}

}  // namespace

ObjectCostMatrix object_costs(const StereoRig& rig, const DistanceSpec& spec,
                              const LabeledCloud& left, const LabeledCloud& right) {
  return object_costs_impl(rig, spec, left, right, true);
}

ObjectCostMatrix object_costs_serial(const StereoRig& rig, const DistanceSpec& spec,
                                     const LabeledCloud& left, const LabeledCloud& right) {
  return object_costs_impl(rig, spec, left, right, false);
}

ObjectMatchResult match_objects(const ObjectCostMatrix& costs, ObjectMatchMode mode) {
  const int n = costs.values.rows();
  const int m = costs.values.cols();
  TransportPlan plan;
  MatchSource source;
  if (mode == ObjectMatchMode::Balanced) {
    if (n != m)
      raise(Errc::ShapeMismatch,
            "balanced object matching requires equal object counts; use the partial mode");
    plan = solve_ot(costs.values, MarginalWeights::uniform(n, m));
    source = MatchSource::HOT;
  } else {
    plan = solve_pot(costs.values);
    source = MatchSource::HOTPOT;
  }
  Matching matching = binarize(plan, source);
  return {std::move(plan), std::move(matching)};
}

GlobalPlan global_plan(const TransportPlan& object_plan, const ObjectCostMatrix& costs,
                       const LabeledCloud& left, const LabeledCloud& right) {
  if (object_plan.rows != costs.values.rows() || object_plan.cols != costs.values.cols() ||
      object_plan.rows != left.object_count() || object_plan.cols != right.object_count())
    raise(Errc::ShapeMismatch, "object plan shape does not match the cached cost table");

  GlobalPlan gp;
  gp.object_plan = object_plan;
  for (const LabeledObject& obj : left.objects()) gp.left_ids.push_back(obj.point_ids);
  for (const LabeledObject& obj : right.objects()) gp.right_ids.push_back(obj.point_ids);

  for (const PlanEntry& e : object_plan.entries) {
    if (e.mass <= 0.0) continue;
    const TransportPlan& local = costs.local_plan(e.i, e.j);
    gp.blocks.push_back({e.i, e.j, e.mass, local});
    for (const PlanEntry& le : local.entries) {
      gp.entries.push_back({gp.left_ids[e.i][le.i], gp.right_ids[e.j][le.j], e.mass * le.mass});
    }
  }
  return gp;
}

Matching global_matching(const GlobalPlan& gp) {
  // Flat object-major offsets, aligned with LabeledCloud::flat_points().
  std::vector<int> left_offset(gp.left_ids.size() + 1, 0), right_offset(gp.right_ids.size() + 1, 0);
  for (std::size_t k = 0; k < gp.left_ids.size(); ++k)
    left_offset[k + 1] = left_offset[k] + static_cast<int>(gp.left_ids[k].size());
  for (std::size_t k = 0; k < gp.right_ids.size(); ++k)
    right_offset[k + 1] = right_offset[k] + static_cast<int>(gp.right_ids[k].size());

  const Matching object_matching = binarize(gp.object_plan, MatchSource::HOT);
  Matching result;
  result.source = MatchSource::HOT;
  for (const auto& [oi, oj] : object_matching.pairs) {
    for (const GlobalPlanBlock& block : gp.blocks) {
      if (block.object_left != oi || block.object_right != oj) continue;
      const Matching local = binarize(block.local, MatchSource::HOT);
      for (const auto& [r, s] : local.pairs)
        result.pairs.push_back({left_offset[oi] + r, right_offset[oj] + s});
      break;
    }
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  return result;
}

std::vector<std::pair<std::string, std::string>> to_id_pairs(
    const Matching& matching, const std::vector<std::string>& left_ids,
    const std::vector<std::string>& right_ids) {
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(matching.pairs.size());
  for (const auto& [i, j] : matching.pairs) {
    if (i < 0 || i >= static_cast<int>(left_ids.size()) || j < 0 ||
        j >= static_cast<int>(right_ids.size()))
      raise(Errc::ValidationError, "matching indices fall outside the id tables");
    pairs.push_back({left_ids[i], right_ids[j]});
  }
  return pairs;
}

}  // namespace otm
