#pragma once

#include <string>
#include <vector>

#include "otmatch/cost.hpp"
#include "otmatch/geometry.hpp"
#include "otmatch/transport.hpp"

namespace otm {

struct LabeledObject {
  std::string object_id;
  std::vector<ImagePoint> points;
  std::vector<std::string> point_ids;
};

/// Ordered collection of labeled objects.  Object ids are unique, point ids
/// are unique across the whole cloud, and every object is nonempty.
class LabeledCloud {
 public:
  static LabeledCloud from(std::vector<LabeledObject> objects);

  const std::vector<LabeledObject>& objects() const { return objects_; }
  int object_count() const { return static_cast<int>(objects_.size()); }
  int total_points() const;

  /// Points and ids in flat object-major order.
  std::vector<ImagePoint> flat_points() const;
  std::vector<std::string> flat_ids() const;

 private:
  explicit LabeledCloud(std::vector<LabeledObject> objects) : objects_(std::move(objects)) {}
  std::vector<LabeledObject> objects_;
};

/// Object-level cost table: values[i][j] is the partial-OT objective between
/// object i on the left and object j on the right, with the local plans
/// cached for global-plan recovery.
struct ObjectCostMatrix {
  CostMatrix values;
  std::vector<TransportPlan> local_plans;  // row-major, one per object pair

  const TransportPlan& local_plan(int i, int j) const {
    return local_plans[static_cast<std::size_t>(i) * values.cols() + j];
  }
};

/// Step 1 of the hierarchical matching: one default-mass POT solve per
/// object pair.  The pairs are independent, so the default entry point runs
/// them under OpenMP; output is bitwise identical to the serial reference.
ObjectCostMatrix object_costs(const StereoRig& rig, const DistanceSpec& spec,
                              const LabeledCloud& left, const LabeledCloud& right);

ObjectCostMatrix object_costs_serial(const StereoRig& rig, const DistanceSpec& spec,
                                     const LabeledCloud& left, const LabeledCloud& right);

enum class ObjectMatchMode { Balanced, Partial };

struct ObjectMatchResult {
  TransportPlan plan;
  Matching matching;
};

/// Step 2: transport on the object-level costs.  Balanced solves OT with
/// uniform weights (requires equal object counts); Partial solves POT at
/// the default mass.
ObjectMatchResult match_objects(const ObjectCostMatrix& costs, ObjectMatchMode mode);

struct GlobalPlanBlock {
  int object_left = 0;
  int object_right = 0;
  double object_mass = 0.0;
  TransportPlan local;
};

struct GlobalPlanEntry {
  std::string left_id;
  std::string right_id;
  double mass = 0.0;
};

/// Pointwise plan assembled by scaling each cached local plan with the mass
/// its object pair carries in the object-level plan.
struct GlobalPlan {
  TransportPlan object_plan;
  std::vector<GlobalPlanBlock> blocks;           // object pairs with positive mass
  std::vector<GlobalPlanEntry> entries;          // flattened over point ids
  std::vector<std::vector<std::string>> left_ids;   // point ids per left object
  std::vector<std::vector<std::string>> right_ids;  // point ids per right object
};

GlobalPlan global_plan(const TransportPlan& object_plan, const ObjectCostMatrix& costs,
                       const LabeledCloud& left, const LabeledCloud& right);

/// Pointwise matching induced by the hierarchy: binarize the object plan,
/// then binarize the local plan of every matched object pair.  Pairs are
/// reported in flat object-major indexing, aligned with
/// LabeledCloud::flat_points().
Matching global_matching(const GlobalPlan& gp);

/// Translates index pairs to id pairs.
std::vector<std::pair<std::string, std::string>> to_id_pairs(
    const Matching& matching, const std::vector<std::string>& left_ids,
    const std::vector<std::string>& right_ids);

}  // namespace otm
