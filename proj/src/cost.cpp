#include "otmatch/cost.hpp"

namespace otm {

namespace {

CostMatrix pairwise_cost_impl(const StereoRig& rig, const DistanceSpec& spec,
                              std::span<const ImagePoint> left, std::span<const ImagePoint> right,
                              bool parallel) {
  spec.validate();
  if (left.empty() || right.empty())
    raise(Errc::ValidationError, "pairwise cost needs nonempty point sets");

  const int n = static_cast<int>(left.size());
  const int m = static_cast<int>(right.size());
  const FundamentalMatrix f = fundamental_matrix(rig);
  std::vector<double> values(static_cast<std::size_t>(n) * m);

#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      values[static_cast<std::size_t>(i) * m + j] = point_distance(rig, spec, &f, left[i], right[j]);
    }
  }
  return CostMatrix::from(n, m, std::move(values), spec);
}

}  // namespace

CostMatrix pairwise_cost(const StereoRig& rig, const DistanceSpec& spec,
                         std::span<const ImagePoint> left, std::span<const ImagePoint> right) {
  return pairwise_cost_impl(rig, spec, left, right, true);
}

CostMatrix pairwise_cost_serial(const StereoRig& rig, const DistanceSpec& spec,
                                std::span<const ImagePoint> left,
                                std::span<const ImagePoint> right) {
  return pairwise_cost_impl(rig, spec, left, right, false);
}

}  // namespace otm
