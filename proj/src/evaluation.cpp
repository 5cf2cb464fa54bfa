#include "otmatch/evaluation.hpp"

#include <algorithm>
#include <unordered_set>

namespace otm {

namespace {

void check_injective(const std::vector<IdPair>& pairs, const char* what) {
  std::unordered_set<std::string> lefts, rights;
  for (const auto& [l, r] : pairs) {
    if (!lefts.insert(l).second)
      raise(Errc::ValidationError, std::string(what) + " maps left id '" + l + "' twice");
    if (!rights.insert(r).second)
      raise(Errc::ValidationError, std::string(what) + " maps right id '" + r + "' twice");
  }
}

double mismatch_rate(const std::vector<IdPair>& pred,
                     const std::unordered_map<std::string, std::string>& gt_map, int n, int m,
                     const char* what) {
  check_injective(pred, what);
  const int denom = std::min(n, m);
  if (denom <= 0) raise(Errc::ValidationError, "mismatch rate needs positive set sizes");
  if (static_cast<int>(pred.size()) > denom)
    raise(Errc::ValidationError, std::string(what) + " has more pairs than min(N, M)");

  int incorrect = denom - static_cast<int>(pred.size());  // missing pairs count as incorrect
  for (const auto& [l, r] : pred) {
    const auto it = gt_map.find(l);
    if (it == gt_map.end() || it->second != r) ++incorrect;
  }
  return static_cast<double>(incorrect) / static_cast<double>(denom);
}

}  // namespace

GroundTruthCorrespondence GroundTruthCorrespondence::from(std::vector<IdPair> point_pairs,
                                                          std::vector<IdPair> object_pairs) {
  check_injective(point_pairs, "ground-truth point correspondence");
  check_injective(object_pairs, "ground-truth object correspondence");
  GroundTruthCorrespondence gt;
  gt.point_pairs_ = std::move(point_pairs);
  gt.object_pairs_ = std::move(object_pairs);
  for (const auto& [l, r] : gt.point_pairs_) gt.point_map_[l] = r;
  for (const auto& [l, r] : gt.object_pairs_) gt.object_map_[l] = r;
  return gt;
}

bool GroundTruthCorrespondence::point_pair_correct(const std::string& left,
                                                   const std::string& right) const {
  const auto it = point_map_.find(left);
  return it != point_map_.end() && it->second == right;
}

bool GroundTruthCorrespondence::object_pair_correct(const std::string& left,
                                                    const std::string& right) const {
  const auto it = object_map_.find(left);
  return it != object_map_.end() && it->second == right;
}

double pointwise_mismatch(const std::vector<IdPair>& pred, const GroundTruthCorrespondence& gt,
                          int n, int m) {
  std::unordered_map<std::string, std::string> map;
  for (const auto& [l, r] : gt.point_pairs()) map[l] = r;
  return mismatch_rate(pred, map, n, m, "predicted point matching");
}

double objectwise_mismatch(const std::vector<IdPair>& pred, const GroundTruthCorrespondence& gt,
                           int n, int m) {
  std::unordered_map<std::string, std::string> map;
  for (const auto& [l, r] : gt.object_pairs()) map[l] = r;
  return mismatch_rate(pred, map, n, m, "predicted object matching");
}

ReconstructionResult reconstruct(const StereoRig& rig, const Matching& pred,
                                 std::span<const ImagePoint> left,
                                 std::span<const ImagePoint> right) {
  ReconstructionResult result;
  for (const auto& [i, j] : pred.pairs) {
    if (i < 0 || i >= static_cast<int>(left.size()) || j < 0 ||
        j >= static_cast<int>(right.size()))
      raise(Errc::ValidationError, "matching indices fall outside the point lists");
    try {
      const Triangulation tri = triangulate(rig, left[i], right[j]);
      result.points.push_back(tri.point);
      result.in_front.push_back(tri.in_front);
    } catch (const Error& err) {
      if (err.code() != Errc::ParallelRays) throw;
      ++result.skipped;
    }
  }
  return result;
}

double w2_squared(std::span<const WorldPoint> p, std::span<const WorldPoint> q) {
  if (p.empty() || q.empty()) raise(Errc::EmptyCloud, "Wasserstein evaluation needs nonempty clouds");
  const int n = static_cast<int>(p.size());
  const int m = static_cast<int>(q.size());
  std::vector<double> values(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      values[static_cast<std::size_t>(i) * m + j] = (p[i] - q[j]).squaredNorm();
  const CostMatrix cost = CostMatrix::from(n, m, std::move(values));

  if (n == m) return solve_ot(cost, MarginalWeights::uniform(n, m)).objective;
  // Unequal cardinalities: default-mass partial transport, normalized by the
  // transported mass so the value stays comparable to the balanced case.
  const TransportPlan plan = solve_pot(cost);
  return plan.objective / plan.total_mass;
}

}  // namespace otm
