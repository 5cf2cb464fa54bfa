#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "otmatch/geometry.hpp"
#include "otmatch/transport.hpp"

namespace otm {

using IdPair = std::pair<std::string, std::string>;

/// Known correspondence between left and right ids, injective both ways.
class GroundTruthCorrespondence {
 public:
  static GroundTruthCorrespondence from(std::vector<IdPair> point_pairs,
                                        std::vector<IdPair> object_pairs = {});

  const std::vector<IdPair>& point_pairs() const { return point_pairs_; }
  const std::vector<IdPair>& object_pairs() const { return object_pairs_; }
  bool point_pair_correct(const std::string& left, const std::string& right) const;
  bool object_pair_correct(const std::string& left, const std::string& right) const;

 private:
  GroundTruthCorrespondence() = default;
  std::vector<IdPair> point_pairs_;
  std::vector<IdPair> object_pairs_;
  std::unordered_map<std::string, std::string> point_map_;
  std::unordered_map<std::string, std::string> object_map_;
};

struct MetricsReport {
  double pointwise_mismatch = 0.0;
  std::optional<double> objectwise_mismatch;
  std::optional<double> w2_squared;
  int matched_count = 0;
  int skipped_triangulations = 0;
};

/// Fraction of wrong point pairs over min(N, M); predictions missing from
/// the ground truth and pairs never predicted both count as incorrect.
double pointwise_mismatch(const std::vector<IdPair>& pred, const GroundTruthCorrespondence& gt,
                          int n, int m);

double objectwise_mismatch(const std::vector<IdPair>& pred, const GroundTruthCorrespondence& gt,
                           int n, int m);

struct ReconstructionResult {
  std::vector<WorldPoint> points;
  std::vector<bool> in_front;
  int skipped = 0;
};

/// Triangulates every predicted pair; parallel-ray pairs are skipped and
/// counted instead of imputed.
ReconstructionResult reconstruct(const StereoRig& rig, const Matching& pred,
                                 std::span<const ImagePoint> left,
                                 std::span<const ImagePoint> right);

/// Squared Wasserstein-2 between two 3D clouds under squared Euclidean
/// cost: balanced OT for equal sizes, default-mass partial OT normalized by
/// the transported mass otherwise.
double w2_squared(std::span<const WorldPoint> p, std::span<const WorldPoint> q);

}  // namespace otm
