#pragma once

#include <span>

#include "otmatch/geometry.hpp"
#include "otmatch/transport.hpp"

namespace otm {

/// Pairwise cost matrix C[i][j] = c(x_i, y_j) for the selected distance.
/// The fundamental matrix is computed once and shared across all entries.
/// The default entry point parallelizes over rows with OpenMP; the serial
/// variant is the reference the parallel one is tested against (results are
/// bitwise identical since every entry is an independent pure evaluation).
CostMatrix pairwise_cost(const StereoRig& rig, const DistanceSpec& spec,
                         std::span<const ImagePoint> left, std::span<const ImagePoint> right);

CostMatrix pairwise_cost_serial(const StereoRig& rig, const DistanceSpec& spec,
                                std::span<const ImagePoint> left,
                                std::span<const ImagePoint> right);

}  // namespace otm
