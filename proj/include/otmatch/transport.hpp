#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otmatch/error.hpp"
#include "otmatch/geometry.hpp"

namespace otm {

/// Dense row-major cost matrix.  Entries are validated to be finite at
/// construction so the solvers never have to deal with NaN/inf.
class CostMatrix {
 public:
  static CostMatrix from(int rows, int cols, std::vector<double> values,
                         std::optional<DistanceSpec> distance_kind = std::nullopt);
  static CostMatrix zeros(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double at(int i, int j) const { return values_[static_cast<std::size_t>(i) * cols_ + j]; }
  double& at(int i, int j) { return values_[static_cast<std::size_t>(i) * cols_ + j]; }
  const std::vector<double>& values() const { return values_; }
  const std::optional<DistanceSpec>& distance_kind() const { return distance_kind_; }
  double max_value() const;

 private:
  CostMatrix(int rows, int cols, std::vector<double> values, std::optional<DistanceSpec> kind)
      : rows_(rows), cols_(cols), values_(std::move(values)), distance_kind_(std::move(kind)) {}
  int rows_;
  int cols_;
  std::vector<double> values_;
  std::optional<DistanceSpec> distance_kind_;
};

/// Strictly positive marginal weights of the two empirical measures.
class MarginalWeights {
 public:
  static MarginalWeights from(std::vector<double> left, std::vector<double> right);
  static MarginalWeights uniform(int n, int m);

  const std::vector<double>& left() const { return left_; }
  const std::vector<double>& right() const { return right_; }

 private:
  MarginalWeights(std::vector<double> l, std::vector<double> r)
      : left_(std::move(l)), right_(std::move(r)) {}
  std::vector<double> left_;
  std::vector<double> right_;
};

struct PlanEntry {
  int i = 0;
  int j = 0;
  double mass = 0.0;
};

/// Sparse coupling between the two point sets.  Entries carry strictly
/// positive mass, are unique per (i, j), and are kept sorted row-major.
struct TransportPlan {
  int rows = 0;
  int cols = 0;
  std::vector<PlanEntry> entries;
  double total_mass = 0.0;
  double objective = 0.0;

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
};

enum class MatchSource { Naive, OT, POT, HOT, HOTPOT };

/// Partial injection between the two index sets.
struct Matching {
  std::vector<std::pair<int, int>> pairs;
  MatchSource source = MatchSource::OT;
};

/// Exact balanced optimal transport: min <C, P> s.t. P 1 = left, P^T 1 = right.
/// Uniform square instances route through the assignment engine; everything
/// else through the transportation simplex.  Both are exact.
TransportPlan solve_ot(const CostMatrix& cost, const MarginalWeights& weights);

double default_partial_mass(int n, int m);

/// Exact partial optimal transport at the given total mass with uniform
/// capacity bounds 1/N and 1/M.  The default mass min(N,M)/max(N,M) is
/// solved as a rectangular assignment; smaller masses go through the
/// dummy-node reduction to a balanced problem.
TransportPlan solve_pot(const CostMatrix& cost, double mass);

inline TransportPlan solve_pot(const CostMatrix& cost) {
  return solve_pot(cost, default_partial_mass(cost.rows(), cost.cols()));
}

/// Greedy baseline: repeatedly take the global minimum entry (first
/// occurrence in row-major order on ties) and delete its row and column.
Matching naive_match(const CostMatrix& cost);

/// Projects a soft plan to a partial injection: per row keep the argmax
/// column (smallest index on ties) iff it holds at least half of the row's
/// transported mass, then enforce column injectivity by largest mass
/// (smallest row index on ties).
Matching binarize(const TransportPlan& plan, MatchSource source = MatchSource::OT);

double plan_objective(const CostMatrix& cost, const TransportPlan& plan);

namespace detail {

/// Rectangular linear assignment (shortest augmenting path).  Returns the
/// column assigned to each row; requires rows <= cols and finite costs.
std::vector<int> solve_assignment(const CostMatrix& cost);

/// Transportation simplex for arbitrary positive marginals.  When duals is
/// non-null the optimal dual potentials are written there, yielding an
/// optimality certificate that tests verify independently.
TransportPlan solve_balanced_simplex(const CostMatrix& cost, const std::vector<double>& left,
                                     const std::vector<double>& right,
                                     std::pair<std::vector<double>, std::vector<double>>* duals = nullptr);

}  // namespace detail

}  // namespace otm
