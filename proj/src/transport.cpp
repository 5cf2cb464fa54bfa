#include "otmatch/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace otm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMarginalTol = 1e-9;
constexpr double kMassTol = 1e-12;

void sort_entries(std::vector<PlanEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const PlanEntry& a, const PlanEntry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
}

TransportPlan finalize_plan(int rows, int cols, std::vector<PlanEntry> entries,
                            const CostMatrix& cost) {
  sort_entries(entries);
  TransportPlan plan;
  plan.rows = rows;
  plan.cols = cols;
  plan.entries = std::move(entries);
  double mass = 0.0, objective = 0.0;
  for (const PlanEntry& e : plan.entries) {
    mass += e.mass;
    objective += e.mass * cost.at(e.i, e.j);
  }
  plan.total_mass = mass;
  plan.objective = objective;
  return plan;
}

bool is_uniform(const std::vector<double>& w) {
  const double expected = 1.0 / static_cast<double>(w.size());
  for (double v : w)
    if (std::abs(v - expected) > 1e-15) return false;
  return true;
}

CostMatrix transpose(const CostMatrix& cost) {
  std::vector<double> values(static_cast<std::size_t>(cost.rows()) * cost.cols());
  for (int i = 0; i < cost.rows(); ++i)
    for (int j = 0; j < cost.cols(); ++j)
      values[static_cast<std::size_t>(j) * cost.rows() + i] = cost.at(i, j);
  return CostMatrix::from(cost.cols(), cost.rows(), std::move(values));
}

}  // namespace

CostMatrix CostMatrix::from(int rows, int cols, std::vector<double> values,
                            std::optional<DistanceSpec> distance_kind) {
  if (rows < 1 || cols < 1) raise(Errc::ValidationError, "cost matrix needs at least one row and column");
  if (values.size() != static_cast<std::size_t>(rows) * cols)
    raise(Errc::ValidationError, "cost matrix value count does not match its shape");
  for (double v : values)
    if (!std::isfinite(v)) raise(Errc::ValidationError, "cost matrix entries must be finite");
  if (distance_kind) distance_kind->validate();
  return CostMatrix(rows, cols, std::move(values), std::move(distance_kind));
}

CostMatrix CostMatrix::zeros(int rows, int cols) {
  return CostMatrix(rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0),
                    std::nullopt);
}

double CostMatrix::max_value() const {
  double m = values_.front();
  for (double v : values_) m = std::max(m, v);
  return m;
}

MarginalWeights MarginalWeights::from(std::vector<double> left, std::vector<double> right) {
  if (left.empty() || right.empty()) raise(Errc::ValidationError, "marginal weights must be nonempty");
  for (double v : left)
    if (!(v > 0.0) || !std::isfinite(v))
      raise(Errc::ValidationError, "left marginal weights must be positive and finite");
  for (double v : right)
    if (!(v > 0.0) || !std::isfinite(v))
      raise(Errc::ValidationError, "right marginal weights must be positive and finite");
  return MarginalWeights(std::move(left), std::move(right));
}

MarginalWeights MarginalWeights::uniform(int n, int m) {
  if (n < 1 || m < 1) raise(Errc::ValidationError, "uniform weights need positive sizes");
  return MarginalWeights(std::vector<double>(n, 1.0 / n), std::vector<double>(m, 1.0 / m));
}

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> sums(rows, 0.0);
  for (const PlanEntry& e : entries) sums[e.i] += e.mass;
  return sums;
}

std::vector<double> TransportPlan::col_sums() const {
  std::vector<double> sums(cols, 0.0);
  for (const PlanEntry& e : entries) sums[e.j] += e.mass;
  return sums;
}

namespace detail {

// Shortest-augmenting-path rectangular assignment (Jonker-Volgenant style).
// The candidate list is filled in reverse so that cost ties resolve to the
// smallest column index.
std::vector<int> solve_assignment(const CostMatrix& cost) {
  const int nr = cost.rows();
  const int nc = cost.cols();
  if (nr > nc) raise(Errc::ShapeMismatch, "assignment solver requires rows <= cols");

  std::vector<double> u(nr, 0.0), v(nc, 0.0), shortest(nc);
  std::vector<int> path(nc, -1), col4row(nr, -1), row4col(nc, -1), remaining(nc);
  std::vector<char> visited_row(nr), visited_col(nc);

  for (int cur_row = 0; cur_row < nr; ++cur_row) {
    std::fill(visited_row.begin(), visited_row.end(), 0);
    std::fill(visited_col.begin(), visited_col.end(), 0);
    std::fill(shortest.begin(), shortest.end(), kInf);
    for (int it = 0; it < nc; ++it) remaining[it] = nc - it - 1;
    int num_remaining = nc;

    double min_val = 0.0;
    int i = cur_row;
    int sink = -1;
    while (sink == -1) {
      visited_row[i] = 1;
      int index = -1;
      double lowest = kInf;
      for (int it = 0; it < num_remaining; ++it) {
        const int j = remaining[it];
        const double reduced = min_val + cost.at(i, j) - u[i] - v[j];
        if (reduced < shortest[j]) {
          path[j] = i;
          shortest[j] = reduced;
        }
        if (shortest[j] < lowest || (shortest[j] == lowest && row4col[j] == -1)) {
          lowest = shortest[j];
          index = it;
        }
      }
      min_val = lowest;
      if (!(min_val < kInf)) raise(Errc::ValidationError, "assignment instance is infeasible");
      const int j = remaining[index];
      if (row4col[j] == -1) sink = j;
      else i = row4col[j];
      visited_col[j] = 1;
      remaining[index] = remaining[--num_remaining];
    }

    u[cur_row] += min_val;
    for (int k = 0; k < nr; ++k)
      if (visited_row[k] && k != cur_row) u[k] += min_val - shortest[col4row[k]];
    for (int j = 0; j < nc; ++j)
      if (visited_col[j]) v[j] -= min_val - shortest[j];

    int j = sink;
    for (;;) {
      const int k = path[j];
      row4col[j] = k;
      std::swap(col4row[k], j);
      if (k == cur_row) break;
    }
  }
  return col4row;
}

// Transportation simplex with Bland's rule (first eligible entering cell in
// row-major order, lexicographically smallest leaving cell), which rules out
// cycling on the heavily degenerate uniform instances.
TransportPlan solve_balanced_simplex(const CostMatrix& cost, const std::vector<double>& left,
                                     const std::vector<double>& right,
                                     std::pair<std::vector<double>, std::vector<double>>* duals) {
  const int n = cost.rows();
  const int m = cost.cols();
  if (static_cast<int>(left.size()) != n || static_cast<int>(right.size()) != m)
    raise(Errc::ShapeMismatch, "marginal sizes do not match the cost matrix");

  double sum_left = 0.0, sum_right = 0.0;
  for (double v : left) sum_left += v;
  for (double v : right) sum_right += v;
  if (std::abs(sum_left - sum_right) > kMarginalTol)
    raise(Errc::InfeasibleMarginals, "left and right marginals carry different total mass");

  const auto cell = [m](int i, int j) { return static_cast<std::size_t>(i) * m + j; };
  std::vector<char> basic(static_cast<std::size_t>(n) * m, 0);
  std::vector<double> flow(static_cast<std::size_t>(n) * m, 0.0);

  // Northwest-corner staircase: exactly n + m - 1 basic cells.
  {
    std::vector<double> ra = left, rb = right;
    int i = 0, j = 0;
    for (;;) {
      basic[cell(i, j)] = 1;
      const double f = std::max(0.0, std::min(ra[i], rb[j]));
      flow[cell(i, j)] = f;
      ra[i] -= f;
      rb[j] -= f;
      if (i == n - 1 && j == m - 1) break;
      if (j == m - 1) ++i;
      else if (i == n - 1) ++j;
      else if (ra[i] <= rb[j]) ++i;
      else ++j;
    }
  }

  // Node indexing for the basis tree: rows 0..n-1, columns n..n+m-1.
  const int nodes = n + m;
  std::vector<double> u(n), v(m);
  std::vector<int> parent(nodes), parent_row(nodes), parent_col(nodes);
  std::vector<int> order;
  order.reserve(nodes);

  double scale = 1.0;
  for (double c : cost.values()) scale = std::max(scale, std::abs(c));
  const double enter_tol = 1e-12 * scale;

  const long max_iterations = 1000L * nodes * nodes + 100000L;
  for (long iteration = 0;; ++iteration) {
    if (iteration > max_iterations)
      raise(Errc::ValidationError, "transportation simplex exceeded its iteration budget");

    // Build adjacency of the current basis and traverse the tree for duals.
    std::vector<std::vector<std::pair<int, int>>> adj(nodes);  // (neighbor node, paired cell owner)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        if (basic[cell(i, j)]) {
          adj[i].push_back({n + j, j});
          adj[n + j].push_back({i, i});
        }

    order.clear();
    std::fill(parent.begin(), parent.end(), -2);
    parent[0] = -1;
    order.push_back(0);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const int node = order[head];
      for (const auto& [next, _] : adj[node]) {
        if (parent[next] == -2) {
          parent[next] = node;
          order.push_back(next);
        }
      }
    }
    if (static_cast<int>(order.size()) != nodes)
      raise(Errc::ValidationError, "transportation simplex basis lost connectivity");

    u[0] = 0.0;
    for (std::size_t k = 1; k < order.size(); ++k) {
      const int node = order[k];
      const int par = parent[node];
      if (node >= n) {
        v[node - n] = cost.at(par, node - n) - u[par];
      } else {
        u[node] = cost.at(node, par - n) - v[par - n];
      }
    }

    // Bland entering rule: first negative reduced cost in row-major order.
    int enter_i = -1, enter_j = -1;
    for (int i = 0; i < n && enter_i == -1; ++i)
      for (int j = 0; j < m; ++j)
        if (!basic[cell(i, j)] && cost.at(i, j) - u[i] - v[j] < -enter_tol) {
          enter_i = i;
          enter_j = j;
          break;
        }
    if (enter_i == -1) break;  // optimal

    // Tree path from the entering row node to the entering column node.
    std::vector<int> bfs_parent(nodes, -2);
    std::queue<int> queue;
    bfs_parent[enter_i] = -1;
    queue.push(enter_i);
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop();
      if (node == n + enter_j) break;
      for (const auto& [next, _] : adj[node])
        if (bfs_parent[next] == -2) {
          bfs_parent[next] = node;
          queue.push(next);
        }
    }

    std::vector<int> node_path;
    for (int node = n + enter_j; node != -1; node = bfs_parent[node]) node_path.push_back(node);
    std::reverse(node_path.begin(), node_path.end());  // enter_i ... n + enter_j

    // Walking the path from the entering row, cells alternate -, +, -, ...
    std::vector<std::pair<int, int>> minus_cells, plus_cells;
    for (std::size_t k = 0; k + 1 < node_path.size(); ++k) {
      const int a = node_path[k];
      const int b = node_path[k + 1];
      const int i = a < n ? a : b;
      const int j = (a < n ? b : a) - n;
      if (k % 2 == 0) minus_cells.push_back({i, j});
      else plus_cells.push_back({i, j});
    }

    double theta = kInf;
    std::pair<int, int> leaving{-1, -1};
    for (const auto& [i, j] : minus_cells) {
      const double f = flow[cell(i, j)];
      if (f < theta || (f == theta && std::make_pair(i, j) < leaving)) {
        theta = f;
        leaving = {i, j};
      }
    }

    for (const auto& [i, j] : minus_cells) flow[cell(i, j)] = std::max(0.0, flow[cell(i, j)] - theta);
    for (const auto& [i, j] : plus_cells) flow[cell(i, j)] += theta;
    flow[cell(enter_i, enter_j)] = theta;
    basic[cell(enter_i, enter_j)] = 1;
    basic[cell(leaving.first, leaving.second)] = 0;
    flow[cell(leaving.first, leaving.second)] = 0.0;
  }

  if (duals) *duals = {u, v};

  std::vector<PlanEntry> entries;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (basic[cell(i, j)] && flow[cell(i, j)] > 0.0)
        entries.push_back({i, j, flow[cell(i, j)]});
  return finalize_plan(n, m, std::move(entries), cost);
}

}  // namespace detail

TransportPlan solve_ot(const CostMatrix& cost, const MarginalWeights& weights) {
  const int n = cost.rows();
  const int m = cost.cols();
  if (static_cast<int>(weights.left().size()) != n || static_cast<int>(weights.right().size()) != m)
    raise(Errc::ShapeMismatch, "marginal sizes do not match the cost matrix");

  double sum_left = 0.0, sum_right = 0.0;
  for (double v : weights.left()) sum_left += v;
  for (double v : weights.right()) sum_right += v;
  if (std::abs(sum_left - sum_right) > kMarginalTol)
    raise(Errc::InfeasibleMarginals, "marginals must carry equal total mass for balanced transport");

  // Uniform square instances are plain assignment problems; everything else
  // goes through the simplex.  Both engines are exact and agree on the
  // objective (asserted in the test suite).
  if (n == m && is_uniform(weights.left()) && is_uniform(weights.right())) {
    const std::vector<int> cols = detail::solve_assignment(cost);
    std::vector<PlanEntry> entries;
    entries.reserve(n);
    const double mass = sum_left / n;
    for (int i = 0; i < n; ++i) entries.push_back({i, cols[i], mass});
    return finalize_plan(n, m, std::move(entries), cost);
  }
  return detail::solve_balanced_simplex(cost, weights.left(), weights.right());
}

double default_partial_mass(int n, int m) {
  return static_cast<double>(std::min(n, m)) / static_cast<double>(std::max(n, m));
}

TransportPlan solve_pot(const CostMatrix& cost, double mass) {
  const int n = cost.rows();
  const int m = cost.cols();
  const double default_mass = default_partial_mass(n, m);
  if (!(mass > 0.0)) raise(Errc::InfeasibleMass, "transported mass must be positive");
  if (mass > default_mass + kMassTol)
    raise(Errc::InfeasibleMass, "transported mass exceeds min(N,M)/max(N,M)");

  if (std::abs(mass - default_mass) <= kMassTol) {
    // Default mass: a partial permutation covering the smaller side, each
    // pair carrying 1/max(N,M); exactly a rectangular assignment.
    const double pair_mass = 1.0 / static_cast<double>(std::max(n, m));
    std::vector<PlanEntry> entries;
    if (n <= m) {
      const std::vector<int> cols = detail::solve_assignment(cost);
      for (int i = 0; i < n; ++i) entries.push_back({i, cols[i], pair_mass});
    } else {
      const std::vector<int> rows = detail::solve_assignment(transpose(cost));
      for (int j = 0; j < m; ++j) entries.push_back({rows[j], j, pair_mass});
    }
    return finalize_plan(n, m, std::move(entries), cost);
  }

  // General mass below the default: dummy-node reduction to a balanced
  // problem.  The dummy row and column absorb the untransported capacity;
  // the corner cell is priced high enough that no mass leaks through it.
  const double corner = 2.0 * std::abs(cost.max_value()) + 1.0;
  const int en = n + 1;
  const int em = m + 1;
  std::vector<double> values(static_cast<std::size_t>(en) * em, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) values[static_cast<std::size_t>(i) * em + j] = cost.at(i, j);
  values[static_cast<std::size_t>(n) * em + m] = corner;
  const CostMatrix extended = CostMatrix::from(en, em, std::move(values));

  std::vector<double> left(en, 1.0 / n), right(em, 1.0 / m);
  left[n] = 1.0 - mass;
  right[m] = 1.0 - mass;

  const TransportPlan extended_plan = detail::solve_balanced_simplex(extended, left, right);
  std::vector<PlanEntry> entries;
  for (const PlanEntry& e : extended_plan.entries)
    if (e.i < n && e.j < m) entries.push_back(e);
  return finalize_plan(n, m, std::move(entries), cost);
}

Matching naive_match(const CostMatrix& cost) {
  const int n = cost.rows();
  const int m = cost.cols();
  const int steps = std::min(n, m);
  std::vector<char> row_alive(n, 1), col_alive(m, 1);

  Matching matching;
  matching.source = MatchSource::Naive;
  matching.pairs.reserve(steps);
  for (int step = 0; step < steps; ++step) {
    double best = kInf;
    int bi = -1, bj = -1;
    for (int i = 0; i < n; ++i) {
      if (!row_alive[i]) continue;
      for (int j = 0; j < m; ++j) {
        if (!col_alive[j]) continue;
        if (cost.at(i, j) < best) {  // strict: first occurrence wins ties
          best = cost.at(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    matching.pairs.push_back({bi, bj});
    row_alive[bi] = 0;
    col_alive[bj] = 0;
  }
  return matching;
}

Matching binarize(const TransportPlan& plan, MatchSource source) {
  std::vector<double> row_mass(plan.rows, 0.0), best_mass(plan.rows, -1.0);
  std::vector<int> best_col(plan.rows, -1);

  std::vector<PlanEntry> entries = plan.entries;
  sort_entries(entries);
  for (const PlanEntry& e : entries) {
    row_mass[e.i] += e.mass;
    if (e.mass > best_mass[e.i]) {  // strict: smallest column wins ties
      best_mass[e.i] = e.mass;
      best_col[e.i] = e.j;
    }
  }

  // Keep rows whose argmax holds at least half of the row's mass, then
  // enforce column injectivity, keeping the largest mass per column
  // (smallest row index on ties).
  std::vector<double> col_best(plan.cols, -1.0);
  std::vector<int> col_winner(plan.cols, -1);
  for (int i = 0; i < plan.rows; ++i) {
    if (best_col[i] < 0 || row_mass[i] <= 0.0) continue;
    if (best_mass[i] < 0.5 * row_mass[i]) continue;
    const int j = best_col[i];
    if (best_mass[i] > col_best[j]) {
      col_best[j] = best_mass[i];
      col_winner[j] = i;
    }
  }

  Matching matching;
  matching.source = source;
  for (int i = 0; i < plan.rows; ++i) {
    const int j = best_col[i];
    if (j >= 0 && col_winner[j] == i) matching.pairs.push_back({i, j});
  }
  return matching;
}

double plan_objective(const CostMatrix& cost, const TransportPlan& plan) {
  if (plan.rows != cost.rows() || plan.cols != cost.cols())
    raise(Errc::ShapeMismatch, "plan shape does not match the cost matrix");
  double objective = 0.0;
  for (const PlanEntry& e : plan.entries) {
    if (e.i < 0 || e.i >= plan.rows || e.j < 0 || e.j >= plan.cols)
      raise(Errc::ValidationError, "plan entry indices out of range");
    objective += e.mass * cost.at(e.i, e.j);
  }
  return objective;
}

}  // namespace otm
