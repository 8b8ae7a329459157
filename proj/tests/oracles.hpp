#pragma once

// Independent reference solvers for tiny transport problems. These enumerate
// the transportation polytope directly and share no code with the library's
// solvers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

// Minimum of <A, P> over all basic feasible solutions. Every subset of
// m + n - 1 cells that is a spanning tree of the bipartite graph determines a
// unique flow by peeling leaves; the feasible ones are exactly the vertices.
inline double vertex_enumeration(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                                 const Eigen::MatrixXd& cost,
                                 Eigen::MatrixXd* best_plan = nullptr) {
  const int m = static_cast<int>(p.size());
  const int n = static_cast<int>(q.size());
  const int cells = m * n;
  const int k = m + n - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> choose(cells, 0);
  std::fill(choose.begin(), choose.begin() + k, 1);
  std::sort(choose.begin(), choose.end());
  do {
    std::vector<int> edges;
    for (int c = 0; c < cells; ++c)
      if (choose[c]) edges.push_back(c);
    // leaf peeling on nodes: rows 0..m-1, cols m..m+n-1
    std::vector<double> residual(m + n);
    for (int i = 0; i < m; ++i) residual[i] = p[i];
    for (int j = 0; j < n; ++j) residual[m + j] = q[j];
    std::vector<int> alive(edges.size(), 1);
    std::vector<double> flow(edges.size(), 0.0);
    bool ok = true;
    for (int round = 0; round < k && ok; ++round) {
      std::vector<int> degree(m + n, 0);
      for (size_t e = 0; e < edges.size(); ++e)
        if (alive[e]) {
          ++degree[edges[e] / n];
          ++degree[m + edges[e] % n];
        }
      int leaf_edge = -1, leaf_node = -1;
      for (size_t e = 0; e < edges.size() && leaf_edge < 0; ++e) {
        if (!alive[e]) continue;
        const int r = edges[e] / n, c = m + edges[e] % n;
        if (degree[r] == 1) { leaf_edge = static_cast<int>(e); leaf_node = r; }
        else if (degree[c] == 1) { leaf_edge = static_cast<int>(e); leaf_node = c; }
      }
      if (leaf_edge < 0) { ok = false; break; }  // contains a cycle
      const int r = edges[leaf_edge] / n, c = m + edges[leaf_edge] % n;
      const int other = leaf_node == r ? c : r;
      flow[leaf_edge] = residual[leaf_node];
      residual[other] -= residual[leaf_node];
      residual[leaf_node] = 0.0;
      alive[leaf_edge] = 0;
    }
    if (!ok) continue;
    if (*std::min_element(flow.begin(), flow.end()) < -1e-12) continue;
    if (std::abs(*std::max_element(residual.begin(), residual.end(),
                                   [](double a, double b) { return std::abs(a) < std::abs(b); })) >
        1e-9)
      continue;
    double value = 0.0;
    Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(m, n);
    for (size_t e = 0; e < edges.size(); ++e) {
      value += flow[e] * cost(edges[e] / n, edges[e] % n);
      plan(edges[e] / n, edges[e] % n) = flow[e];
    }
    if (value < best) {
      best = value;
      if (best_plan) *best_plan = plan;
    }
  } while (std::next_permutation(choose.begin(), choose.end()));
  return best;
}

// Grid search over the free parameter(s) of a 2 x 2 or 2 x 3 polytope, with
// the interval endpoints always included.
inline std::vector<double> grid_axis(double lo, double hi, double step) {
  std::vector<double> xs;
  if (hi < lo) return xs;
  for (double x = lo; x < hi; x += step) xs.push_back(x);
  xs.push_back(hi);
  return xs;
}

inline double grid_search(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                          const Eigen::MatrixXd& cost, double step) {
  double best = std::numeric_limits<double>::infinity();
  if (p.size() == 2 && q.size() == 2) {
    for (double t : grid_axis(std::max(0.0, p[0] - q[1]), std::min(p[0], q[0]), step)) {
      const double v = t * cost(0, 0) + (p[0] - t) * cost(0, 1) + (q[0] - t) * cost(1, 0) +
                       (q[1] - p[0] + t) * cost(1, 1);
      best = std::min(best, v);
    }
    return best;
  }
  if (p.size() == 2 && q.size() == 3) {
    for (double a : grid_axis(0.0, std::min(p[0], q[0]), step)) {
      const double b_lo = std::max(0.0, p[0] - a - q[2]);
      const double b_hi = std::min(q[1], p[0] - a);
      for (double b : grid_axis(b_lo, b_hi, step)) {
        const double c = p[0] - a - b;
        const double r0 = q[0] - a, r1 = q[1] - b, r2 = q[2] - c;
        if (c < -1e-12 || r0 < -1e-12 || r1 < -1e-12 || r2 < -1e-12) continue;
        const double v = a * cost(0, 0) + b * cost(0, 1) + c * cost(0, 2) + r0 * cost(1, 0) +
                         r1 * cost(1, 1) + r2 * cost(1, 2);
        best = std::min(best, v);
      }
    }
    return best;
  }
  return best;
}

// Marginals k_i / denominator with every k_i >= 1.
inline Eigen::VectorXd rational_marginal(int n, int denominator, std::mt19937_64& rng) {
  std::vector<int> counts(n, 1);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int r = n; r < denominator; ++r) ++counts[pick(rng)];
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = static_cast<double>(counts[i]) / denominator;
  return w;
}

inline Eigen::VectorXd random_marginal(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = u(rng);
  return w / w.sum();
}

inline Eigen::MatrixXd random_cost(int m, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd c(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = u(rng);
  return c;
}

}  // namespace oracle
