#pragma once

// Transportation simplex on the complete bipartite graph rows x cols.
//
// A basis is a spanning tree of m + n - 1 cells. Potentials u, v satisfy
// u_i + v_j = c_ij on tree cells; a non-tree cell with negative reduced cost
// c_ij - u_i - v_j enters, the tree path between its endpoints closes a cycle,
// and the cycle is pushed until a decreasing tree cell reaches zero.
// Dantzig pricing is used until a run of degenerate pivots is seen, after
// which the solver falls back to Bland's smallest-index rule, which cannot
// cycle.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "wasserdoc/errors.hpp"

namespace wasserdoc::ot::detail {

template <typename Scalar>
class TransportationSimplex {
 public:
  TransportationSimplex(const Vector<Scalar>& supply, const Vector<Scalar>& demand,
                        const Matrix<Scalar>& cost)
      : m_(supply.size()), n_(demand.size()), cost_(cost) {
    supply_ = supply;
    // Close any rounding-level gap in total mass so the polytope is non-empty.
    demand_ = demand * (supply.sum() / demand.sum());
    scale_ = std::max(Scalar(1), cost.cwiseAbs().maxCoeff());
    in_basis_.assign(static_cast<std::size_t>(m_ * n_), -1);
  }

  Matrix<Scalar> solve(int* iteration_count) {
    northwest_corner();
    const Scalar eps = Scalar(1e-12) * scale_;
    const long max_pivots = 64L * m_ * n_ + 1000;
    const long degenerate_limit = m_ + n_;
    long degenerate_run = 0;
    bool bland = false;
    int pivots = 0;

    for (;;) {
      compute_potentials();
      const Index entering = price(eps, bland);
      if (entering < 0) break;
      if (pivots >= max_pivots) throw NumericalError("network simplex exceeded its pivot limit");
      const bool degenerate = pivot(entering, bland);
      ++pivots;
      degenerate_run = degenerate ? degenerate_run + 1 : 0;
      if (degenerate_run > degenerate_limit) bland = true;
    }
    if (iteration_count) *iteration_count = pivots;

    Matrix<Scalar> plan = Matrix<Scalar>::Zero(m_, n_);
    for (std::size_t b = 0; b < cells_.size(); ++b) {
      plan(row_of(cells_[b]), col_of(cells_[b])) = flow_[b];
    }
    return plan;
  }

 private:
  using Index = std::int64_t;

  Index cell(Index i, Index j) const { return i * n_ + j; }
  Index row_of(Index c) const { return c / n_; }
  Index col_of(Index c) const { return c % n_; }

  void add_basic(Index c, Scalar flow) {
    in_basis_[static_cast<std::size_t>(c)] = static_cast<Index>(cells_.size());
    cells_.push_back(c);
    flow_.push_back(flow);
  }

  // Staircase from (0, 0) to (m-1, n-1): exactly m + n - 1 cells, so the
  // initial basis is a spanning tree even when it is degenerate.
  void northwest_corner() {
    Vector<Scalar> s = supply_;
    Vector<Scalar> d = demand_;
    Index i = 0, j = 0;
    while (i < m_ && j < n_) {
      if (i == m_ - 1 && j == n_ - 1) {
        add_basic(cell(i, j), std::max(Scalar(0), std::min(s[i], d[j])));
        break;
      }
      const Scalar amount = std::min(s[i], d[j]);
      add_basic(cell(i, j), amount);
      if ((s[i] <= d[j] && i < m_ - 1) || j == n_ - 1) {
        d[j] -= amount;
        s[i] = Scalar(0);
        ++i;
      } else {
        s[i] -= amount;
        d[j] = Scalar(0);
        ++j;
      }
    }
  }

  // Nodes 0..m-1 are rows, m..m+n-1 are columns.
  void build_adjacency() {
    adjacency_.assign(static_cast<std::size_t>(m_ + n_), {});
    for (std::size_t b = 0; b < cells_.size(); ++b) {
      const Index r = row_of(cells_[b]);
      const Index c = m_ + col_of(cells_[b]);
      adjacency_[static_cast<std::size_t>(r)].push_back(static_cast<Index>(b));
      adjacency_[static_cast<std::size_t>(c)].push_back(static_cast<Index>(b));
    }
  }

  Index other_end(Index basic, Index node) const {
    const Index r = row_of(cells_[static_cast<std::size_t>(basic)]);
    return node == r ? m_ + col_of(cells_[static_cast<std::size_t>(basic)]) : r;
  }

  void compute_potentials() {
    build_adjacency();
    u_.assign(static_cast<std::size_t>(m_), Scalar(0));
    v_.assign(static_cast<std::size_t>(n_), Scalar(0));
    std::vector<char> seen(static_cast<std::size_t>(m_ + n_), 0);
    std::vector<Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const Index node = stack.back();
      stack.pop_back();
      for (Index b : adjacency_[static_cast<std::size_t>(node)]) {
        const Index next = other_end(b, node);
        if (seen[static_cast<std::size_t>(next)]) continue;
        seen[static_cast<std::size_t>(next)] = 1;
        const Index c = cells_[static_cast<std::size_t>(b)];
        const Scalar c_ij = cost_(row_of(c), col_of(c));
        if (next >= m_) {
          v_[static_cast<std::size_t>(next - m_)] = c_ij - u_[static_cast<std::size_t>(node)];
        } else {
          u_[static_cast<std::size_t>(next)] = c_ij - v_[static_cast<std::size_t>(node - m_)];
        }
        stack.push_back(next);
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw ContractError("network simplex basis is not a spanning tree");
  }

  Index price(Scalar eps, bool bland) const {
    Index best = -1;
    Scalar best_rc = -eps;
    for (Index i = 0; i < m_; ++i) {
      for (Index j = 0; j < n_; ++j) {
        const Index c = cell(i, j);
        if (in_basis_[static_cast<std::size_t>(c)] >= 0) continue;
        const Scalar rc = cost_(i, j) - u_[static_cast<std::size_t>(i)] -
                          v_[static_cast<std::size_t>(j)];
        if (rc < best_rc) {
          if (bland) return c;
          best_rc = rc;
          best = c;
        }
      }
    }
    return best;
  }

  // Returns true when the pivot moved zero mass.
  bool pivot(Index entering, bool bland) {
    const Index row_node = row_of(entering);
    const Index col_node = m_ + col_of(entering);

    // Tree path from the entering column back to the entering row.
    std::vector<Index> parent_edge(static_cast<std::size_t>(m_ + n_), -1);
    std::vector<Index> parent_node(static_cast<std::size_t>(m_ + n_), -1);
    std::vector<char> seen(static_cast<std::size_t>(m_ + n_), 0);
    std::vector<Index> stack{col_node};
    seen[static_cast<std::size_t>(col_node)] = 1;
    while (!stack.empty()) {
      const Index node = stack.back();
      stack.pop_back();
      if (node == row_node) break;
      for (Index b : adjacency_[static_cast<std::size_t>(node)]) {
        const Index next = other_end(b, node);
        if (seen[static_cast<std::size_t>(next)]) continue;
        seen[static_cast<std::size_t>(next)] = 1;
        parent_edge[static_cast<std::size_t>(next)] = b;
        parent_node[static_cast<std::size_t>(next)] = node;
        stack.push_back(next);
      }
    }
    std::vector<Index> path;  // edges ordered from the entering column outward
    for (Index node = row_node; node != col_node; node = parent_node[static_cast<std::size_t>(node)])
      path.push_back(parent_edge[static_cast<std::size_t>(node)]);
    if (path.empty()) throw ContractError("entering cell has no tree path");
    std::reverse(path.begin(), path.end());

    // Along the path from the column side, edges alternate -theta, +theta.
    Index leaving = -1;
    Scalar theta = std::numeric_limits<Scalar>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const Index b = path[k];
      const Scalar f = flow_[static_cast<std::size_t>(b)];
      const bool better = f < theta || (f == theta && bland &&
                                        cells_[static_cast<std::size_t>(b)] <
                                            cells_[static_cast<std::size_t>(leaving)]);
      if (better) {
        theta = f;
        leaving = b;
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      auto& f = flow_[static_cast<std::size_t>(path[k])];
      f = (k % 2 == 0) ? f - theta : f + theta;
    }
    flow_[static_cast<std::size_t>(leaving)] = Scalar(0);

    in_basis_[static_cast<std::size_t>(cells_[static_cast<std::size_t>(leaving)])] = -1;
    cells_[static_cast<std::size_t>(leaving)] = entering;
    flow_[static_cast<std::size_t>(leaving)] = theta;
    in_basis_[static_cast<std::size_t>(entering)] = leaving;
    return theta == Scalar(0);
  }

  Index m_;
  Index n_;
  const Matrix<Scalar>& cost_;
  Vector<Scalar> supply_;
  Vector<Scalar> demand_;
  Scalar scale_;
  std::vector<Index> cells_;
  std::vector<Scalar> flow_;
  std::vector<Index> in_basis_;
  std::vector<std::vector<Index>> adjacency_;
  std::vector<Scalar> u_;
  std::vector<Scalar> v_;
};

// Two-row problem: the plan is fixed by x_j = P(0, j) with 0 <= x_j <= q_j and
// sum x_j = p_0, and the objective is linear in x with slope c_0j - c_1j. The
// optimum fills x greedily in slope order, which is a polytope vertex.
template <typename Scalar>
Matrix<Scalar> solve_two_rows(const Vector<Scalar>& p, const Vector<Scalar>& q,
                              const Matrix<Scalar>& cost) {
  const Eigen::Index n = q.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return cost(0, a) - cost(1, a) < cost(0, b) - cost(1, b);
  });
  Matrix<Scalar> plan(2, n);
  Scalar remaining = p[0];
  for (Eigen::Index j : order) {
    const Scalar x = std::clamp(remaining, Scalar(0), q[j]);
    plan(0, j) = x;
    plan(1, j) = q[j] - x;
    remaining -= x;
  }
  return plan;
}

template <typename Scalar>
Matrix<Scalar> solve_exact(const Vector<Scalar>& p, const Vector<Scalar>& q,
                           const Matrix<Scalar>& cost, int* iterations) {
  if (iterations) *iterations = 0;
  if (p.size() == 1 || q.size() == 1) return p * q.transpose();
  if (p.size() == 2) return solve_two_rows<Scalar>(p, q, cost);
  if (q.size() == 2) {
    const Matrix<Scalar> ct = cost.transpose();
    return solve_two_rows<Scalar>(q, p, ct).transpose();
  }
  TransportationSimplex<Scalar> simplex(p, q, cost);
  return simplex.solve(iterations);
}

}  // namespace wasserdoc::ot::detail
