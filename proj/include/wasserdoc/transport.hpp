#pragma once

// Discrete optimal transport between two weighted point sets.
//
// Everything here is templated on the scalar type and works on dense Eigen
// storage. exact_plan() solves the linear program min <A, P> over the
// transportation polytope; sinkhorn_plan() solves its entropy-regularized
// counterpart by alternating matrix scaling of the kernel exp(-lambda * A).

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>

#include "wasserdoc/errors.hpp"

namespace wasserdoc::ot {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Tolerance on the total mass of a Distribution.
inline constexpr double kMassTolerance = 1e-9;

/// Feasibility bound guaranteed by exact_plan().
inline constexpr double kExactFeasibilityTolerance = 1e-9;

/// A probability vector: nonnegative weights summing to one.
template <typename Scalar = double>
class Distribution {
 public:
  template <typename Derived>
  explicit Distribution(const Eigen::MatrixBase<Derived>& weights) : weights_(weights) {
    validate();
  }
  explicit Distribution(Vector<Scalar> weights) : weights_(std::move(weights)) { validate(); }

  /// Uniform distribution over n atoms.
  static Distribution uniform(Eigen::Index n) {
    if (n < 1) throw InputError("uniform distribution needs at least one atom");
    return Distribution(Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n)));
  }

  const Vector<Scalar>& weights() const noexcept { return weights_; }
  Eigen::Index size() const noexcept { return weights_.size(); }
  Scalar operator[](Eigen::Index i) const { return weights_[i]; }

 private:
  void validate() const {
    if (weights_.size() < 1) throw InputError("distribution must have at least one atom");
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      if (!std::isfinite(static_cast<double>(weights_[i])) || weights_[i] < Scalar(0)) {
        std::ostringstream os;
        os << "distribution weight " << i << " is negative or non-finite (" << weights_[i] << ")";
        throw InputError(os.str());
      }
    }
    const double total = static_cast<double>(weights_.sum());
    if (std::abs(total - 1.0) > kMassTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "distribution weights sum to " << total << ", expected 1";
      throw InputError(os.str());
    }
  }

  Vector<Scalar> weights_;
};

/// Nonnegative, finite ground-cost matrix; rows index source atoms.
template <typename Scalar = double>
class CostMatrix {
 public:
  template <typename Derived>
  explicit CostMatrix(const Eigen::MatrixBase<Derived>& entries) : entries_(entries) {
    validate();
  }
  explicit CostMatrix(Matrix<Scalar> entries) : entries_(std::move(entries)) { validate(); }

  const Matrix<Scalar>& entries() const noexcept { return entries_; }
  Eigen::Index rows() const noexcept { return entries_.rows(); }
  Eigen::Index cols() const noexcept { return entries_.cols(); }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

  CostMatrix transposed() const { return CostMatrix(Matrix<Scalar>(entries_.transpose())); }

 private:
  void validate() const {
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
        const Scalar c = entries_(i, j);
        if (!std::isfinite(static_cast<double>(c))) {
          std::ostringstream os;
          os << "cost entry (" << i << ", " << j << ") is not finite";
          throw InputError(os.str());
        }
        if (c < Scalar(0)) {
          std::ostringstream os;
          os << "cost entry (" << i << ", " << j << ") is negative (" << c << ")";
          throw InputError(os.str());
        }
      }
    }
  }

  Matrix<Scalar> entries_;
};

/// A coupling between two distributions plus its feasibility certificate.
template <typename Scalar = double>
struct TransportPlan {
  Matrix<Scalar> coupling;
  /// <A, coupling>, the transport cost. Never includes the entropy term.
  Scalar objective = Scalar(0);
  /// Largest absolute deviation of a row or column sum from its marginal.
  Scalar marginal_error = Scalar(0);
  bool converged = true;
  int iterations = 0;
  /// Set when the Sinkhorn solve ran in the log domain.
  bool log_domain = false;
};

enum class ScalingDomain { automatic, plain, log };

template <typename Scalar = double>
struct SinkhornConfig {
  /// Kernel is exp(-lambda * A); the entropy weight is 1 / lambda.
  Scalar lambda = Scalar(0.01);
  int max_iterations = 1000;
  /// Stop once the max marginal violation drops to this value.
  Scalar convergence_tolerance = Scalar(1e-6);
  ScalingDomain domain = ScalingDomain::automatic;

  void validate() const {
    if (!(lambda > Scalar(0)) || !std::isfinite(static_cast<double>(lambda)))
      throw InputError("sinkhorn lambda must be positive and finite");
    if (max_iterations < 1) throw InputError("sinkhorn max_iterations must be at least 1");
    if (!(convergence_tolerance > Scalar(0)))
      throw InputError("sinkhorn convergence_tolerance must be positive");
  }
};

template <typename Scalar>
void check_shapes(const Distribution<Scalar>& source, const Distribution<Scalar>& target,
                  const CostMatrix<Scalar>& cost) {
  if (cost.rows() != source.size() || cost.cols() != target.size()) {
    std::ostringstream os;
    os << "cost matrix is " << cost.rows() << "x" << cost.cols() << " but distributions have "
       << source.size() << " and " << target.size() << " atoms";
    throw DimensionError(os.str());
  }
}

/// Frobenius product <A, P>.
template <typename DerivedP, typename DerivedA>
typename DerivedP::Scalar transport_cost(const Eigen::MatrixBase<DerivedP>& coupling,
                                         const Eigen::MatrixBase<DerivedA>& cost) {
  if (coupling.rows() != cost.rows() || coupling.cols() != cost.cols()) {
    std::ostringstream os;
    os << "plan is " << coupling.rows() << "x" << coupling.cols() << " but cost is "
       << cost.rows() << "x" << cost.cols();
    throw DimensionError(os.str());
  }
  return (coupling.array() * cost.array()).sum();
}

template <typename Scalar>
Scalar transport_cost(const TransportPlan<Scalar>& plan, const CostMatrix<Scalar>& cost) {
  return transport_cost(plan.coupling, cost.entries());
}

/// -sum P log P with 0 log 0 = 0.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& coupling) {
  using Scalar = typename Derived::Scalar;
  Scalar h = Scalar(0);
  for (Eigen::Index j = 0; j < coupling.cols(); ++j) {
    for (Eigen::Index i = 0; i < coupling.rows(); ++i) {
      const Scalar p = coupling(i, j);
      if (p < Scalar(0)) throw InputError("entropy of a plan with a negative entry");
      if (p > Scalar(0)) h -= p * std::log(p);
    }
  }
  return h;
}

template <typename Scalar>
Scalar entropy(const TransportPlan<Scalar>& plan) {
  return entropy(plan.coupling);
}

template <typename DerivedP, typename DerivedS, typename DerivedT>
typename DerivedP::Scalar marginal_error(const Eigen::MatrixBase<DerivedP>& coupling,
                                         const Eigen::MatrixBase<DerivedS>& source,
                                         const Eigen::MatrixBase<DerivedT>& target) {
  const auto row_dev = (coupling.rowwise().sum() - source).cwiseAbs().maxCoeff();
  const auto col_dev = (coupling.colwise().sum().transpose() - target).cwiseAbs().maxCoeff();
  return std::max(row_dev, col_dev);
}

}  // namespace wasserdoc::ot

#include "wasserdoc/detail/network_simplex.hpp"
#include "wasserdoc/detail/sinkhorn.hpp"

namespace wasserdoc::ot {

/// Optimal coupling of min <A, P> over the transportation polytope.
///
/// Single-atom marginals and problems with two rows (or columns) are solved
/// directly; everything else goes through a transportation network simplex.
/// The returned plan is a vertex of the polytope with marginal_error <= 1e-9.
template <typename Scalar>
TransportPlan<Scalar> exact_plan(const Distribution<Scalar>& source,
                                 const Distribution<Scalar>& target,
                                 const CostMatrix<Scalar>& cost) {
  check_shapes(source, target, cost);
  TransportPlan<Scalar> plan;
  plan.coupling = detail::solve_exact(source.weights(), target.weights(), cost.entries(),
                                      &plan.iterations);
  plan.objective = transport_cost(plan.coupling, cost.entries());
  plan.marginal_error = marginal_error(plan.coupling, source.weights(), target.weights());
  plan.converged = true;
  if (plan.marginal_error > Scalar(kExactFeasibilityTolerance)) {
    std::ostringstream os;
    os << "exact solver lost feasibility (marginal error " << plan.marginal_error << ")";
    throw NumericalError(os.str());
  }
  return plan;
}

/// Exact Wasserstein distance: the optimal objective of exact_plan().
template <typename Scalar>
Scalar wasserstein_distance(const Distribution<Scalar>& source,
                            const Distribution<Scalar>& target,
                            const CostMatrix<Scalar>& cost) {
  return std::max(Scalar(0), exact_plan(source, target, cost).objective);
}

/// Entropy-regularized plan diag(u) exp(-lambda A) diag(v).
///
/// Runs in the plain domain unless the kernel underflows, in which case the
/// automatic domain switches to a log-domain solve and the plain domain throws
/// NumericalError. A run that hits max_iterations comes back with
/// converged == false and the achieved marginal_error.
template <typename Scalar>
TransportPlan<Scalar> sinkhorn_plan(const Distribution<Scalar>& source,
                                    const Distribution<Scalar>& target,
                                    const CostMatrix<Scalar>& cost,
                                    const SinkhornConfig<Scalar>& config = {}) {
  check_shapes(source, target, cost);
  config.validate();
  TransportPlan<Scalar> plan;
  if (source.size() == 1 || target.size() == 1) {
    plan.coupling = source.weights() * target.weights().transpose();
  } else {
    plan = detail::sinkhorn(source.weights(), target.weights(), cost.entries(), config);
  }
  plan.objective = transport_cost(plan.coupling, cost.entries());
  plan.marginal_error = marginal_error(plan.coupling, source.weights(), target.weights());
  return plan;
}

}  // namespace wasserdoc::ot
