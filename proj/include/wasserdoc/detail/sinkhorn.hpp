#pragma once

// Sinkhorn-Knopp scaling for the kernel K = exp(-lambda * A).
//
// Plain domain iterates u = p / (K v), v = q / (K^T u). The log domain keeps
// potentials f = log u, g = log v and replaces the matrix-vector products by
// log-sum-exp reductions over -lambda * A, which never underflows.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>

#include "wasserdoc/errors.hpp"

namespace wasserdoc::ot::detail {

/// Kernel entries below this are treated as underflowed.
inline constexpr double kKernelUnderflow = 1e-300;

// A whole row or column lost: the plain iteration cannot run at all.
template <typename Scalar>
bool kernel_line_underflows(const Matrix<Scalar>& kernel) {
  const Scalar floor = Scalar(kKernelUnderflow);
  return (kernel.rowwise().maxCoeff().array() < floor).any() ||
         (kernel.colwise().maxCoeff().array() < floor).any();
}

// Any single entry lost: the plain iteration runs but converges to a plan on
// the wrong support, so the automatic domain goes to log space.
template <typename Scalar>
bool kernel_entry_underflows(const Matrix<Scalar>& kernel) {
  return kernel.minCoeff() < Scalar(kKernelUnderflow);
}

// Returns std::nullopt when the plain iteration hits a non-finite scaling vector.
template <typename Scalar>
std::optional<TransportPlan<Scalar>> sinkhorn_plain(const Vector<Scalar>& p,
                                                    const Vector<Scalar>& q,
                                                    const Matrix<Scalar>& kernel,
                                                    const SinkhornConfig<Scalar>& config) {
  Vector<Scalar> u = Vector<Scalar>::Ones(p.size());
  Vector<Scalar> v = Vector<Scalar>::Ones(q.size());
  TransportPlan<Scalar> plan;
  plan.converged = false;
  Scalar error = std::numeric_limits<Scalar>::infinity();
  int it = 0;
  while (it < config.max_iterations) {
    ++it;
    u = p.cwiseQuotient(kernel * v);
    v = q.cwiseQuotient(kernel.transpose() * u);
    if (!u.allFinite() || !v.allFinite()) return std::nullopt;
    // Columns match exactly after the v update; only rows can be off.
    error = (u.cwiseProduct(kernel * v) - p).cwiseAbs().maxCoeff();
    if (!std::isfinite(static_cast<double>(error))) return std::nullopt;
    if (error <= config.convergence_tolerance) {
      plan.converged = true;
      break;
    }
  }
  plan.iterations = it;
  plan.coupling = u.asDiagonal() * kernel * v.asDiagonal();
  if (!plan.coupling.allFinite()) return std::nullopt;
  plan.marginal_error = error;
  return plan;
}

template <typename Scalar>
Scalar log_sum_exp(const Eigen::Ref<const Vector<Scalar>>& x) {
  const Scalar hi = x.maxCoeff();
  if (!std::isfinite(static_cast<double>(hi))) return hi;
  return hi + std::log((x.array() - hi).exp().sum());
}

template <typename Scalar>
TransportPlan<Scalar> sinkhorn_log(const Vector<Scalar>& p, const Vector<Scalar>& q,
                                   const Matrix<Scalar>& cost,
                                   const SinkhornConfig<Scalar>& config) {
  const Eigen::Index m = p.size();
  const Eigen::Index n = q.size();
  const Matrix<Scalar> log_kernel = -config.lambda * cost;
  const Vector<Scalar> log_p = p.array().log().matrix();
  const Vector<Scalar> log_q = q.array().log().matrix();
  Vector<Scalar> f = Vector<Scalar>::Zero(m);
  Vector<Scalar> g = Vector<Scalar>::Zero(n);
  Vector<Scalar> work_row(n);
  Vector<Scalar> work_col(m);

  auto update_f = [&] {
    for (Eigen::Index i = 0; i < m; ++i) {
      work_row = log_kernel.row(i).transpose() + g;
      f[i] = log_p[i] - log_sum_exp<Scalar>(work_row);
    }
  };
  auto update_g = [&] {
    for (Eigen::Index j = 0; j < n; ++j) {
      work_col = log_kernel.col(j) + f;
      g[j] = log_q[j] - log_sum_exp<Scalar>(work_col);
    }
  };
  // Zero-mass atoms carry -inf potentials; exp(-inf) = 0 keeps them empty.
  auto coupling = [&] {
    Matrix<Scalar> out(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
      out.col(j) = (log_kernel.col(j) + f).array().unaryExpr([&](Scalar x) {
        return std::exp(x + g[j]);
      });
    return out;
  };

  TransportPlan<Scalar> plan;
  plan.log_domain = true;
  plan.converged = false;
  Scalar error = std::numeric_limits<Scalar>::infinity();
  int it = 0;
  while (it < config.max_iterations) {
    ++it;
    update_f();
    update_g();
    Scalar row_error = Scalar(0);
    for (Eigen::Index i = 0; i < m; ++i) {
      work_row = log_kernel.row(i).transpose() + g;
      const Scalar mass = std::exp(f[i] + log_sum_exp<Scalar>(work_row));
      row_error = std::max(row_error, std::abs(mass - p[i]));
    }
    error = row_error;
    if (error <= config.convergence_tolerance) {
      plan.converged = true;
      break;
    }
  }
  plan.iterations = it;
  plan.coupling = coupling();
  plan.marginal_error = error;
  return plan;
}

template <typename Scalar>
TransportPlan<Scalar> sinkhorn(const Vector<Scalar>& p, const Vector<Scalar>& q,
                               const Matrix<Scalar>& cost, const SinkhornConfig<Scalar>& config) {
  if (config.domain == ScalingDomain::log) return sinkhorn_log(p, q, cost, config);

  const Matrix<Scalar> kernel = (-config.lambda * cost).array().exp().matrix();
  if (config.domain == ScalingDomain::plain && kernel_line_underflows(kernel)) {
    throw NumericalError(
        "sinkhorn kernel exp(-lambda * A) underflowed for a whole row or column; "
        "decrease lambda or use the log-domain solver");
  }
  if (config.domain == ScalingDomain::plain || !kernel_entry_underflows(kernel)) {
    if (auto plan = sinkhorn_plain(p, q, kernel, config)) return *std::move(plan);
    if (config.domain == ScalingDomain::plain) {
      throw NumericalError(
          "sinkhorn scaling vectors overflowed; decrease lambda or use the log-domain solver");
    }
  }
  return sinkhorn_log(p, q, cost, config);
}

}  // namespace wasserdoc::ot::detail
