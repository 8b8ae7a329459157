#include "doctest.h"
#include "oracles.hpp"

#include <wasserdoc/transport.hpp>

#include <cmath>
#include <random>

using namespace wasserdoc;
using namespace wasserdoc::ot;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Distribution<> dist(std::initializer_list<double> w) {
  VectorXd v(static_cast<Eigen::Index>(w.size()));
  Eigen::Index i = 0;
  for (double x : w) v[i++] = x;
  return Distribution<>(v);
}

CostMatrix<> costs(std::initializer_list<std::initializer_list<double>> rows) {
  MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (auto r : rows) {
    Eigen::Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return CostMatrix<>(m);
}

SinkhornConfig<> tight(double lambda) {
  SinkhornConfig<> c;
  c.lambda = lambda;
  c.convergence_tolerance = 1e-12;
  c.max_iterations = 200000;
  return c;
}

}  // namespace

TEST_CASE("distribution and cost validation") {
  CHECK_THROWS_AS(dist({0.5, 0.4}), InputError);
  CHECK_THROWS_AS(dist({1.5, -0.5}), InputError);
  CHECK_NOTHROW(dist({0.5, 0.5 + 5e-10}));
  MatrixXd bad(1, 1);
  bad << std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(CostMatrix<>{bad}, InputError);
  bad << -1.0;
  CHECK_THROWS_AS(CostMatrix<>{bad}, InputError);
}

TEST_CASE("exact_plan examples") {
  SUBCASE("single atom is forced") {
    auto plan = exact_plan(dist({1.0}), dist({1.0}), costs({{2.5}}));
    CHECK(plan.coupling(0, 0) == doctest::Approx(1.0));
    CHECK(plan.objective == doctest::Approx(2.5));
  }
  SUBCASE("zero-cost perfect matching") {
    auto plan = exact_plan(dist({0.5, 0.5}), dist({0.5, 0.5}), costs({{0, 1}, {1, 0}}));
    CHECK(plan.objective == doctest::Approx(0.0));
    CHECK(plan.coupling(0, 0) == doctest::Approx(0.5));
    CHECK(plan.coupling(1, 1) == doctest::Approx(0.5));
    CHECK(plan.coupling(0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("asymmetric 2x2 matches the grid oracle") {
    const auto a = costs({{1, 2}, {3, 1}});
    VectorXd half = VectorXd::Constant(2, 0.5);
    const double expected = oracle::grid_search(half, half, a.entries(), 1e-4);
    CHECK(expected == doctest::Approx(1.0).epsilon(1e-12));
    auto plan = exact_plan(dist({0.5, 0.5}), dist({0.5, 0.5}), a);
    CHECK(plan.objective == doctest::Approx(expected).epsilon(1e-12));
    CHECK(plan.coupling(0, 0) == doctest::Approx(0.5));
    CHECK(plan.coupling(0, 1) == doctest::Approx(0.0));
    CHECK(plan.marginal_error <= 1e-9);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(exact_plan(dist({0.5, 0.5}), dist({1.0}), costs({{1, 2}})), DimensionError);
  }
}

TEST_CASE("wasserstein_distance examples") {
  CHECK(wasserstein_distance(dist({1.0}), dist({1.0}), costs({{0}})) == 0.0);
  CHECK(wasserstein_distance(dist({0.3, 0.7}), dist({0.3, 0.7}), costs({{0, 2}, {5, 0}})) ==
        doctest::Approx(0.0));
  CHECK(wasserstein_distance(dist({0.5, 0.5}), dist({0.5, 0.5}), costs({{1, 2}, {3, 1}})) ==
        doctest::Approx(1.0));
}

TEST_CASE("exact_plan agrees with the grid oracle on 2x2 and 2x3") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 2;
    VectorXd p = oracle::rational_marginal(2, 10, rng);
    VectorXd q = oracle::rational_marginal(n, 10, rng);
    MatrixXd a = oracle::random_cost(2, n, rng);
    const double step = n == 2 ? 1e-4 : 1e-3;
    const double reference = oracle::grid_search(p, q, a, step);
    const double solved = wasserstein_distance(Distribution<>(p), Distribution<>(q), CostMatrix<>(a));
    CHECK(std::abs(solved - reference) <= 1e-6);
  }
}

TEST_CASE("network simplex on larger instances matches vertex enumeration") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 3, n = 3;
    VectorXd p = oracle::rational_marginal(m, 6, rng);
    VectorXd q = oracle::rational_marginal(n, 6, rng);
    MatrixXd a = oracle::random_cost(m, n, rng);
    const double reference = oracle::vertex_enumeration(p, q, a);
    auto plan = exact_plan(Distribution<>(p), Distribution<>(q), CostMatrix<>(a));
    CHECK(std::abs(plan.objective - reference) <= 1e-9);
    CHECK(plan.marginal_error <= 1e-9);
    CHECK(plan.coupling.minCoeff() >= 0.0);
  }
}

TEST_CASE("network simplex handles degenerate and integer-cost problems") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> small(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 3 + trial % 5, n = 3 + (trial * 7) % 6;
    VectorXd p = VectorXd::Constant(m, 1.0 / m);
    VectorXd q = VectorXd::Constant(n, 1.0 / n);
    MatrixXd a(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = small(rng);
    auto plan = exact_plan(Distribution<>(p), Distribution<>(q), CostMatrix<>(a));
    CHECK(plan.marginal_error <= 1e-9);
    // Sinkhorn at moderate lambda can only be worse.
    auto reg = sinkhorn_plan(Distribution<>(p), Distribution<>(q), CostMatrix<>(a), tight(5.0));
    CHECK(reg.objective >= plan.objective - 1e-9);
  }
}

TEST_CASE("exact solver symmetry and identity") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 2 + trial % 6, n = 1 + (trial * 3) % 7;
    VectorXd p = oracle::random_marginal(m, rng);
    VectorXd q = oracle::random_marginal(n, rng);
    MatrixXd a = oracle::random_cost(m, n, rng);
    const double forward = wasserstein_distance(Distribution<>(p), Distribution<>(q), CostMatrix<>(a));
    const double backward = wasserstein_distance(Distribution<>(q), Distribution<>(p), CostMatrix<>(MatrixXd(a.transpose())));
    CHECK(std::abs(forward - backward) <= 1e-9);

    MatrixXd square = oracle::random_cost(m, m, rng).array() + 0.1;
    square.diagonal().setZero();
    CHECK(wasserstein_distance(Distribution<>(p), Distribution<>(p), CostMatrix<>(square)) <= 1e-12);
  }
}

TEST_CASE("sinkhorn examples") {
  SUBCASE("constant cost gives the independent coupling") {
    auto p = dist({0.2, 0.8});
    auto q = dist({0.1, 0.3, 0.6});
    MatrixXd c = MatrixXd::Constant(2, 3, 1.7);
    auto plan = sinkhorn_plan(p, q, CostMatrix<>(c), tight(3.0));
    MatrixXd independent = p.weights() * q.weights().transpose();
    CHECK((plan.coupling - independent).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(plan.objective == doctest::Approx(1.7));
  }
  SUBCASE("symmetric 2x2 fixed point at lambda = 1") {
    auto plan = sinkhorn_plan(dist({0.5, 0.5}), dist({0.5, 0.5}), costs({{0, 1}, {1, 0}}), tight(1.0));
    const double e = std::exp(-1.0);
    CHECK(plan.coupling(0, 0) == doctest::Approx(0.5 / (1 + e)).epsilon(1e-10));
    CHECK(plan.coupling(1, 1) == doctest::Approx(0.5 / (1 + e)).epsilon(1e-10));
    CHECK(plan.objective == doctest::Approx(e / (1 + e)).epsilon(1e-10));
    CHECK(plan.objective == doctest::Approx(0.26894).epsilon(1e-4));
    CHECK(plan.converged);
  }
  SUBCASE("lambda = 100 approaches the exact optimum") {
    auto plan = sinkhorn_plan(dist({0.5, 0.5}), dist({0.5, 0.5}), costs({{0, 1}, {1, 0}}), tight(100.0));
    CHECK(plan.objective <= 1e-3);
  }
  SUBCASE("default config values") {
    SinkhornConfig<> c;
    CHECK(c.lambda == 0.01);
    CHECK(c.max_iterations == 1000);
    CHECK(c.convergence_tolerance == 1e-6);
  }
}

TEST_CASE("sinkhorn error paths") {
  auto p = dist({0.5, 0.5});
  SUBCASE("invalid config") {
    SinkhornConfig<> c;
    c.lambda = 0;
    CHECK_THROWS_AS(sinkhorn_plan(p, p, costs({{0, 1}, {1, 0}}), c), InputError);
    c = {};
    c.max_iterations = 0;
    CHECK_THROWS_AS(sinkhorn_plan(p, p, costs({{0, 1}, {1, 0}}), c), InputError);
  }
  SUBCASE("forced plain domain reports kernel underflow") {
    SinkhornConfig<> c;
    c.lambda = 1000;
    c.domain = ScalingDomain::plain;
    CHECK_THROWS_AS(sinkhorn_plan(p, p, costs({{1, 2}, {2, 1}}), c), NumericalError);
  }
  SUBCASE("automatic domain falls back to log domain") {
    SinkhornConfig<> c = tight(1000);
    auto plan = sinkhorn_plan(p, p, costs({{1, 2}, {2, 1}}), c);
    CHECK(plan.log_domain);
    CHECK(plan.converged);
    CHECK(plan.objective == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("non-convergence is flagged") {
    SinkhornConfig<> c;
    c.lambda = 50;
    c.max_iterations = 2;
    c.convergence_tolerance = 1e-14;
    std::mt19937_64 rng(1);
    VectorXd a = oracle::random_marginal(6, rng);
    VectorXd b = oracle::random_marginal(6, rng);
    auto plan = sinkhorn_plan(Distribution<>(a), Distribution<>(b),
                              CostMatrix<>(oracle::random_cost(6, 6, rng)), c);
    CHECK_FALSE(plan.converged);
    CHECK(plan.iterations == 2);
    CHECK(plan.marginal_error > c.convergence_tolerance);
  }
}

TEST_CASE("log and plain domains agree") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 5, n = 2 + (trial * 3) % 5;
    Distribution<> p(oracle::random_marginal(m, rng));
    Distribution<> q(oracle::random_marginal(n, rng));
    CostMatrix<> a(oracle::random_cost(m, n, rng));
    auto c = tight(4.0);
    c.domain = ScalingDomain::plain;
    auto plain = sinkhorn_plan(p, q, a, c);
    c.domain = ScalingDomain::log;
    auto logd = sinkhorn_plan(p, q, a, c);
    CHECK((plain.coupling - logd.coupling).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("sinkhorn plan is a diagonal scaling of the kernel") {
  std::mt19937_64 rng(8);
  Distribution<> p(oracle::random_marginal(4, rng));
  Distribution<> q(oracle::random_marginal(5, rng));
  MatrixXd a = oracle::random_cost(4, 5, rng);
  const double lambda = 2.0;
  auto plan = sinkhorn_plan(p, q, CostMatrix<>(a), tight(lambda));
  // P_ij / K_ij = u_i v_j has rank one.
  MatrixXd ratio = plan.coupling.array() / (-lambda * a).array().exp();
  for (int i = 1; i < 4; ++i) {
    VectorXd r = ratio.row(i).transpose().cwiseQuotient(ratio.row(0).transpose());
    CHECK(r.maxCoeff() - r.minCoeff() <= 1e-9 * r.maxCoeff());
  }
}

TEST_CASE("entropy examples") {
  MatrixXd point(1, 1);
  point << 1.0;
  CHECK(entropy(point) == 0.0);
  MatrixXd diag(2, 2);
  diag << 0.5, 0, 0, 0.5;
  CHECK(entropy(diag) == doctest::Approx(std::log(2.0)));
  CHECK(entropy(diag) == doctest::Approx(0.69315).epsilon(1e-5));
  MatrixXd uniform = MatrixXd::Constant(2, 2, 0.25);
  CHECK(entropy(uniform) == doctest::Approx(std::log(4.0)));
  CHECK(entropy(uniform) == doctest::Approx(1.38629).epsilon(1e-5));
  MatrixXd negative(1, 2);
  negative << 1.5, -0.5;
  CHECK_THROWS_AS(entropy(negative), InputError);
}

TEST_CASE("independent coupling maximizes entropy on the 2x2 and 2x3 polytopes") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd p = oracle::rational_marginal(2, 8, rng);
    VectorXd q = oracle::rational_marginal(3, 8, rng);
    const double h_independent = entropy(MatrixXd(p * q.transpose()));
    for (double a : oracle::grid_axis(0.0, std::min(p[0], q[0]), 0.01)) {
      for (double b : oracle::grid_axis(0.0, std::min(q[1], p[0] - a), 0.01)) {
        const double c = p[0] - a - b;
        if (c < 0 || c > q[2]) continue;
        MatrixXd plan(2, 3);
        plan << a, b, c, q[0] - a, q[1] - b, q[2] - c;
        if (plan.minCoeff() < 0) continue;
        CHECK(entropy(plan) <= h_independent + 1e-12);
      }
    }
  }
}

TEST_CASE("transport_cost examples") {
  MatrixXd plan(2, 2);
  plan << 0.5, 0, 0, 0.5;
  CHECK(transport_cost(plan, MatrixXd::Zero(2, 2)) == 0.0);
  MatrixXd a(2, 2);
  a << 1, 2, 3, 1;
  CHECK(transport_cost(plan, a) == doctest::Approx(1.0));
  MatrixXd uniform = MatrixXd::Constant(2, 2, 0.25);
  MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  CHECK(transport_cost(uniform, swap) == doctest::Approx(0.5));
  CHECK_THROWS_AS(transport_cost(uniform, MatrixXd::Zero(2, 3)), DimensionError);
}

TEST_CASE("sinkhorn cost is bounded below by the exact cost and monotone in lambda") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 15; ++trial) {
    const int m = 2 + trial % 4, n = 2 + (trial * 5) % 4;
    Distribution<> p(oracle::random_marginal(m, rng));
    Distribution<> q(oracle::random_marginal(n, rng));
    CostMatrix<> a(oracle::random_cost(m, n, rng));
    const double exact = wasserstein_distance(p, q, a);
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda : {1.0, 10.0, 100.0}) {
      const double cost = sinkhorn_plan(p, q, a, tight(lambda)).objective;
      CHECK(cost >= exact - 1e-9);
      CHECK(cost <= previous + 1e-7);
      previous = cost;
    }
  }
}
