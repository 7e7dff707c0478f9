#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <thread>

#include "test_support.hpp"
#include "w3cone/solver.hpp"

namespace w3cone {
namespace {

using testing::make_rng;

AffineExpr v(int i, double c = 1.0) { return AffineExpr::variable(i, c); }

void expect_optimal(const ConicProgram& p, const Solution& s, double objective, double tol = 1e-7) {
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_NEAR(s.objective, objective, tol * (1.0 + std::abs(objective)));
  ASSERT_EQ(static_cast<int>(s.x.size()), p.num_vars());
  EXPECT_TRUE(check_point(p, s.x, 1e-6).feasible);
}

TEST(InteriorPoint, LowerBound) {
  ConicProgram p;
  const int x = p.add_variable(3.0, kInf);
  p.set_objective(v(x));
  const Solution s = solve(p);
  expect_optimal(p, s, 3.0);
  EXPECT_NEAR(s.x[0], 3.0, 1e-7);
}

TEST(InteriorPoint, SecondOrderCone) {
  ConicProgram p;
  const int t = p.add_variable();
  p.add_soc({v(t), AffineExpr(1.0), AffineExpr(1.0)});
  p.set_objective(v(t));
  expect_optimal(p, solve(p), std::numbers::sqrt2);
}

TEST(InteriorPoint, RotatedCone) {
  ConicProgram p;
  const int a = p.add_variable();
  const int b = p.add_variable();
  p.add_rsoc({v(a), v(b), AffineExpr(1.0)});
  p.set_objective(v(a) + v(b));
  const Solution s = solve(p);
  expect_optimal(p, s, std::numbers::sqrt2);
  EXPECT_NEAR(s.x[0], 1.0 / std::numbers::sqrt2, 1e-6);
}

TEST(InteriorPoint, TwoByTwoPsd) {
  ConicProgram p;
  const int x = p.add_variable();
  p.add_psd(2, {v(x), AffineExpr(1.0), v(x)});
  p.set_objective(v(x));
  expect_optimal(p, solve(p), 1.0);
}

TEST(InteriorPoint, EqualityAndLinearRows) {
  ConicProgram p;
  const int x = p.add_variable(0.0, kInf);
  const int y = p.add_variable(0.0, kInf);
  p.add_linear(v(x) + v(y), -kInf, 1.0);
  p.add_equality(v(x) - v(y), 0.0);
  p.set_objective(-1.0 * v(x) - v(y) + AffineExpr(10.0));
  const Solution s = solve(p);
  expect_optimal(p, s, 9.0);
  EXPECT_NEAR(s.x[0], 0.5, 1e-6);
}

TEST(InteriorPoint, FixedVariable) {
  ConicProgram p;
  const int x = p.add_variable(2.0, 2.0);
  const int t = p.add_variable();
  p.add_soc({v(t), v(x)});
  p.set_objective(v(t));
  expect_optimal(p, solve(p), 2.0);
}

TEST(InteriorPoint, DetectsInfeasibility) {
  ConicProgram p;
  const int x = p.add_variable();
  p.add_linear(v(x), 2.0, kInf);
  p.add_linear(v(x), -kInf, 1.0);
  p.set_objective(v(x));
  EXPECT_EQ(solve(p).status, SolveStatus::kInfeasible);
}

TEST(InteriorPoint, DetectsUnboundedness) {
  ConicProgram p;
  const int x = p.add_variable(-kInf, 5.0);
  const int t = p.add_variable();
  p.add_soc({v(t), v(x, 0.5)});
  p.set_objective(v(x));
  EXPECT_EQ(solve(p).status, SolveStatus::kUnbounded);
}

TEST(InteriorPoint, IterationLimitReported) {
  ConicProgram p;
  const int t = p.add_variable();
  p.add_soc({v(t), AffineExpr(1.0), AffineExpr(1.0)});
  p.set_objective(v(t));
  SolverConfig cfg;
  cfg.max_iterations = 1;
  EXPECT_EQ(solve(p, cfg).status, SolveStatus::kIterationLimit);
}

TEST(Backends, CapabilityContract) {
  ConicProgram p;
  const int x = p.add_variable();
  p.add_psd(1, {v(x)});
  p.set_objective(v(x));
  const auto socp = make_solver("ipm-socp");
  EXPECT_FALSE(socp->supports_psd());
  EXPECT_THROW(socp->solve(p, {}), CapabilityError);
  const auto full = make_solver("ipm");
  EXPECT_TRUE(full->supports_psd());
  EXPECT_EQ(full->solve(p, {}).status, SolveStatus::kOptimal);
  EXPECT_THROW(make_solver("nope"), std::invalid_argument);
}

// min ||x - a|| s.t. x >= 0 has solution max(a, 0) and value ||min(a, 0)||.
TEST(InteriorPoint, ProjectionOntoOrthant) {
  auto rng = make_rng(20);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + trial % 7;
    ConicProgram p;
    std::vector<double> a(dim);
    std::vector<AffineExpr> cone{};
    const int t = p.add_variable();
    cone.push_back(v(t));
    double expected2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      a[i] = n(rng);
      const int x = p.add_variable(0.0, kInf);
      cone.push_back(v(x) - AffineExpr(a[i]));
      if (a[i] < 0.0) expected2 += a[i] * a[i];
    }
    p.add_soc(cone);
    p.set_objective(v(t));
    const Solution s = solve(p);
    expect_optimal(p, s, std::sqrt(expected2), 1e-6);
    for (int i = 0; i < dim; ++i) EXPECT_NEAR(s.x[1 + i], std::max(a[i], 0.0), 1e-4);
  }
}

// min <C, X> s.t. tr X = 1, X psd equals the smallest eigenvalue of C.
TEST(InteriorPoint, SmallestEigenvalue) {
  auto rng = make_rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int d = 1; d <= 6; ++d) {
    Eigen::MatrixXd c(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) c(i, j) = n(rng);
    }
    c = (c + c.transpose()).eval();
    ConicProgram p;
    std::vector<AffineExpr> entries;
    AffineExpr objective;
    AffineExpr trace;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j <= i; ++j) {
        const int x = p.add_variable();
        entries.push_back(v(x));
        objective.add_term(x, i == j ? c(i, j) : 2.0 * c(i, j));
        if (i == j) trace.add_term(x, 1.0);
      }
    }
    p.add_psd(d, entries);
    p.add_equality(trace, 1.0);
    p.set_objective(objective);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
    expect_optimal(p, solve(p), eig.eigenvalues()(0), 1e-6);
  }
}

// A random feasible SOCP: bounded box, random cones and rows through a known interior point.
ConicProgram random_socp(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const int nv = 6;
  ConicProgram p;
  std::vector<double> x0(nv);
  for (int i = 0; i < nv; ++i) {
    x0[i] = n(rng);
    p.add_variable(-10.0, 10.0);
  }
  for (int c = 0; c < 3; ++c) {
    std::vector<AffineExpr> cone;
    double norm2 = 0.0;
    std::vector<AffineExpr> us;
    for (int k = 0; k < 2; ++k) {
      AffineExpr u;
      for (int i = 0; i < nv; ++i) u.add_term(i, n(rng));
      norm2 += std::pow(u.evaluate(x0), 2);
      us.push_back(u);
    }
    AffineExpr t;
    for (int i = 0; i < nv; ++i) t.add_term(i, 0.1 * n(rng));
    t.add_constant(std::sqrt(norm2) + 1.0 - t.evaluate(x0));
    cone.push_back(t);
    for (auto& u : us) cone.push_back(u);
    p.add_soc(cone);
  }
  AffineExpr row;
  for (int i = 0; i < nv; ++i) row.add_term(i, n(rng));
  p.add_linear(row, row.evaluate(x0) - 1.0, row.evaluate(x0) + 1.0);
  AffineExpr obj;
  for (int i = 0; i < nv; ++i) obj.add_term(i, n(rng));
  p.set_objective(obj);
  return p;
}

TEST(InteriorPoint, RandomProgramsFeasibleAndRedundancyInvariant) {
  auto rng = make_rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    ConicProgram p = random_socp(rng);
    const Solution s = solve(p);
    ASSERT_EQ(s.status, SolveStatus::kOptimal) << trial;
    EXPECT_TRUE(check_point(p, s.x, 1e-6).feasible);
    // x_0 <= 10 already holds through the bounds
    p.add_linear(AffineExpr::variable(0), -kInf, 20.0, "redundant");
    const Solution s2 = solve(p);
    ASSERT_EQ(s2.status, SolveStatus::kOptimal);
    EXPECT_NEAR(s2.objective, s.objective, 1e-6 * (1.0 + std::abs(s.objective)));
  }
}

TEST(InteriorPoint, ConcurrentSolvesMatchSequential) {
  auto rng = make_rng(23);
  std::vector<ConicProgram> programs;
  for (int i = 0; i < 6; ++i) programs.push_back(random_socp(rng));
  std::vector<double> sequential;
  for (const auto& p : programs) sequential.push_back(solve(p).objective);
  std::vector<double> concurrent(programs.size());
  {
    std::vector<std::jthread> threads;
    for (std::size_t i = 0; i < programs.size(); ++i) {
      threads.emplace_back([&, i] { concurrent[i] = solve(programs[i]).objective; });
    }
  }
  for (std::size_t i = 0; i < programs.size(); ++i) EXPECT_EQ(sequential[i], concurrent[i]);
}

TEST(SolveStatus, Names) {
  EXPECT_EQ(to_string(SolveStatus::kOptimal), "optimal");
  EXPECT_EQ(to_string(SolveStatus::kNumericalFailure), "numerical_failure");
}

}  // namespace
}  // namespace w3cone
