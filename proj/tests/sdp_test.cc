#include "lpvp/sdp.h"

#include <random>

#include <gtest/gtest.h>

namespace lpvp::sdp {
namespace {

// minimize t s.t. [[t, 1], [1, t]] >= 0.
Problem TwoByTwo(double scale = 1.0) {
  Problem p;
  const int t = p.AddScalar("t");
  const int c = p.AddConstraint("2x2", 2);
  p.AddConstant(c, scale * (MatrixXd(2, 2) << 0, 1, 1, 0).finished());
  p.AddScalarTerm(c, t, scale * MatrixXd::Identity(2, 2));
  p.SetObjective(t, 1.0);
  return p;
}

TEST(SdpTest, TwoByTwoOptimum) {
  const Problem p = TwoByTwo();
  const Solution s = Solve(p);
  ASSERT_EQ(s.status, Status::kOptimal) << s.message;
  EXPECT_NEAR(s.objective, 1.0, 1e-6);
  const ResidualReport r = CheckSolution(p, s.x);
  EXPECT_NEAR(r.worst, 0.0, 1e-6);
  VectorXd bad = s.x;
  bad[0] = 0.9;
  EXPECT_LT(CheckSolution(p, bad).worst, 0.0);
}

TEST(SdpTest, LambdaMaxOracle) {
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd A(5, 5);
    for (int i = 0; i < 25; ++i) A.data()[i] = g(rng);
    A = 0.5 * (A + A.transpose()).eval();
    Problem p;
    const int t = p.AddScalar("t");
    const int c = p.AddConstraint("tI-A", 5);
    p.AddConstant(c, -A);
    p.AddScalarTerm(c, t, MatrixXd::Identity(5, 5));
    p.SetObjective(t, 1.0);
    Options options;
    options.opt_tol = 1e-8;
    const Solution s = Solve(p, options);
    ASSERT_EQ(s.status, Status::kOptimal) << s.message;
    const double oracle =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(A).eigenvalues().maxCoeff();
    EXPECT_NEAR(s.objective, oracle, 1e-6);
  }
}

TEST(SdpTest, NegativeConstantIsInfeasible) {
  Problem p;
  const int c = p.AddConstraint("-I", 3);
  p.AddConstant(c, -MatrixXd::Identity(3, 3));
  EXPECT_EQ(Solve(p).status, Status::kInfeasible);

  // With a variable that cannot help.
  Problem q;
  const int t = q.AddScalar("t");
  const int d = q.AddConstraint("-I", 2);
  q.AddConstant(d, -MatrixXd::Identity(2, 2));
  q.AddScalarTerm(d, t, (MatrixXd(2, 2) << 1, 0, 0, -1).finished());
  q.SetObjective(t, 1.0);
  EXPECT_EQ(Solve(q).status, Status::kInfeasible);
}

TEST(SdpTest, EmptyConstraintListIsFeasible) {
  Problem p;
  EXPECT_EQ(Solve(p).status, Status::kOptimal);
  EXPECT_TRUE(CheckSolution(p, VectorXd()).Feasible(1e-9));
}

TEST(SdpTest, ScaledConstraintKeepsOptimizer) {
  const Solution a = Solve(TwoByTwo(1.0));
  const Solution b = Solve(TwoByTwo(10.0));
  ASSERT_EQ(b.status, Status::kOptimal);
  EXPECT_NEAR(a.objective, b.objective, 1e-6);
}

// Lyapunov matrix variable: find P >= I with A'PA - P <= -I, minimize trace
// through a scalar bound. Exercises product terms against an exact answer.
TEST(SdpTest, MatrixVariableLyapunov) {
  MatrixXd A(2, 2);
  A << 0.5, 0.2, 0.0, 0.3;
  Problem p;
  const int P = p.AddSymmetric("P", 2);
  const int t = p.AddScalar("t");
  const int c1 = p.AddConstraint("P - A'PA - I", 2);
  p.AddConstant(c1, -MatrixXd::Identity(2, 2));
  p.AddProduct(c1, P, 0.5 * MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
  p.AddProduct(c1, P, -0.5 * A.transpose(), A.transpose());
  const int c2 = p.AddConstraint("tI - P", 2);
  p.AddScalarTerm(c2, t, MatrixXd::Identity(2, 2));
  p.AddProduct(c2, P, -0.5 * MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
  p.SetObjective(t, 1.0);
  const Solution s = Solve(p);
  ASSERT_EQ(s.status, Status::kOptimal) << s.message;
  // The minimal P solves the Lyapunov equation P = A'PA + I.
  MatrixXd X = MatrixXd::Identity(2, 2);
  for (int i = 0; i < 200; ++i) X = A.transpose() * X * A + MatrixXd::Identity(2, 2);
  const double oracle = Eigen::SelfAdjointEigenSolver<MatrixXd>(X).eigenvalues().maxCoeff();
  EXPECT_NEAR(s.objective, oracle, 1e-5);
  EXPECT_TRUE(CheckSolution(p, s.x).Feasible(1e-7));
}

}  // namespace
}  // namespace lpvp::sdp
