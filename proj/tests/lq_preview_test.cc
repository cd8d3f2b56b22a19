#include "lpvp/lq_preview.h"

#include <random>

#include <gtest/gtest.h>

namespace lpvp {
namespace {

MatrixXd M(std::initializer_list<double> values, int rows, int cols) {
  MatrixXd m(rows, cols);
  auto it = values.begin();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = *it++;
  }
  return m;
}

TEST(LqPreviewTest, ScalarGoldenRatio) {
  const auto sol = SolveDare(M({1}, 1, 1), M({1}, 1, 1), M({1}, 1, 1), M({1}, 1, 1));
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  EXPECT_NEAR(sol.P(0, 0), phi, 1e-12);
  EXPECT_NEAR(sol.K(0, 0), phi - 1.0, 1e-12);
}

TEST(LqPreviewTest, ZeroCostGivesZeroGain) {
  PreviewConfig config;
  config.N = 10;
  const AugmentedPlant plant =
      BuildAugmentedPlant(VehicleParams{}, config, SchedulingPoint::OnCurve(15.0));
  // The vehicle block has a double pole at 1 (y and Psi are integrated), so
  // zero output weight only yields K = 0 on a Schur plant.
  const MatrixXd A = plant.plant.A.bottomRightCorner(config.N, config.N);
  const MatrixXd B = MatrixXd::Ones(config.N, 1);
  const auto sol = SolveDare(A, B, MatrixXd::Zero(config.N, config.N), M({1}, 1, 1));
  EXPECT_EQ(sol.P.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(sol.K.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LqPreviewTest, OneStepRecursion) {
  PreviewConfig config;
  config.N = 8;
  const CostWeights w;
  const AugmentedPlant plant =
      BuildAugmentedPlant(VehicleParams{}, config, SchedulingPoint::OnCurve(12.0));
  const auto fh = FiniteHorizonRiccati(plant, w, 1);
  const MatrixXd& A = plant.plant.A;
  const MatrixXd& B = plant.plant.B_u;
  const MatrixXd Qt = plant.C_aug().transpose() * w.Q() * plant.C_aug();
  const MatrixXd expected =
      (w.R * MatrixXd::Identity(1, 1) + B.transpose() * Qt * B)
          .ldlt()
          .solve(B.transpose() * Qt * A);
  EXPECT_LT((fh.gains[0] - expected).norm(), 1e-12 * expected.norm());
}

TEST(LqPreviewTest, RiccatiIteratesAreMonotone) {
  PreviewConfig config;
  config.N = 6;
  const AugmentedPlant plant =
      BuildAugmentedPlant(VehicleParams{}, config, SchedulingPoint::OnCurve(8.0));
  const auto fh = FiniteHorizonRiccati(plant, CostWeights{}, 60);
  for (size_t k = 1; k < fh.costs.size(); ++k) {
    const MatrixXd diff = fh.costs[k] - fh.costs[k - 1];
    const double min_eig =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (diff + diff.transpose()))
            .eigenvalues()
            .minCoeff();
    EXPECT_GE(min_eig, -1e-9 * fh.costs[k].norm()) << k;
  }
}

TEST(LqPreviewTest, RandomSystemsMatchFiniteHorizon) {
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = dim(rng);
    const int m = 1 + trial % 2;
    MatrixXd A(n, n), B(n, m), C(n, n);
    for (int i = 0; i < A.size(); ++i) A.data()[i] = g(rng) / std::sqrt(n);
    for (int i = 0; i < B.size(); ++i) B.data()[i] = g(rng);
    for (int i = 0; i < C.size(); ++i) C.data()[i] = g(rng);
    const MatrixXd Q = C.transpose() * C;
    const MatrixXd R = MatrixXd::Identity(m, m);
    const auto dare = SolveDare(A, B, Q, R);
    const auto fh = FiniteHorizonRiccati(A, B, Q, R, 500);
    EXPECT_LT((dare.K - fh.gains.back()).cwiseAbs().maxCoeff(), 1e-6) << trial;
    EXPECT_LT(DareResidual(A, B, Q, R, dare.P), 1e-9) << trial;
    EXPECT_LT(SpectralRadius(A - B * dare.K), 1.0);
  }
}

TEST(LqPreviewTest, PreviewGainSolvesRiccati) {
  const PreviewConfig config;
  const CostWeights w;
  const AugmentedPlant plant =
      BuildAugmentedPlant(VehicleParams{}, config, SchedulingPoint::OnCurve(10.0));
  const LQSolution sol = SolvePreviewLq(plant, w);
  ASSERT_EQ(sol.Kv.size(), 4);
  ASSERT_EQ(sol.Kr.size(), config.N);
  EXPECT_LT(sol.residual, 1e-10);
  EXPECT_LT(SpectralRadius(plant.plant.A - plant.plant.B_u * sol.K()), 1.0);
  EXPECT_LT((sol.P - sol.P.transpose()).norm(), 1e-9 * sol.P.norm());
}

TEST(LqPreviewTest, PreviewGainsDecay) {
  const PreviewConfig config;
  for (double vx : {3.0, 10.0, 20.0, 30.0}) {
    const AugmentedPlant plant =
        BuildAugmentedPlant(VehicleParams{}, config, SchedulingPoint::OnCurve(vx));
    const RowVectorXd Kr = SolvePreviewLq(plant, CostWeights{}).Kr.cwiseAbs();
    EXPECT_LT(Kr.tail(3).maxCoeff(), 0.1 * Kr.maxCoeff()) << vx;
  }
}

TEST(LqPreviewTest, ExtraPreviewBeyondHorizonLeavesFeedbackUnchanged) {
  PreviewConfig shorter;
  shorter.N = 150;
  PreviewConfig longer = shorter;
  longer.N = 200;
  const auto rho = SchedulingPoint::OnCurve(25.0);
  const LQSolution a =
      SolvePreviewLq(BuildAugmentedPlant(VehicleParams{}, shorter, rho), CostWeights{});
  const LQSolution b =
      SolvePreviewLq(BuildAugmentedPlant(VehicleParams{}, longer, rho), CostWeights{});
  EXPECT_LT((a.Kv - b.Kv).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LqPreviewTest, UncontrollableUnstableModeFails) {
  const MatrixXd A = M({1.2, 0, 0, 0.5}, 2, 2);
  const MatrixXd B = M({0, 1}, 2, 1);
  EXPECT_LT(StabilizabilityMargin(A, B), 1e-8);
  EXPECT_THROW(SolveDare(A, B, MatrixXd::Identity(2, 2), M({1}, 1, 1)), Error);
}

TEST(LqPreviewTest, WeightValidation) {
  CostWeights w;
  w.R = 0.0;
  EXPECT_THROW(w.Validate(), Error);
  w = CostWeights{};
  w.q1 = -1.0;
  EXPECT_THROW(w.Validate(), Error);
}

}  // namespace
}  // namespace lpvp
