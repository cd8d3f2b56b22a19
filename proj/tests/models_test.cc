#include "lpvp/models.h"

#include <random>

#include <gtest/gtest.h>

#include "lpvp/lq_preview.h"

namespace lpvp {
namespace {

TEST(ModelsTest, SymmetricAxlesCancelMomentTerms) {
  VehicleParams p;
  p.Lf = p.Lr = 1.35;
  const ContinuousPlant ct = BuildErrorModelCt(p, 12.0);
  EXPECT_DOUBLE_EQ(ct.A(1, 3), -12.0);
  EXPECT_DOUBLE_EQ(ct.A(3, 1), 0.0);
  EXPECT_DOUBLE_EQ(ct.A(3, 2), 0.0);
}

TEST(ModelsTest, DefaultLateralVelocityPole) {
  const ContinuousPlant ct = BuildErrorModelCt(VehicleParams{}, 10.0);
  EXPECT_DOUBLE_EQ(ct.A(1, 1), -16.0);
  EXPECT_DOUBLE_EQ(ct.A(1, 2), 160.0);
}

TEST(ModelsTest, EntriesMatchClosedForms) {
  const VehicleParams p;
  const double cs = 2 * (p.Caf + p.Car);
  const double cm = 2 * (p.Caf * p.Lf - p.Car * p.Lr);
  const double ci = 2 * (p.Caf * p.Lf * p.Lf + p.Car * p.Lr * p.Lr);
  for (double v = 3.0; v <= 30.0; v += 0.75) {
    const MatrixXd A = BuildErrorModelCt(p, v).A;
    MatrixXd expected(4, 4);
    expected << 0, 1, 0, 0,
                0, -cs / (p.m * v), cs / p.m, -cm / (p.m * v) - v,
                0, 0, 0, 1,
                0, -cm / (p.Iz * v), cm / p.Iz, -ci / (p.Iz * v);
    EXPECT_LT((A - expected).cwiseAbs().maxCoeff(), 1e-12 * expected.norm()) << v;
  }
}

TEST(ModelsTest, StandardVariantMovesSpeedTerm) {
  const VehicleParams p;
  const auto paper = BuildErrorModelCt(p, 20.0, ErrorModelVariant::kPaper);
  const auto standard = BuildErrorModelCt(p, 20.0, ErrorModelVariant::kStandard);
  EXPECT_DOUBLE_EQ(paper.A(1, 3) - standard.A(1, 3), -20.0);
  EXPECT_EQ(paper.B_w, standard.B_w);
}

TEST(ModelsTest, SteeringInputIndependentOfSpeed) {
  const VehicleParams p;
  const MatrixXd B = BuildErrorModelCt(p, 20.0).B_u;
  EXPECT_EQ(B, BuildErrorModelCt(p, 4.0).B_u);
  EXPECT_DOUBLE_EQ(B(1, 0), 2 * p.Caf / p.m);
  EXPECT_DOUBLE_EQ(B(3, 0), 2 * p.Caf * p.Lf / p.Iz);
  EXPECT_DOUBLE_EQ(B(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(B(2, 0), 0.0);
}

TEST(ModelsTest, RejectsNonPositiveSpeed) {
  EXPECT_THROW(BuildErrorModelCt(VehicleParams{}, 0.0), Error);
  EXPECT_THROW(BuildErrorModelCt(VehicleParams{}, -3.0), Error);
}

TEST(ModelsTest, IntegratorDiscretization) {
  ContinuousPlant ct;
  ct.A = MatrixXd::Zero(1, 1);
  ct.B_u = MatrixXd::Ones(1, 1);
  ct.B_w = MatrixXd::Zero(1, 0);
  ct.C = MatrixXd::Ones(1, 1);
  ct.D = MatrixXd::Zero(1, 1);
  const DiscretePlant d = Discretize(ct, 0.02);
  EXPECT_NEAR(d.A(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(d.B_u(0, 0), 0.02, 1e-15);
}

TEST(ModelsTest, DoubleIntegratorDiscretization) {
  const double T = 0.1;
  ContinuousPlant ct;
  ct.A = (MatrixXd(2, 2) << 0, 1, 0, 0).finished();
  ct.B_u = (MatrixXd(2, 1) << 0, 1).finished();
  ct.B_w = MatrixXd::Zero(2, 0);
  ct.C = MatrixXd::Identity(2, 2);
  ct.D = MatrixXd::Zero(2, 1);
  const DiscretePlant d = Discretize(ct, T);
  EXPECT_NEAR((d.A - (MatrixXd(2, 2) << 1, T, 0, 1).finished()).norm(), 0, 1e-14);
  EXPECT_NEAR((d.B_u - (MatrixXd(2, 1) << T * T / 2, T).finished()).norm(), 0, 1e-14);
}

TEST(ModelsTest, StableSpectrumMapsThroughExponential) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    MatrixXd M(4, 4);
    for (int i = 0; i < 16; ++i) M.data()[i] = g(rng);
    const double shift = M.eigenvalues().real().maxCoeff() + 0.5;
    ContinuousPlant ct;
    ct.A = M - shift * MatrixXd::Identity(4, 4);
    ct.B_u = MatrixXd::Ones(4, 1);
    ct.B_w = MatrixXd::Zero(4, 0);
    ct.C = MatrixXd::Identity(4, 4);
    ct.D = MatrixXd::Zero(4, 1);
    const double T = 0.05;
    const double max_re = ct.A.eigenvalues().real().maxCoeff();
    EXPECT_NEAR(SpectralRadius(Discretize(ct, T).A), std::exp(T * max_re), 1e-10);
  }
}

TEST(ModelsTest, DiscretizationCommutesWithPermutation) {
  const ContinuousPlant ct = BuildErrorModelCt(VehicleParams{}, 15.0);
  Eigen::PermutationMatrix<4> perm;
  perm.indices() << 2, 0, 3, 1;
  const MatrixXd Pm = perm.toDenseMatrix().cast<double>();
  ContinuousPlant permuted = ct;
  permuted.A = Pm * ct.A * Pm.transpose();
  permuted.B_u = Pm * ct.B_u;
  permuted.B_w = Pm * ct.B_w;
  const DiscretePlant a = Discretize(permuted, 0.02);
  const DiscretePlant b = Discretize(ct, 0.02);
  EXPECT_LT((a.A - Pm * b.A * Pm.transpose()).norm(), 1e-12);
  EXPECT_LT((a.B_u - Pm * b.B_u).norm(), 1e-12);
}

TEST(ModelsTest, RoadPlantShifts) {
  const DiscretePlant road = BuildRoadPlant(3, 0.02);
  const Eigen::Vector3d x(1, 2, 3);
  const VectorXd next = road.A * x + road.B_u * 4.0;
  EXPECT_EQ(next, Eigen::Vector3d(2, 3, 4));
  EXPECT_DOUBLE_EQ((road.C * x)(0), 1.0);
  EXPECT_THROW(BuildRoadPlant(0, 0.02), Error);
}

TEST(ModelsTest, RoadPlantNilpotent) {
  const int N = 50;
  const MatrixXd A = BuildRoadPlant(N, 0.02).A;
  MatrixXd power = MatrixXd::Identity(N, N);
  for (int k = 0; k < N - 1; ++k) power = power * A;
  EXPECT_GT(power.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((power * A).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ModelsTest, AugmentedMeasurementMatrix) {
  PreviewConfig config;
  config.N = 3;
  const AugmentedPlant aug =
      BuildAugmentedPlant(VehicleParams{}, config, SchedulingPoint::OnCurve(10.0));
  const MatrixXd& C = aug.C_aug();
  ASSERT_EQ(C.rows(), 2);
  ASSERT_EQ(C.cols(), 7);
  EXPECT_DOUBLE_EQ(C(1, 4), 5.0);
  EXPECT_DOUBLE_EQ(C(1, 5), -5.0);
  EXPECT_DOUBLE_EQ(C(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(C(0, 4), -1.0);
  EXPECT_DOUBLE_EQ(C(1, 2), 1.0);
  // Row 1 selects y and y_r1, row 2 the heading error and the two leading
  // preview points.
  EXPECT_EQ((C.array() != 0.0).count(), 5);
  EXPECT_EQ((C * VectorXd::Zero(7)).norm(), 0.0);
}

TEST(ModelsTest, AugmentedPlantIsBlockDiagonal) {
  const PreviewConfig config;
  const AugmentedPlant aug =
      BuildAugmentedPlant(VehicleParams{}, config, SchedulingPoint::OnCurve(7.0));
  const MatrixXd& A = aug.plant.A;
  EXPECT_EQ(A.topRightCorner(4, config.N).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(A.bottomLeftCorner(config.N, 4).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(A.bottomRightCorner(config.N, config.N), BuildRoadPlant(config.N, config.T).A);
  EXPECT_EQ(aug.plant.B_w.cols(), 2);
  EXPECT_DOUBLE_EQ(aug.plant.B_w(aug.plant.states() - 1, 0), 1.0);
}

TEST(ModelsTest, AugmentRejectsMismatchedPeriods) {
  const DiscretePlant vehicle =
      Discretize(BuildErrorModelCt(VehicleParams{}, 10.0), 0.02);
  const DiscretePlant road = BuildRoadPlant(5, 0.01);
  EXPECT_THROW(Augment(vehicle, road, SchedulingPoint::OnCurve(10.0), 0.02), Error);
}

TEST(ModelsTest, NominalFamilyHasThreeModels) {
  VehicleParams p;
  p.stiffness_uncertainty = 0.0;
  const auto models =
      EnumerateVertexModels(p, PreviewConfig{}, ModelFamily::kUncertain);
  ASSERT_EQ(models.size(), 3u);
  for (const auto& m : models) {
    EXPECT_EQ(m.stiffness_corner[0], 1.0);
    EXPECT_EQ(m.stiffness_corner[1], 1.0);
  }
}

TEST(ModelsTest, UncertainFamilyHasTwelveModels) {
  const PreviewConfig config;
  const auto models =
      EnumerateVertexModels(VehicleParams{}, config, ModelFamily::kUncertain);
  ASSERT_EQ(models.size(), 12u);
  const MatrixXd road = models[0].plant.plant.A.bottomRightCorner(config.N, config.N);
  for (const auto& m : models) {
    for (double c : m.stiffness_corner) {
      EXPECT_TRUE(std::abs(c - 0.7) < 1e-15 || std::abs(c - 1.3) < 1e-15);
    }
    EXPECT_EQ(m.plant.plant.A.bottomRightCorner(config.N, config.N), road);
  }
}

TEST(ModelsTest, ParameterValidation) {
  VehicleParams p;
  p.m = 0.0;
  EXPECT_THROW(p.Validate(), Error);
  p = VehicleParams{};
  p.stiffness_uncertainty = 1.0;
  EXPECT_THROW(p.Validate(), Error);
  PreviewConfig c;
  c.v_min = 30.0;
  EXPECT_THROW(c.Validate(), Error);
}

}  // namespace
}  // namespace lpvp
