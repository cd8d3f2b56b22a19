#include "lpvp/scheduling.h"

#include <random>

#include <gtest/gtest.h>

namespace lpvp {
namespace {

TEST(SchedulingTest, TangentIntersectionVertex) {
  const SpeedPolytope poly = BuildPolytope(3.0, 30.0);
  EXPECT_NEAR(poly.vertices[2].x(), 60.0 / 11.0, 1e-12);
  EXPECT_NEAR(poly.vertices[2].y(), 2.0 / 33.0, 1e-12);
  EXPECT_EQ(poly.vertices[0], Eigen::Vector2d(3.0, 1.0 / 3.0));
  EXPECT_EQ(poly.vertices[1], Eigen::Vector2d(30.0, 1.0 / 30.0));
}

TEST(SchedulingTest, DegenerateIntervalRejected) {
  EXPECT_THROW(BuildPolytope(10.0, 10.0), Error);
  EXPECT_THROW(BuildPolytope(0.0, 10.0), Error);
  EXPECT_THROW(BuildPolytope(12.0, 10.0), Error);
}

TEST(SchedulingTest, ArcInsideTriangle) {
  const SpeedPolytope poly = BuildPolytope(3.0, 30.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = 3.0 + 27.0 * i / 999.0;
    const auto a = Barycentric(poly, v).alpha;
    EXPECT_NEAR(a[0] + a[1] + a[2], 1.0, 1e-12);
    for (double ai : a) EXPECT_GE(ai, -1e-9) << v;
  }
}

TEST(SchedulingTest, EndpointsAreVertices) {
  const SpeedPolytope poly = BuildPolytope(3.0, 30.0);
  const auto lo = Barycentric(poly, 3.0).alpha;
  const auto hi = Barycentric(poly, 30.0).alpha;
  EXPECT_EQ(lo, (std::array<double, 3>{1, 0, 0}));
  EXPECT_EQ(hi, (std::array<double, 3>{0, 1, 0}));
}

TEST(SchedulingTest, ReconstructsSchedulingPoint) {
  const SpeedPolytope poly = BuildPolytope(3.0, 30.0);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> speed(3.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    const double v = speed(rng);
    const auto a = Barycentric(poly, v).alpha;
    Eigen::Vector2d p = Eigen::Vector2d::Zero();
    for (int k = 0; k < 3; ++k) p += a[k] * poly.vertices[k];
    EXPECT_NEAR(p.x(), v, 1e-12 * v);
    EXPECT_NEAR(p.y(), 1.0 / v, 1e-12);
  }
}

TEST(SchedulingTest, CoordinatesContinuousInSpeed) {
  const SpeedPolytope poly = BuildPolytope(3.0, 30.0);
  const double h = 1e-3;
  for (double v = 3.0; v + h <= 30.0; v += 0.27) {
    const auto a = Barycentric(poly, v).alpha;
    const auto b = Barycentric(poly, v + h).alpha;
    for (int k = 0; k < 3; ++k) EXPECT_LT(std::abs(a[k] - b[k]), 0.01) << v;
  }
}

TEST(SchedulingTest, OutOfRangeSpeedIsClampedAndFlagged) {
  const SpeedPolytope poly = BuildPolytope(3.0, 30.0);
  const auto low = Barycentric(poly, 1.0);
  EXPECT_TRUE(low.clamped);
  EXPECT_EQ(low.alpha, (std::array<double, 3>{1, 0, 0}));
  const auto high = Barycentric(poly, 45.0);
  EXPECT_TRUE(high.clamped);
  EXPECT_EQ(high.alpha, (std::array<double, 3>{0, 1, 0}));
  EXPECT_FALSE(Barycentric(poly, 10.0).clamped);
}

GainSchedule RandomSchedule(std::mt19937* rng, bool common_p) {
  std::normal_distribution<double> g;
  const int n_v = 4, n_r = 3, n = n_v + n_r;
  GainSchedule s;
  s.polytope = BuildPolytope(3.0, 30.0);
  s.n_v = n_v;
  s.n_r = n_r;
  MatrixXd shared(n, n);
  for (int i = 0; i < shared.size(); ++i) shared.data()[i] = g(*rng);
  for (int v = 0; v < 3; ++v) {
    MatrixXd L(n, n), Z(1, n);
    for (int i = 0; i < L.size(); ++i) L.data()[i] = g(*rng);
    for (int i = 0; i < Z.size(); ++i) Z.data()[i] = g(*rng);
    if (common_p) L = shared;
    const MatrixXd P = L * L.transpose() + MatrixXd::Identity(n, n);
    const RowVectorXd K = -P.ldlt().solve(Z.transpose()).transpose();
    VertexGain gain;
    gain.Kv = K.head(n_v);
    gain.Kr = K.tail(n_r);
    gain.P = P;
    gain.Z = Z;
    s.vertices.push_back(gain);
  }
  return s;
}

TEST(SchedulingTest, VertexRecoveryInBothModes) {
  std::mt19937 rng(9);
  GainSchedule s = RandomSchedule(&rng, false);
  for (auto mode : {InterpolationMode::kGain, InterpolationMode::kLyapunov}) {
    s.mode = mode;
    for (int v = 0; v < 3; ++v) {
      BarycentricCoords e;
      e.alpha = {0, 0, 0};
      e.alpha[v] = 1.0;
      const RowVectorXd K = InterpolateGains(s, e);
      EXPECT_LT((K - s.vertices[v].K()).cwiseAbs().maxCoeff(),
                1e-12 * s.vertices[v].K().norm());
    }
  }
}

TEST(SchedulingTest, ConstantScheduleIsConstant) {
  GainSchedule s;
  s.polytope = BuildPolytope(3.0, 30.0);
  s.n_v = 4;
  s.n_r = 2;
  VertexGain g;
  g.Kv = RowVectorXd::LinSpaced(4, 1.0, 4.0);
  g.Kr = RowVectorXd::LinSpaced(2, -1.0, -2.0);
  s.vertices = {g, g, g};
  for (double v = 3.0; v <= 30.0; v += 1.5) {
    EXPECT_LT((GainsAtSpeed(s, v) - g.K()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(SchedulingTest, CommonLyapunovMatrixReducesToGainBlend) {
  std::mt19937 rng(13);
  GainSchedule s = RandomSchedule(&rng, true);
  for (double v = 3.0; v <= 30.0; v += 2.25) {
    s.mode = InterpolationMode::kLyapunov;
    const RowVectorXd a = GainsAtSpeed(s, v);
    s.mode = InterpolationMode::kGain;
    const RowVectorXd b = GainsAtSpeed(s, v);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10 * b.norm()) << v;
  }
}

TEST(SchedulingTest, SingularInterpolatedLyapunovMatrix) {
  std::mt19937 rng(17);
  GainSchedule s = RandomSchedule(&rng, false);
  s.mode = InterpolationMode::kLyapunov;
  for (auto& v : s.vertices) v.P = MatrixXd::Zero(7, 7);
  try {
    GainsAtSpeed(s, 10.0);
    FAIL() << "expected an interpolation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInterpolation);
  }
}

TEST(SchedulingTest, ModeNames) {
  EXPECT_EQ(ParseInterpolationMode("gain"), InterpolationMode::kGain);
  EXPECT_EQ(ParseInterpolationMode("lyapunov"), InterpolationMode::kLyapunov);
  EXPECT_EQ(ParseInterpolationMode("paper"), InterpolationMode::kLyapunov);
  EXPECT_THROW(ParseInterpolationMode("linear"), Error);
}

}  // namespace
}  // namespace lpvp
