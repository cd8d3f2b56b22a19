#include "lpvp/lmi_synthesis.h"

#include <gtest/gtest.h>

namespace lpvp {
namespace {

MatrixXd S1(double v) { return MatrixXd::Constant(1, 1, v); }

GeneralizedPlant Scalar(double a, double b_u, double b_w, double c_z, double d_zu) {
  GeneralizedPlant g;
  g.A = S1(a);
  g.B_u = S1(b_u);
  g.B_w = S1(b_w);
  g.C_z = S1(c_z);
  g.D_zu = S1(d_zu);
  g.D_zw = S1(0.0);
  g.n_v = 1;
  g.n_r = 0;
  return g;
}

// P - I >= 0 keeps the Lyapunov variable away from the trivial P = 0.
void RequireAtLeastIdentity(sdp::Problem* p, const LyapunovVariable& P) {
  const int c = p->AddConstraint("P >= I", P.n);
  AddLyapunovProduct(p, c, P, 0.5 * MatrixXd::Identity(P.n, P.n),
                     MatrixXd::Identity(P.n, P.n));
  p->AddConstant(c, -MatrixXd::Identity(P.n, P.n));
}

void FixScalar(sdp::Problem* p, int var, double value) {
  const int lo = p->AddConstraint("lower", 1);
  p->AddScalarTerm(lo, var, S1(1.0));
  p->AddConstant(lo, S1(-value));
  const int hi = p->AddConstraint("upper", 1);
  p->AddScalarTerm(hi, var, S1(-1.0));
  p->AddConstant(hi, S1(value));
}

// Closed loop of A = 0.5 under K = -0.5 is x+ = w, z = x: H(z) = 1/z.
sdp::Status BoundFeasibility(double mu_value) {
  const GeneralizedPlant g = Scalar(0.5 - 0.5, 1.0, 1.0, 1.0, 0.0);
  sdp::Problem p;
  const LyapunovVariable P = AddLyapunovVariable(&p, "P", 1);
  const int mu = p.AddScalar("mu");
  AddHinfLmi(&p, g, P, -1, mu, "hinf");
  FixScalar(&p, mu, mu_value);
  return sdp::Solve(p).status;
}

TEST(LmiSynthesisTest, ScalarBoundedRealThreshold) {
  EXPECT_EQ(BoundFeasibility(1.1), sdp::Status::kOptimal);
  EXPECT_EQ(BoundFeasibility(0.9), sdp::Status::kInfeasible);

  const GeneralizedPlant g = Scalar(0.0, 1.0, 1.0, 1.0, 0.0);
  sdp::Problem p;
  const LyapunovVariable P = AddLyapunovVariable(&p, "P", 1);
  const int mu = p.AddScalar("mu");
  AddHinfLmi(&p, g, P, -1, mu, "hinf");
  p.SetObjective(mu, 1.0);
  const sdp::Solution s = sdp::Solve(p);
  ASSERT_EQ(s.status, sdp::Status::kOptimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-5);
  EXPECT_NEAR(HinfNormSquared(g.A, g.B_w, g.C_z, g.D_zw), 1.0, 1e-12);
}

TEST(LmiSynthesisTest, SchurPlantAdmitsBound) {
  const GeneralizedPlant g = Scalar(0.8, 1.0, 1.0, 1.0, 0.3);
  const HinfSolution sol = SolveHinf({g}, {0}, 1, [] {
    SynthesisOptions o;
    o.pole_region = false;
    return o;
  }());
  EXPECT_GT(sol.mu, 0.0);
  EXPECT_TRUE(std::isfinite(sol.mu));
}

TEST(LmiSynthesisTest, FixedIdentityLyapunovWithUnstablePlant) {
  const GeneralizedPlant g = Scalar(1.5, 1.0, 1.0, 1.0, 0.0);
  sdp::Problem p;
  const LyapunovVariable P = AddLyapunovVariable(&p, "P", 1);
  const int mu = p.AddScalar("mu");
  AddHinfLmi(&p, g, P, -1, mu, "hinf");
  RequireAtLeastIdentity(&p, P);
  const int c = p.AddConstraint("P <= I", 1);
  AddLyapunovProduct(&p, c, P, S1(-0.5), S1(1.0));
  p.AddConstant(c, S1(1.0));
  p.SetObjective(mu, 1.0);
  EXPECT_EQ(sdp::Solve(p).status, sdp::Status::kInfeasible);
}

TEST(LmiSynthesisTest, UnstabilizablePlantRaisesSynthesisError) {
  const GeneralizedPlant g = Scalar(1.5, 0.0, 1.0, 1.0, 0.0);
  SynthesisOptions o;
  o.pole_region = false;
  try {
    SolveHinf({g}, {0}, 1, o);
    FAIL() << "expected infeasibility";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSynthesis);
  }
}

TEST(LmiSynthesisTest, PoleRegionFeasibleForPositiveSpectrum) {
  sdp::Problem p;
  const LyapunovVariable P = AddLyapunovVariable(&p, "P", 2);
  RequireAtLeastIdentity(&p, P);
  const MatrixXd A = Eigen::Vector2d(0.3, 0.5).asDiagonal();
  AddPoleConstraint(&p, A, MatrixXd::Zero(2, 1), P, -1, LMIRegion::Positivity(0.0),
                    MatrixXd::Identity(2, 2), "pole");
  const sdp::Solution s = sdp::Solve(p);
  ASSERT_EQ(s.status, sdp::Status::kOptimal) << s.message;
  EXPECT_TRUE(sdp::CheckSolution(p, s.x).Feasible(1e-7));
}

TEST(LmiSynthesisTest, PoleRegionRejectsNegativeEigenvalue) {
  sdp::Problem p;
  const LyapunovVariable P = AddLyapunovVariable(&p, "P", 1);
  RequireAtLeastIdentity(&p, P);
  AddPoleConstraint(&p, S1(-0.2), S1(0.0), P, -1, LMIRegion::Positivity(0.1),
                    S1(1.0), "pole");
  EXPECT_EQ(sdp::Solve(p).status, sdp::Status::kInfeasible);
}

TEST(LmiSynthesisTest, RegionBoundaryIsSingular) {
  const double zeta = 0.2;
  const LMIRegion region = LMIRegion::Positivity(zeta);
  EXPECT_NEAR(std::abs(region.Characteristic({zeta, 0.0}).determinant()), 0.0, 1e-15);
  // Determinant 4 zeta (Re z - zeta) on the real axis.
  EXPECT_NEAR(region.Characteristic({0.7, 0.0}).determinant().real(),
              4 * zeta * (0.7 - zeta), 1e-14);
  EXPECT_THROW(LMIRegion::Positivity(1.0).Validate(), Error);
  EXPECT_NO_THROW(LMIRegion::Positivity(0.0).Validate());
}

TEST(LmiSynthesisTest, GeneralizedPlantWeights) {
  PreviewConfig config;
  config.N = 4;
  const AugmentedPlant aug =
      BuildAugmentedPlant(VehicleParams{}, config, SchedulingPoint::OnCurve(10.0));
  CostWeights control_only{0.0, 0.0, 1.0};
  GeneralizedPlant g = BuildGeneralizedPlant(aug, control_only);
  EXPECT_EQ(g.C_z.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.D_zu, (MatrixXd(3, 1) << 0, 0, 1).finished());

  g = BuildGeneralizedPlant(aug, CostWeights{});
  EXPECT_NEAR(g.C_z(0, 0), 0.97467943448089633, 1e-15);
  EXPECT_NEAR(g.C_z(1, 2), 0.054772255750516613, 1e-15);
  EXPECT_EQ(g.D_zw.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.B_w.cols(), 2);
}

PlantFamilySpec SmallFamily() {
  PlantFamilySpec spec;
  spec.preview.N = 10;
  return spec;
}

TEST(LmiSynthesisTest, SingleVertexBoundedReal) {
  const PlantFamilySpec spec = SmallFamily();
  const AugmentedPlant aug = BuildAugmentedPlant(spec.vehicle, spec.preview,
                                                 SchedulingPoint::OnCurve(12.0));
  const GeneralizedPlant g = BuildGeneralizedPlant(aug, spec.weights);
  SynthesisOptions o;
  o.pole_region = false;
  const HinfSolution sol = SolveHinf({g}, {0}, 1, o);
  const RowVectorXd K = -sol.P[0].ldlt().solve(sol.Z[0].transpose()).transpose();
  const MatrixXd A_cl = g.A - g.B_u * K;
  ASSERT_LT(SpectralRadius(A_cl), 1.0);
  const double norm_sq = HinfNormSquared(A_cl, g.B_w, g.C_z - g.D_zu * K, g.D_zw);
  EXPECT_LE(norm_sq, sol.mu * (1.0 + 1e-4));
  EXPECT_GE(norm_sq, 0.5 * sol.mu);
}

TEST(LmiSynthesisTest, CommonPScheduleVerifies) {
  const PlantFamilySpec spec = SmallFamily();
  const SynthesisResult r = Synthesize(spec, SynthesisOptions{});
  EXPECT_TRUE(r.verification.Passed()) << r.ToText();
  EXPECT_TRUE(r.warnings.empty());
  for (const auto& [label, value] : r.solution.block_min_eigenvalues) {
    EXPECT_GE(value, -1e-7) << label;
  }
  EXPECT_EQ(r.schedule.metadata.method, "hinf-common-p");
  ASSERT_TRUE(r.schedule.metadata.mu.has_value());
  EXPECT_EQ(*r.schedule.metadata.mu, r.mu());
  for (const auto& v : r.verification.vertices) {
    EXPECT_GE(v.vehicle_min_re, 0.05 - 1e-6);
  }
}

TEST(LmiSynthesisTest, NoRegionAndZeroRegionBothStabilize) {
  const PlantFamilySpec spec = SmallFamily();
  SynthesisOptions none;
  none.pole_region = false;
  SynthesisOptions zero;
  zero.zeta_p = 0.0;
  const SynthesisResult a = Synthesize(spec, none);
  const SynthesisResult b = Synthesize(spec, zero);
  EXPECT_TRUE(a.verification.grid_schur);
  EXPECT_TRUE(b.verification.grid_schur);
  // The block-diagonal Lyapunov matrix that the region imposes can only
  // raise the optimum.
  EXPECT_GE(b.mu(), a.mu() * (1.0 - 1e-5));
}

TEST(LmiSynthesisTest, PerVertexModeRunsWithWarningsOnly) {
  const PlantFamilySpec spec = SmallFamily();
  SynthesisOptions o;
  o.mode = SynthesisMode::kPerVertexP;
  const SynthesisResult r = Synthesize(spec, o);
  EXPECT_EQ(r.schedule.metadata.method, "hinf-paper");
  EXPECT_LE(r.mu(), Synthesize(spec, SynthesisOptions{}).mu() * (1.0 + 1e-5));
  EXPECT_TRUE(r.verification.vertex_schur);
}

TEST(LmiSynthesisTest, UncertaintyRaisesBound) {
  PlantFamilySpec spec = SmallFamily();
  const double certain = Synthesize(spec, SynthesisOptions{}).mu();
  spec.family = ModelFamily::kUncertain;
  spec.vehicle.stiffness_uncertainty = 0.15;
  const double uncertain = Synthesize(spec, SynthesisOptions{}).mu();
  EXPECT_GE(uncertain, certain * (1.0 - 1e-6));
}

TEST(LmiSynthesisTest, LqScheduleHasNoBound) {
  const GainSchedule s = BuildLqSchedule(SmallFamily());
  EXPECT_EQ(s.metadata.method, "lq");
  EXPECT_FALSE(s.metadata.mu.has_value());
  EXPECT_EQ(s.mode, InterpolationMode::kGain);
  ASSERT_EQ(s.vertices.size(), 3u);
}

TEST(LmiSynthesisTest, ModeAndScopeNames) {
  EXPECT_EQ(ParseSynthesisMode("hinf-common-p"), SynthesisMode::kCommonP);
  EXPECT_EQ(ParseSynthesisMode("hinf-paper"), SynthesisMode::kPerVertexP);
  EXPECT_EQ(ParsePoleScope("vehicle-block"), PoleScope::kVehicleBlock);
  EXPECT_EQ(ParsePoleScope("full"), PoleScope::kFull);
  EXPECT_THROW(ParseSynthesisMode("h2"), Error);
}

}  // namespace
}  // namespace lpvp
