#include "lpvp/config.h"

#include <random>

#include <gtest/gtest.h>

namespace lpvp {
namespace {

std::string ErrorOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "expected a config error";
  return "";
}

TEST(ConfigTest, CanonicalFormRoundTrips) {
  const std::string text = SerializeConfig(ToolConfig::Defaults());
  const ToolConfig parsed = ParseConfig(text);
  EXPECT_EQ(SerializeConfig(parsed), text);
}

TEST(ConfigTest, EditedConfigRoundTrips) {
  ToolConfig c = ToolConfig::Defaults();
  c = ApplyOverride(c, "vehicle.m=1723.25");
  c = ApplyOverride(c, "synthesis.method=hinf-paper");
  c = ApplyOverride(c, "simulation.run=[\"straight\"]");
  c = ApplyOverride(c, "scenarios.0.path.waypoints=[[0,0],[10,0.1]]");
  const std::string text = SerializeConfig(c);
  EXPECT_EQ(SerializeConfig(ParseConfig(text)), text);
}

TEST(ConfigTest, MissingMassIsNamed) {
  const std::string msg = ErrorOf([] {
    ParseConfig(R"({"vehicle": {"Iz": 2500, "Lf": 1.1, "Lr": 1.6,
                                "Caf": 60000, "Car": 60000}})");
  });
  EXPECT_NE(msg.find("vehicle.m"), std::string::npos) << msg;
}

TEST(ConfigTest, MissingVehicleSectionIsNamed) {
  const std::string msg = ErrorOf([] { ParseConfig("{}"); });
  EXPECT_NE(msg.find("vehicle"), std::string::npos);
  EXPECT_NO_THROW(ParseConfig("{}", false));
}

TEST(ConfigTest, UnknownKeysAreRejected) {
  const std::string msg = ErrorOf([] {
    ParseConfig(R"({"preview": {"T": 0.02, "horizon": 1.0}})", false);
  });
  EXPECT_NE(msg.find("preview.horizon"), std::string::npos) << msg;
}

TEST(ConfigTest, TypeErrorsAreNamed) {
  std::string msg = ErrorOf([] { ParseConfig(R"({"preview": {"N": 50.5}})", false); });
  EXPECT_NE(msg.find("preview.N"), std::string::npos) << msg;
  msg = ErrorOf([] { ParseConfig(R"({"weights": {"R": "big"}})", false); });
  EXPECT_NE(msg.find("weights.R"), std::string::npos) << msg;
  msg = ErrorOf([] { ParseConfig(R"({"pole_region": {"scope": "half"}})", false); });
  EXPECT_NE(msg.find("pole_region.scope"), std::string::npos) << msg;
}

TEST(ConfigTest, SemanticValidation) {
  std::string msg = ErrorOf([] { ParseConfig(R"({"weights": {"R": 0}})", false); });
  EXPECT_NE(msg.find("weights.R"), std::string::npos) << msg;
  msg = ErrorOf([] {
    ParseConfig(R"({"simulation": {"run": ["no-such-scenario"]}})", false);
  });
  EXPECT_NE(msg.find("no-such-scenario"), std::string::npos) << msg;
  msg = ErrorOf([] { ParseConfig("{\"preview\": {", false); });
  EXPECT_FALSE(msg.empty());
}

TEST(ConfigTest, DottedOverrides) {
  ToolConfig c = ToolConfig::Defaults();
  c = ApplyOverride(c, "pole_region.zeta_p=0.1");
  EXPECT_EQ(c.pole_region.zeta_p, 0.1);
  c = ApplyOverride(c, "synthesis.method=lq");
  EXPECT_EQ(c.synthesis.method, "lq");
  c = ApplyOverride(c, "model.speeds=[5, 12.5]");
  EXPECT_EQ(c.model_speeds, (std::vector<double>{5.0, 12.5}));
  c = ApplyOverride(c, "pole_region.enabled=false");
  EXPECT_FALSE(c.pole_region.enabled);
  c = ApplyOverride(c, "scenarios.0.speeds.1=11");
  EXPECT_EQ(c.scenarios[0].speeds[1], 11.0);
  c = ApplyOverride(c, "output_dir=results/run 1");
  EXPECT_EQ(c.output_dir, "results/run 1");

  EXPECT_NE(ErrorOf([&] { ApplyOverride(c, "preview.M=3"); }).find("preview.M"),
            std::string::npos);
  ErrorOf([&] { ApplyOverride(c, "preview.N"); });
  ErrorOf([&] { ApplyOverride(c, "preview.N=abc"); });
  ErrorOf([&] { ApplyOverride(c, "scenarios.9.name=x"); });
  ErrorOf([&] { ApplyOverride(c, "synthesis.method=h2"); });
}

TEST(ConfigTest, ScenarioExpansion) {
  const ToolConfig c = ToolConfig::Defaults();
  const auto all = c.SelectedScenarios();
  ASSERT_GE(all.size(), 7u);
  EXPECT_EQ(all[0].name, "lane-change@5");
  EXPECT_EQ(all[5].name, "lane-change@30");
  EXPECT_EQ(all[5].speed.values.front(), 30.0);
  const ToolConfig only = ApplyOverride(c, "simulation.run=[\"straight\"]");
  ASSERT_EQ(only.SelectedScenarios().size(), 1u);
  EXPECT_EQ(only.SelectedScenarios()[0].name, "straight");
}

TEST(ConfigTest, DerivedOptions) {
  ToolConfig c = ToolConfig::Defaults();
  c = ApplyOverride(c, "synthesis.method=hinf-paper");
  c = ApplyOverride(c, "synthesis.opt_tol=1e-8");
  const SynthesisOptions o = c.MakeSynthesisOptions();
  EXPECT_EQ(o.mode, SynthesisMode::kPerVertexP);
  EXPECT_EQ(o.solver.opt_tol, 1e-8);
  EXPECT_EQ(o.zeta_p, 0.05);
  EXPECT_EQ(o.scope, PoleScope::kVehicleBlock);
  EXPECT_EQ(c.FamilySpec(true).family, ModelFamily::kUncertain);
}

GainSchedule RandomSchedule() {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> exponent(-300, 300);
  auto draw = [&] { return g(rng) * std::pow(10.0, exponent(rng) / 10); };
  GainSchedule s;
  s.polytope = BuildPolytope(3.0, 30.0);
  s.mode = InterpolationMode::kLyapunov;
  s.n_v = 4;
  s.n_r = 6;
  for (int v = 0; v < 3; ++v) {
    VertexGain gain;
    gain.Kv = RowVectorXd::NullaryExpr(4, draw);
    gain.Kr = RowVectorXd::NullaryExpr(6, draw);
    MatrixXd P = MatrixXd::NullaryExpr(10, 10, draw);
    gain.P = (P + P.transpose()).eval();
    gain.Z = MatrixXd::NullaryExpr(1, 10, draw);
    s.vertices.push_back(gain);
  }
  s.vertices[0].Kv[0] = 0.1;
  s.vertices[0].Kv[1] = 4.9406564584124654e-324;
  s.vertices[0].Kv[2] = -0.0;
  s.vertices[0].Kv[3] = 1.7976931348623157e308;
  s.metadata.method = "hinf-common-p";
  s.metadata.mu = 5.0179689123456789;
  s.metadata.zeta_p = 0.05;
  s.metadata.pole_scope = "vehicle-block";
  s.metadata.q1 = 0.95;
  s.metadata.q2 = 3e-3;
  s.metadata.R = 0.25;
  s.metadata.T = 0.02;
  s.metadata.timestamp = "2026-01-01T00:00:00Z";
  return s;
}

void ExpectBitEqual(const MatrixXd& a, const MatrixXd& b) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    EXPECT_EQ(std::memcmp(&a.data()[i], &b.data()[i], sizeof(double)), 0)
        << a.data()[i] << " vs " << b.data()[i];
  }
}

TEST(ConfigTest, ScheduleRoundTripIsBitExact) {
  const GainSchedule s = RandomSchedule();
  const std::string text = SerializeSchedule(s);
  const GainSchedule t = ParseSchedule(text);
  for (int v = 0; v < 3; ++v) {
    ExpectBitEqual(s.vertices[v].Kv, t.vertices[v].Kv);
    ExpectBitEqual(s.vertices[v].Kr, t.vertices[v].Kr);
    ExpectBitEqual(*s.vertices[v].P, *t.vertices[v].P);
    ExpectBitEqual(*s.vertices[v].Z, *t.vertices[v].Z);
    ExpectBitEqual(s.polytope.vertices[v], t.polytope.vertices[v]);
  }
  EXPECT_EQ(*t.metadata.mu, *s.metadata.mu);
  EXPECT_EQ(t.metadata.timestamp, s.metadata.timestamp);
  EXPECT_EQ(t.mode, s.mode);
  EXPECT_EQ(SerializeSchedule(t), text);
}

TEST(ConfigTest, ScheduleReportsNormBound) {
  const std::string text = SerializeSchedule(RandomSchedule());
  EXPECT_NE(text.find("\"norm_bound\": 2.24008"), std::string::npos);
}

TEST(ConfigTest, ScheduleDimensionMismatchRejected) {
  GainSchedule s = RandomSchedule();
  std::string text = SerializeSchedule(s);
  const auto pos = text.find("\"n_r\": 6");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 8, "\"n_r\": 7");
  EXPECT_THROW(ParseSchedule(text), Error);
}

TEST(ConfigTest, GainOnlyScheduleOmitsLyapunovData) {
  GainSchedule s = RandomSchedule();
  s.mode = InterpolationMode::kGain;
  s.metadata.mu.reset();
  for (auto& v : s.vertices) {
    v.P.reset();
    v.Z.reset();
  }
  const std::string text = SerializeSchedule(s);
  EXPECT_EQ(text.find("\"P\""), std::string::npos);
  EXPECT_NE(text.find("\"mu\": null"), std::string::npos);
  const GainSchedule t = ParseSchedule(text);
  EXPECT_FALSE(t.metadata.mu.has_value());
  EXPECT_FALSE(t.vertices[0].P.has_value());
}

}  // namespace
}  // namespace lpvp
