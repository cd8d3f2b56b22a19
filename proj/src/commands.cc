#include "lpvp/commands.h"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

namespace lpvp {
namespace {

namespace fs = std::filesystem;

void PrintMatrix(std::ostream& out, const std::string& name, const MatrixXd& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? " " : "") << m(i, j);
    }
    out << '\n';
  }
  out << '\n';
}

std::string JoinPath(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  Require(!ec, ErrorKind::kIo, "cannot create output directory '" + dir + "'");
}

std::string Tag(const std::string& method, bool uncertain) {
  return method + (uncertain ? "_uncertain" : "_certain");
}

void Record(CommandResult* result, const std::string& path, const std::string& text) {
  WriteTextFile(path, text);
  result->files.push_back(path);
}

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kDomain:
      return 2;
    case ErrorKind::kSynthesis:
      return 3;
    case ErrorKind::kVerification:
      return 4;
    default:
      return 1;
  }
}

std::string ModelDump(const ToolConfig& config) {
  config.Validate();
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# variant " << (config.variant == ErrorModelVariant::kPaper ? "paper" : "standard")
      << ", T " << config.preview.T << ", N " << config.preview.N << "\n\n";
  for (double vx : config.model_speeds) {
    const ContinuousPlant ct = BuildErrorModelCt(config.vehicle, vx, config.variant);
    const AugmentedPlant aug = BuildAugmentedPlant(
        config.vehicle, config.preview, SchedulingPoint::OnCurve(vx), config.variant);
    out << "# Vx " << vx << "\n";
    PrintMatrix(out, "A_ve", ct.A);
    PrintMatrix(out, "B_v", ct.B_u);
    PrintMatrix(out, "B_psi", ct.B_w);
    PrintMatrix(out, "A_aug", aug.plant.A);
    PrintMatrix(out, "B_v_aug", aug.plant.B_u);
    PrintMatrix(out, "B_w_aug", aug.plant.B_w);
    PrintMatrix(out, "C_aug", aug.plant.C);
  }
  return out.str();
}

CommandResult RunSynth(const ToolConfig& config, const std::string& out_dir) {
  config.Validate();
  EnsureDir(out_dir);
  CommandResult result;
  std::ostringstream text;
  text << std::setprecision(8);

  const GainSchedule lq =
      BuildLqSchedule(config.FamilySpec(false), config.MakeDareOptions());
  Record(&result, JoinPath(out_dir, "schedule_lq.json"), SerializeSchedule(lq));
  text << "lq: per-vertex DARE gains written\n";
  for (size_t i = 0; i < lq.vertices.size(); ++i) {
    text << "  vertex " << i + 1 << ": max |Kv| " << lq.vertices[i].Kv.cwiseAbs().maxCoeff()
         << ", max |Kr| " << lq.vertices[i].Kr.cwiseAbs().maxCoeff() << "\n";
  }
  if (config.synthesis.method == "lq") {
    result.text = text.str();
    return result;
  }

  const SynthesisOptions options = config.MakeSynthesisOptions();
  std::vector<bool> families{false};
  if (config.synthesis.uncertain) families.push_back(true);
  std::vector<double> mus;
  for (bool uncertain : families) {
    const SynthesisResult r = Synthesize(config.FamilySpec(uncertain), options);
    const std::string tag = Tag(config.synthesis.method, uncertain);
    Record(&result, JoinPath(out_dir, "schedule_" + tag + ".json"),
           SerializeSchedule(r.schedule));
    Record(&result, JoinPath(out_dir, "report_" + tag + ".json"), SynthesisReportJson(r));
    Record(&result, JoinPath(out_dir, "report_" + tag + ".txt"), r.ToText());
    text << "\n[" << tag << "]\n" << r.ToText();
    for (const auto& w : r.warnings) result.warnings.push_back(tag + ": " + w);
    if (!r.verification.Passed()) result.exit_code = 4;
    mus.push_back(r.mu());
  }
  if (mus.size() == 2) {
    text << "\nmu certain " << mus[0] << ", uncertain " << mus[1] << "\n";
    // A larger model set can only raise the optimum; allow solver tolerance.
    if (mus[1] < mus[0] * (1.0 - 10.0 * config.synthesis.opt_tol)) {
      result.warnings.push_back("uncertain mu is below certain mu");
    }
  }
  result.text = text.str();
  return result;
}

VerificationReport CheckSchedule(const GainSchedule& schedule,
                                 const ToolConfig& config) {
  config.Validate();
  Require(schedule.n_r == config.preview.N, ErrorKind::kConfig,
          "schedule has " + std::to_string(schedule.n_r) +
              " preview gains but the config sets N = " +
              std::to_string(config.preview.N));
  const bool uncertain = schedule.metadata.uncertain || config.synthesis.uncertain;
  VerifyOptions verify;
  verify.grid_points = config.synthesis.verify_grid;
  verify.sweep_points = config.synthesis.sweep_points;
  verify.mu = schedule.metadata.mu;
  // A bound for the nominal family says nothing about the corner models.
  if (uncertain && !schedule.metadata.uncertain) verify.mu.reset();
  if (schedule.metadata.zeta_p && schedule.metadata.pole_scope == "vehicle-block") {
    verify.zeta_p = schedule.metadata.zeta_p;
  }
  return VerifySchedule(schedule, config.FamilySpec(uncertain), verify);
}

CommandResult RunCheck(const GainSchedule& schedule, const ToolConfig& config,
                       const std::string& out_dir) {
  const VerificationReport report = CheckSchedule(schedule, config);
  CommandResult result;
  EnsureDir(out_dir);
  Record(&result, JoinPath(out_dir, "verification_report.json"),
         VerificationReportJson(report));
  result.text = report.ToText();
  result.exit_code = report.Passed() ? 0 : 4;
  return result;
}

CommandResult RunSimulate(const GainSchedule& schedule, const ToolConfig& config,
                          const std::string& out_dir) {
  config.Validate();
  EnsureDir(out_dir);
  CommandResult result;
  const SimOptions options = config.MakeSimOptions();
  std::ostringstream table;
  table << "scenario,speed,steady_state_error,max_abs_error,rms_error,max_abs_steer,"
           "aborted\n";
  std::ostringstream text;
  text << std::left << std::setw(24) << "scenario" << std::right << std::setw(8)
       << "speed" << std::setw(14) << "steady [m]" << std::setw(14) << "max [m]"
       << std::setw(14) << "steer [rad]" << "\n";
  for (const Scenario& scenario : config.SelectedScenarios()) {
    const SimulationTrace trace = Run(scenario, schedule, options);
    std::ostringstream csv;
    WriteTraceCsv(trace, csv);
    Record(&result, JoinPath(out_dir, "trace_" + scenario.name + ".csv"), csv.str());
    const TraceSummary s = trace.Summary();
    const double speed = scenario.speed.values.front();
    table << std::setprecision(17) << scenario.name << ',' << speed << ','
          << s.steady_state_error << ',' << s.max_abs_error << ',' << s.rms_error
          << ',' << s.max_abs_steer << ',' << (trace.aborted ? 1 : 0) << '\n';
    text << std::left << std::setw(24) << scenario.name << std::right
         << std::setw(8) << std::setprecision(4) << speed << std::setw(14)
         << std::setprecision(4) << s.steady_state_error << std::setw(14)
         << s.max_abs_error << std::setw(14) << s.max_abs_steer << "\n";
    if (trace.aborted) {
      result.warnings.push_back(scenario.name + ": " + trace.message);
      result.exit_code = 1;
    }
    if (trace.speed_clamped) {
      result.warnings.push_back(scenario.name +
                                ": speed left the scheduling interval and was clamped");
    }
  }
  Record(&result, JoinPath(out_dir, "summary.csv"), table.str());
  result.text = text.str();
  return result;
}

CommandResult RunExport(const GainSchedule& schedule, const ToolConfig& config,
                        const std::string& out_dir) {
  config.Validate();
  schedule.Validate();
  EnsureDir(out_dir);
  CommandResult result;

  std::ostringstream csv;
  csv << "vx,alpha1,alpha2,alpha3";
  for (int i = 0; i < schedule.n_v; ++i) csv << ",Kv" << i + 1;
  for (int i = 0; i < schedule.n_r; ++i) csv << ",Kr" << i + 1;
  csv << '\n' << std::setprecision(17);
  const int points = config.synthesis.verify_grid;
  const double lo = schedule.polytope.v_min;
  const double hi = schedule.polytope.v_max;
  for (int i = 0; i < points; ++i) {
    const double vx = lo + (hi - lo) * i / (points - 1);
    const BarycentricCoords alpha = Barycentric(schedule.polytope, vx);
    const RowVectorXd K = InterpolateGains(schedule, alpha);
    csv << vx << ',' << alpha.alpha[0] << ',' << alpha.alpha[1] << ',' << alpha.alpha[2];
    for (Eigen::Index k = 0; k < K.size(); ++k) csv << ',' << K[k];
    csv << '\n';
  }
  Record(&result, JoinPath(out_dir, "gains.csv"), csv.str());

  if (config.synthesis.method != "lq") {
    std::vector<int> vertex_of;
    const auto plants =
        BuildFamilyPlants(config.FamilySpec(config.synthesis.uncertain), &vertex_of);
    const HinfProblem problem =
        BuildHinfProblem(plants, vertex_of, 3, config.MakeSynthesisOptions());
    std::ostringstream sdpa;
    problem.problem.WriteSdpa(sdpa);
    Record(&result, JoinPath(out_dir, "hinf_problem.dat-s"), sdpa.str());
  }
  std::ostringstream text;
  for (const auto& f : result.files) text << "wrote " << f << "\n";
  result.text = text.str();
  return result;
}

}  // namespace lpvp
