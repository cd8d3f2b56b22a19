#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpvp/lmi_synthesis.h"
#include "lpvp/lq_preview.h"
#include "lpvp/models.h"
#include "lpvp/scheduling.h"
#include "lpvp/simulator.h"

namespace lpvp {

/// A configured scenario. A nonempty `speeds` list runs the scenario once
/// per constant speed, overriding `scenario.speed`.
struct ScenarioSpec {
  Scenario scenario;
  std::vector<double> speeds;

  std::vector<Scenario> Expand() const;
};

/// Every knob of the tool. The JSON key tree mirrors the nesting below; see
/// configs/default.json for the canonical form.
struct ToolConfig {
  VehicleParams vehicle;
  PreviewConfig preview;
  CostWeights weights;
  ErrorModelVariant variant = ErrorModelVariant::kPaper;
  std::vector<double> model_speeds{10.0};

  struct Synthesis {
    std::string method = "hinf-common-p";  // lq | hinf-common-p | hinf-paper
    bool uncertain = false;
    InterpolationMode interpolation = InterpolationMode::kLyapunov;
    double feas_tol = 1e-7;
    double opt_tol = 1e-6;
    int max_iter = 120;
    double lq_tol = 1e-10;
    int lq_max_iter = 10000;
    int verify_grid = 100;
    int sweep_points = 1000;
  } synthesis;

  struct PoleRegion {
    bool enabled = true;
    double zeta_p = 0.05;
    PoleScope scope = PoleScope::kVehicleBlock;
    bool decouple_lyapunov = true;
  } pole_region;

  struct Simulation {
    PreviewFrame preview_frame = PreviewFrame::kReference;
    std::vector<std::string> run;  // scenario names; empty runs all
  } simulation;

  std::vector<ScenarioSpec> scenarios;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  /// Built-in defaults, including the shipped scenario list.
  static ToolConfig Defaults();

  void Validate() const;
  PlantFamilySpec FamilySpec(bool uncertain) const;
  SynthesisOptions MakeSynthesisOptions() const;
  DareOptions MakeDareOptions() const;
  SimOptions MakeSimOptions() const;
  /// Scenarios selected by simulation.run, expanded per speed.
  std::vector<Scenario> SelectedScenarios() const;
};

/// Parses a config document. With `require_vehicle` every vehicle field
/// must be present (a config file describes a specific car); otherwise
/// missing fields keep their defaults. Unknown keys are rejected.
ToolConfig ParseConfig(const std::string& json_text, bool require_vehicle = true);
ToolConfig LoadConfig(const std::string& path);
std::string SerializeConfig(const ToolConfig& config);

/// Applies "dotted.key=value". The value is read as JSON, and as a plain
/// string when it does not parse.
ToolConfig ApplyOverride(const ToolConfig& config, const std::string& assignment);

std::string SerializeSchedule(const GainSchedule& schedule);
GainSchedule ParseSchedule(const std::string& json_text);
GainSchedule LoadSchedule(const std::string& path);
void SaveSchedule(const GainSchedule& schedule, const std::string& path);

std::string SynthesisReportJson(const SynthesisResult& result);
std::string VerificationReportJson(const VerificationReport& report);
std::string TraceSummaryJson(const TraceSummary& summary);

std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace lpvp
