#pragma once

#include <string>
#include <vector>

#include "lpvp/config.h"

namespace lpvp {

/// Outcome of a command: human-readable text for stdout, files written, and
/// the process exit status (0 ok, 4 verification failure).
struct CommandResult {
  std::string text;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  int exit_code = 0;
};

/// Matrix dump at every configured model speed. Each matrix is printed as a
/// header line "<name> <rows> <cols>" followed by one line per row.
std::string ModelDump(const ToolConfig& config);

/// Runs the configured synthesis and writes schedule_<tag>.json plus
/// report_<tag>.json and report_<tag>.txt into `out_dir`. H-infinity methods
/// also write the LQ schedule for comparison; with synthesis.uncertain the
/// certain and uncertain families are both synthesized.
CommandResult RunSynth(const ToolConfig& config, const std::string& out_dir);

/// Checks run against the nominal family, and against the stiffness corners
/// too when the schedule or the config is marked uncertain.
VerificationReport CheckSchedule(const GainSchedule& schedule,
                                 const ToolConfig& config);
CommandResult RunCheck(const GainSchedule& schedule, const ToolConfig& config,
                       const std::string& out_dir);

/// Simulates every selected scenario and writes trace_<name>.csv and
/// summary.csv.
CommandResult RunSimulate(const GainSchedule& schedule, const ToolConfig& config,
                          const std::string& out_dir);

/// Gain table over an even speed grid (gains.csv) and the synthesis SDP in
/// SDPA sparse format (hinf_problem.dat-s).
CommandResult RunExport(const GainSchedule& schedule, const ToolConfig& config,
                        const std::string& out_dir);

/// Errors are mapped onto exit statuses: 2 config or domain, 3 synthesis
/// infeasible, 4 verification, 1 anything else.
int ExitCodeFor(ErrorKind kind);

}  // namespace lpvp
