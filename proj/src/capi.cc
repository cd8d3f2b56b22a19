#include "lpvp/lpvp.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "lpvp/commands.h"
#include "lpvp/config.h"

#ifndef LPVP_VERSION
#define LPVP_VERSION "0.0.0"
#endif

struct lpvp_config {
  lpvp::ToolConfig value;
};

struct lpvp_schedule {
  lpvp::GainSchedule value;
};

namespace {

thread_local std::string last_error;

lpvp_status StatusFor(lpvp::ErrorKind kind) {
  return static_cast<lpvp_status>(lpvp::ExitCodeFor(kind));
}

char* Duplicate(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out != nullptr) std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

void Emit(const std::string& text, char** out) {
  if (out != nullptr) *out = Duplicate(text);
}

// Runs `body` with exceptions mapped onto status codes.
template <typename F>
lpvp_status Guard(F&& body) {
  last_error.clear();
  try {
    return body();
  } catch (const lpvp::Error& e) {
    last_error = std::string(lpvp::ToString(e.kind())) + ": " + e.what();
    return StatusFor(e.kind());
  } catch (const std::exception& e) {
    last_error = e.what();
    return LPVP_ERROR;
  } catch (...) {
    last_error = "unknown failure";
    return LPVP_ERROR;
  }
}

lpvp_status Missing(const char* what) {
  last_error = std::string("null argument: ") + what;
  return LPVP_CONFIG;
}

std::string OutDir(const lpvp_config* config, const char* out_dir) {
  return out_dir != nullptr ? out_dir : config->value.output_dir;
}

lpvp_status Finish(const lpvp::CommandResult& result, char** text) {
  std::string out = result.text;
  for (const auto& w : result.warnings) out += "warning: " + w + "\n";
  Emit(out, text);
  if (result.exit_code != 0 && !result.warnings.empty()) {
    last_error = result.warnings.front();
  }
  return static_cast<lpvp_status>(result.exit_code);
}

}  // namespace

extern "C" {

const char* lpvp_version(void) { return LPVP_VERSION; }

const char* lpvp_last_error(void) { return last_error.c_str(); }

void lpvp_string_free(char* text) { std::free(text); }

lpvp_status lpvp_config_default(lpvp_config** out) {
  if (out == nullptr) return Missing("out");
  return Guard([&] {
    *out = new lpvp_config{lpvp::ToolConfig::Defaults()};
    return LPVP_OK;
  });
}

lpvp_status lpvp_config_load(const char* path, lpvp_config** out) {
  if (path == nullptr || out == nullptr) return Missing("path/out");
  return Guard([&] {
    // Unreadable config files are config errors from the caller's view.
    std::ifstream probe(path);
    lpvp::Require(probe.good(), lpvp::ErrorKind::kConfig,
                  std::string("cannot read config file '") + path + "'");
    *out = new lpvp_config{lpvp::LoadConfig(path)};
    return LPVP_OK;
  });
}

lpvp_status lpvp_config_parse(const char* json, lpvp_config** out) {
  if (json == nullptr || out == nullptr) return Missing("json/out");
  return Guard([&] {
    *out = new lpvp_config{lpvp::ParseConfig(json, false)};
    return LPVP_OK;
  });
}

lpvp_status lpvp_config_set(lpvp_config* config, const char* assignment) {
  if (config == nullptr || assignment == nullptr) return Missing("config/assignment");
  return Guard([&] {
    config->value = lpvp::ApplyOverride(config->value, assignment);
    return LPVP_OK;
  });
}

lpvp_status lpvp_config_to_json(const lpvp_config* config, char** out) {
  if (config == nullptr || out == nullptr) return Missing("config/out");
  return Guard([&] {
    Emit(lpvp::SerializeConfig(config->value), out);
    return LPVP_OK;
  });
}

void lpvp_config_free(lpvp_config* config) { delete config; }

lpvp_status lpvp_schedule_load(const char* path, lpvp_schedule** out) {
  if (path == nullptr || out == nullptr) return Missing("path/out");
  return Guard([&] {
    *out = new lpvp_schedule{lpvp::LoadSchedule(path)};
    return LPVP_OK;
  });
}

lpvp_status lpvp_schedule_parse(const char* json, lpvp_schedule** out) {
  if (json == nullptr || out == nullptr) return Missing("json/out");
  return Guard([&] {
    *out = new lpvp_schedule{lpvp::ParseSchedule(json)};
    return LPVP_OK;
  });
}

lpvp_status lpvp_schedule_save(const lpvp_schedule* schedule, const char* path) {
  if (schedule == nullptr || path == nullptr) return Missing("schedule/path");
  return Guard([&] {
    lpvp::SaveSchedule(schedule->value, path);
    return LPVP_OK;
  });
}

lpvp_status lpvp_schedule_to_json(const lpvp_schedule* schedule, char** out) {
  if (schedule == nullptr || out == nullptr) return Missing("schedule/out");
  return Guard([&] {
    Emit(lpvp::SerializeSchedule(schedule->value), out);
    return LPVP_OK;
  });
}

void lpvp_schedule_free(lpvp_schedule* schedule) { delete schedule; }

lpvp_status lpvp_schedule_dims(const lpvp_schedule* schedule, int* n_v, int* n_r) {
  if (schedule == nullptr) return Missing("schedule");
  if (n_v != nullptr) *n_v = schedule->value.n_v;
  if (n_r != nullptr) *n_r = schedule->value.n_r;
  last_error.clear();
  return LPVP_OK;
}

lpvp_status lpvp_schedule_gains(const lpvp_schedule* schedule, double vx,
                                double* K, size_t length) {
  if (schedule == nullptr || K == nullptr) return Missing("schedule/K");
  return Guard([&] {
    const Eigen::RowVectorXd gains = lpvp::GainsAtSpeed(schedule->value, vx);
    lpvp::Require(length == static_cast<size_t>(gains.size()),
                  lpvp::ErrorKind::kConfig,
                  "gain buffer needs n_v + n_r = " + std::to_string(gains.size()) +
                      " entries");
    for (Eigen::Index i = 0; i < gains.size(); ++i) K[i] = gains[i];
    return LPVP_OK;
  });
}

lpvp_status lpvp_schedule_mu(const lpvp_schedule* schedule, double* mu) {
  if (schedule == nullptr || mu == nullptr) return Missing("schedule/mu");
  return Guard([&] {
    lpvp::Require(schedule->value.metadata.mu.has_value(), lpvp::ErrorKind::kConfig,
                  "schedule has no norm bound (method " +
                      schedule->value.metadata.method + ")");
    *mu = *schedule->value.metadata.mu;
    return LPVP_OK;
  });
}

lpvp_status lpvp_synthesize(const lpvp_config* config, int uncertain,
                            lpvp_schedule** out, char** report) {
  if (config == nullptr || out == nullptr) return Missing("config/out");
  return Guard([&] {
    const lpvp::ToolConfig& c = config->value;
    c.Validate();
    if (c.synthesis.method == "lq") {
      *out = new lpvp_schedule{
          lpvp::BuildLqSchedule(c.FamilySpec(false), c.MakeDareOptions())};
      Emit("method: lq\n", report);
      return LPVP_OK;
    }
    const lpvp::SynthesisResult r =
        lpvp::Synthesize(c.FamilySpec(uncertain != 0), c.MakeSynthesisOptions());
    *out = new lpvp_schedule{r.schedule};
    Emit(r.ToText(), report);
    return LPVP_OK;
  });
}

lpvp_status lpvp_model_dump(const lpvp_config* config, char** text) {
  if (config == nullptr) return Missing("config");
  return Guard([&] {
    Emit(lpvp::ModelDump(config->value), text);
    return LPVP_OK;
  });
}

lpvp_status lpvp_synth(const lpvp_config* config, const char* out_dir, char** text) {
  if (config == nullptr) return Missing("config");
  return Guard([&] {
    return Finish(lpvp::RunSynth(config->value, OutDir(config, out_dir)), text);
  });
}

lpvp_status lpvp_check(const lpvp_schedule* schedule, const lpvp_config* config,
                       const char* out_dir, char** text) {
  if (schedule == nullptr || config == nullptr) return Missing("schedule/config");
  return Guard([&] {
    return Finish(
        lpvp::RunCheck(schedule->value, config->value, OutDir(config, out_dir)), text);
  });
}

lpvp_status lpvp_simulate(const lpvp_schedule* schedule, const lpvp_config* config,
                          const char* out_dir, char** text) {
  if (schedule == nullptr || config == nullptr) return Missing("schedule/config");
  return Guard([&] {
    return Finish(
        lpvp::RunSimulate(schedule->value, config->value, OutDir(config, out_dir)),
        text);
  });
}

lpvp_status lpvp_export(const lpvp_schedule* schedule, const lpvp_config* config,
                        const char* out_dir, char** text) {
  if (schedule == nullptr || config == nullptr) return Missing("schedule/config");
  return Guard([&] {
    return Finish(
        lpvp::RunExport(schedule->value, config->value, OutDir(config, out_dir)), text);
  });
}

lpvp_status lpvp_trace_summary_load(const char* csv_path, lpvp_trace_summary* out) {
  if (csv_path == nullptr || out == nullptr) return Missing("csv_path/out");
  return Guard([&] {
    std::ifstream in(csv_path);
    lpvp::Require(in.good(), lpvp::ErrorKind::kIo,
                  std::string("cannot open '") + csv_path + "'");
    const lpvp::TraceSummary s = lpvp::ReadTraceCsv(in, csv_path).Summary();
    *out = {s.max_abs_error, s.steady_state_error, s.rms_error, s.max_abs_steer,
            s.max_abs_yaw_rate};
    return LPVP_OK;
  });
}

}  // extern "C"
