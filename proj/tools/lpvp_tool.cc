// Command-line front end. Everything goes through the C interface.

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lpvp/lpvp.h"

namespace {

struct Flags {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::string mode;
  std::string uncertain;
  std::optional<std::uint64_t> seed;
  std::string schedule_path;
};

using ConfigPtr = std::unique_ptr<lpvp_config, decltype(&lpvp_config_free)>;
using SchedulePtr = std::unique_ptr<lpvp_schedule, decltype(&lpvp_schedule_free)>;

int Report(lpvp_status status) {
  if (status != LPVP_OK && lpvp_last_error()[0] != '\0') {
    std::fprintf(stderr, "error: %s\n", lpvp_last_error());
  }
  return static_cast<int>(status);
}

void Print(char* text) {
  if (text != nullptr) {
    std::fputs(text, stdout);
    lpvp_string_free(text);
  }
}

std::string Quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

lpvp_status BuildConfig(const Flags& flags, ConfigPtr* config) {
  lpvp_config* raw = nullptr;
  lpvp_status status = flags.config_path.empty()
                           ? lpvp_config_default(&raw)
                           : lpvp_config_load(flags.config_path.c_str(), &raw);
  if (status != LPVP_OK) return status;
  config->reset(raw);

  std::vector<std::string> sets = flags.overrides;
  if (!flags.mode.empty()) sets.push_back("synthesis.method=" + flags.mode);
  if (!flags.uncertain.empty()) {
    sets.push_back(std::string("synthesis.uncertain=") +
                   (flags.uncertain == "on" ? "true" : "false"));
  }
  if (flags.seed) sets.push_back("seed=" + std::to_string(*flags.seed));
  if (!flags.out_dir.empty()) sets.push_back("output_dir=" + Quote(flags.out_dir));
  for (const auto& s : sets) {
    status = lpvp_config_set(config->get(), s.c_str());
    if (status != LPVP_OK) return status;
  }
  return LPVP_OK;
}

void AddCommonFlags(CLI::App* cmd, Flags* flags) {
  cmd->add_option("--config", flags->config_path, "Config file (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", flags->out_dir, "Output directory");
  cmd->add_option("--set", flags->overrides,
                  "Override a config key, e.g. --set pole_region.zeta_p=0.1")
      ->allow_extra_args(false);
  cmd->add_option("--mode", flags->mode, "Synthesis method")
      ->check(CLI::IsMember({"lq", "hinf-common-p", "hinf-paper"}));
  cmd->add_option("--uncertain", flags->uncertain,
                  "Also synthesize for the stiffness-corner family")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--seed", flags->seed, "Seed for randomized scenario offsets");
}

using ScheduleCommand = lpvp_status (*)(const lpvp_schedule*, const lpvp_config*,
                                        const char*, char**);

int RunWithSchedule(const Flags& flags, ScheduleCommand command) {
  ConfigPtr config(nullptr, lpvp_config_free);
  lpvp_status status = BuildConfig(flags, &config);
  if (status != LPVP_OK) return Report(status);
  lpvp_schedule* raw = nullptr;
  status = lpvp_schedule_load(flags.schedule_path.c_str(), &raw);
  // A schedule that cannot be read is an input error.
  if (status == LPVP_ERROR) status = LPVP_CONFIG;
  if (status != LPVP_OK) return Report(status);
  SchedulePtr schedule(raw, lpvp_schedule_free);
  char* text = nullptr;
  status = command(schedule.get(), config.get(), nullptr, &text);
  Print(text);
  return Report(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gain-scheduled preview steering: synthesis, checks, simulation"};
  app.set_version_flag("--version", std::string(lpvp_version()));
  app.require_subcommand(1);

  Flags flags;
  auto* model = app.add_subcommand("model", "Print the vehicle and augmented models");
  auto* synth = app.add_subcommand("synth", "Synthesize gain schedules");
  auto* check = app.add_subcommand("check", "Verify a gain schedule");
  auto* simulate = app.add_subcommand("simulate", "Run the configured scenarios");
  auto* exp = app.add_subcommand("export", "Export gain tables and the synthesis SDP");
  for (auto* cmd : {model, synth, check, simulate, exp}) AddCommonFlags(cmd, &flags);
  for (auto* cmd : {check, simulate, exp}) {
    cmd->add_option("schedule", flags.schedule_path, "Schedule file")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (model->parsed()) {
    ConfigPtr config(nullptr, lpvp_config_free);
    lpvp_status status = BuildConfig(flags, &config);
    if (status != LPVP_OK) return Report(status);
    char* text = nullptr;
    status = lpvp_model_dump(config.get(), &text);
    Print(text);
    return Report(status);
  }
  if (synth->parsed()) {
    ConfigPtr config(nullptr, lpvp_config_free);
    lpvp_status status = BuildConfig(flags, &config);
    if (status != LPVP_OK) return Report(status);
    char* text = nullptr;
    status = lpvp_synth(config.get(), nullptr, &text);
    Print(text);
    return Report(status);
  }
  if (check->parsed()) return RunWithSchedule(flags, lpvp_check);
  if (simulate->parsed()) return RunWithSchedule(flags, lpvp_simulate);
  return RunWithSchedule(flags, lpvp_export);
}
