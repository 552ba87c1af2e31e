#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "amctl/config.hpp"

namespace amctl {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitAcceptance = 4,
};

struct RunContext {
  std::filesystem::path out_dir;
  bool quiet = false;
  std::ostream* log = nullptr;      // summaries; null or quiet silences them
  std::vector<std::string> outputs;  // files written, relative to out_dir
};

// Each command writes its CSV reports into ctx.out_dir and returns an exit
// code. Exceptions propagate; run_command maps them to exit codes.
int cmd_resolvent(const Config& config, RunContext& ctx);
int cmd_gramian(const Config& config, RunContext& ctx);
int cmd_sweep(const Config& config, RunContext& ctx);
int cmd_gamma(const Config& config, RunContext& ctx);
int cmd_feasibility(const Config& config, RunContext& ctx);

// Dispatches by name, maps errors to exit codes and writes manifest.json plus
// the effective config. Errors are reported on `err`.
int run_command(const std::string& name, const Config& config, RunContext& ctx, std::ostream& err);

// Full command line: amctl <subcommand> --config PATH [--out DIR] [--seed U64] [--quiet].
int run_cli(int argc, char** argv);

}  // namespace amctl
