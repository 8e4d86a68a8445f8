#pragma once

#include <stdexcept>

#include "dre/config.hpp"

namespace dre {

/// Missing or inconsistent arguments; the command line reports these as
/// usage errors (exit code 2) rather than failures.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Subcommand implementations behind the experiment runner. Each takes the
/// parsed config by value, resolves preset defaults into it, refuses to
/// touch an existing output directory unless `force` is set, runs, and
/// writes the fully resolved `run.json` next to its outputs so the run can
/// be repeated verbatim (byte-identical outputs). The DRE_SEED environment
/// variable, when set, overrides the configured seed.
void cmd_generate(RunConfig cfg);
void cmd_train(RunConfig cfg);
void cmd_evaluate(RunConfig cfg);
void cmd_converge(RunConfig cfg);
void cmd_stability(RunConfig cfg);
void cmd_manifold(RunConfig cfg);

/// Dispatches on cfg.subcommand.
void run_command(const RunConfig& cfg);

}  // namespace dre
