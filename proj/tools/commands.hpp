#pragma once

#include "config.hpp"

namespace seg::cli {

int cmd_fields(const RunConfig& config);
int cmd_solve(const RunConfig& config);
int cmd_slice(const RunConfig& config);
int cmd_play(const RunConfig& config);
int cmd_sweep(const RunConfig& config);
int cmd_histogram(const RunConfig& config);
int cmd_serve(const RunConfig& config);

// Full entry point: parses argv, configures logging and workers, dispatches.
int run(int argc, char** argv);

}  // namespace seg::cli
