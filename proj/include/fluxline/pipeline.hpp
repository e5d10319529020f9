#pragma once
#include <string>

namespace fluxline {

inline constexpr const char* fluxline_version = "1.0.0";

struct RunOptions {
    std::string config_path;
    std::string out_dir = "out";
    int s_max = 0;          // 0 keeps the config value
    std::string gauge;      // "charge" | "flux" | "mixed:<i0>"; empty keeps the config
    int threads = 0;        // 0 keeps the OpenMP default; 1 forces the serial path
    bool no_cache = false;
    bool verify = false;    // re-check module invariants after the run
};

// dispatches one of {foster, fluxonium, modes, polaritons, spectrum, s11,
// benchmark, sweep} and returns the process exit status: 0 ok, 2 config or
// parameter violation, 3 numeric failure, 4 post-run verification failure
int run_subcommand(const std::string& name, const RunOptions& opts);

}  // namespace fluxline
