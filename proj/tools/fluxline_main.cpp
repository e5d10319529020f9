#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "fluxline/pipeline.hpp"

namespace {

// config may be given positionally (extension optional) or through --config
void add_common(CLI::App* sub, fluxline::RunOptions& opts) {
    sub->add_option("CONFIG", opts.config_path, "configuration file (.json, extension optional)");
    sub->add_option("--config", opts.config_path, "configuration file")
        ->excludes(sub->get_option("CONFIG"));
    sub->add_option("--out", opts.out_dir, "output directory (default: out)");
    sub->add_option("--smax", opts.s_max, "override sweep.s_max (1..3)");
    sub->add_option("--gauge", opts.gauge, "override the gauge: charge, flux or mixed:<i0>");
    sub->add_option("--threads", opts.threads, "worker threads (1 forces the serial path)");
    sub->add_flag("--no-cache", opts.no_cache, "bypass the stage cache");
    sub->add_flag("--verify", opts.verify, "re-check module invariants after the run");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fluxonium coupled to a multi-mode transmission-line cavity"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"foster", "dump the lumped-element network of the line"},
        {"fluxonium", "qubit excitation energies across the flux grid"},
        {"modes", "normal-mode frequencies and qubit couplings"},
        {"polaritons", "single-excitation eigenstates and qubit weights"},
        {"spectrum", "multi-particle fine-structure energies across flux"},
        {"s11", "reflection magnitude map over flux and probe frequency"},
        {"benchmark", "effective model against the exact diagonalization"},
        {"sweep", "spectrum and reflection map in one pass"},
    };

    fluxline::RunOptions opts;
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // schema/usage violations share exit code 2
    }

    return fluxline::run_subcommand(app.get_subcommands().front()->get_name(), opts);
}
