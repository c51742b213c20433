// evans: Evans-function contours, winding numbers and root localisation.

#include <iostream>

#include <CLI11.hpp>

#include "evans/cli/config.hpp"
#include "evans/cli/run.hpp"

namespace {

using evans::cli::ConfigError;
using evans::cli::Overrides;
using evans::cli::RunConfig;

void add_common(CLI::App* cmd, std::string& config_path, Overrides& o) {
    cmd->add_option("--config", config_path, "TOML run configuration");
    cmd->add_option("--system", o.system, "system name (overrides [system] name)");
    cmd->add_option("--L", o.L, "truncation length");
    cmd->add_option("--N", o.N, "Chebyshev degree");
    cmd->add_option("--mode", o.mode, "eigenvalue labelling: sort | track");
    cmd->add_option("--ratio", o.ratio, "adaptive refinement ratio");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--threads", o.threads, "worker threads: n | auto");
}

RunConfig assemble(const std::string& path, const Overrides& o) {
    RunConfig cfg = path.empty() ? RunConfig{} : evans::cli::load_config(path);
    evans::cli::apply_overrides(cfg, o);
    evans::cli::validate(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evans-function computation for travelling-wave stability"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides o;
    auto* contour = app.add_subcommand("contour", "evaluate the Evans function on a closed contour");
    auto* roots = app.add_subcommand("roots", "localise roots inside a rectangle");
    auto* oracle = app.add_subcommand("oracle-compare", "cross-check against the shooting and finite-difference oracles");
    auto* check = app.add_subcommand("validate-config", "check a configuration without computing anything");
    for (auto* c : {contour, roots, oracle, check}) add_common(c, config_path, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : evans::cli::config_error;
    }

    try {
        const RunConfig cfg = assemble(config_path, o);
        if (*check) {
            // build the system too, so profile files are checked
            const auto sys = evans::cli::build_system(cfg);
            std::cout << "configuration ok: " << sys.label << " (n = " << sys.n << ", r = " << sys.r << ")\n";
            return evans::cli::ok;
        }
        if (*contour) return evans::cli::run_contour(cfg);
        if (*roots) return evans::cli::run_roots(cfg);
        return evans::cli::run_oracle_compare(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return evans::cli::config_error;
    }
}
