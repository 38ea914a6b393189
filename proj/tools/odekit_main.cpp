// Command-line harness: runs and compares the demonstration problems.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure.

#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "odekit/harness/runner.hpp"

namespace {

using odekit::harness::RunConfig;

void add_config_flags(CLI::App* cmd, RunConfig& cfg, const std::string& prefix = "") {
    auto opt = [&prefix](const std::string& name) { return "--" + prefix + name; };
    cmd->add_option(opt("problem"), cfg.problem, "heat2d | bruss1d");
    cmd->add_option(opt("integrator"), cfg.integrator, "lmm | ark");
    cmd->add_option(opt("method"), cfg.method, "bdf | adams | erk | dirk | imex");
    cmd->add_option(opt("nls"), cfg.nls, "newton | fixedpoint | blocklocal");
    cmd->add_option(opt("linsol"), cfg.linsol, "dense | gmres | cg");
    cmd->add_option(opt("jv"), cfg.jv, "analytic | dq Jacobian-vector products");
    cmd->add_option(opt("nx"), cfg.nx, "mesh points in x (0 = problem default)");
    cmd->add_option(opt("ny"), cfg.ny, "mesh points in y (heat2d; 0 = nx)");
    cmd->add_option(opt("blocks"), cfg.blocks, "state blocks (bruss1d)");
    cmd->add_option(opt("rtol"), cfg.rtol, "relative tolerance");
    cmd->add_option(opt("atol"), cfg.atol, "absolute tolerance");
    cmd->add_option(opt("tf"), cfg.tf, "final time (0 = problem default)");
    cmd->add_option(opt("maxl"), cfg.maxl, "Krylov subspace dimension");
    cmd->add_option(opt("fused"), cfg.fused, "fused vector kernels on/off")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, bool>{{"on", true}, {"off", false}}, CLI::ignore_case));
    cmd->add_option(opt("stats"), cfg.stats, "table | csv | json");
    cmd->add_option(opt("seed"), cfg.seed,
                    "seed for randomized property drivers (recorded only)");
}

int finish_run(const odekit::harness::RunReport& rep) {
    std::fputs(odekit::harness::format_report(rep).c_str(), stdout);
    return rep.solved ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"compact demonstration harness for the pluggable solver suite"};
    app.require_subcommand(1);

    RunConfig run_cfg;
    bool run_dry = false;
    auto* run_cmd = app.add_subcommand("run", "integrate one configured problem");
    add_config_flags(run_cmd, run_cfg);
    run_cmd->add_flag("--dry-run", run_dry, "print the resolved configuration and exit");

    RunConfig cmp_a, cmp_b_overrides;
    bool cmp_dry = false;
    auto* cmp_cmd =
        app.add_subcommand("compare", "run two configurations side by side");
    add_config_flags(cmp_cmd, cmp_a);
    add_config_flags(cmp_cmd, cmp_b_overrides, "b-");
    cmp_cmd->add_flag("--dry-run", cmp_dry, "print the resolved configurations and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) {
            run_cfg.dry_run = run_dry;
            if (run_dry) {
                std::fputs(
                    odekit::harness::format_dry_run(odekit::harness::resolve(run_cfg))
                        .c_str(),
                    stdout);
                return 0;
            }
            return finish_run(odekit::harness::run(run_cfg));
        }

        // compare: config B starts from A and applies any --b-* overrides
        RunConfig b = cmp_a;
        for (const auto& [get, set] :
             {std::pair{std::string("b-problem"), &RunConfig::problem},
              std::pair{std::string("b-integrator"), &RunConfig::integrator},
              std::pair{std::string("b-method"), &RunConfig::method},
              std::pair{std::string("b-nls"), &RunConfig::nls},
              std::pair{std::string("b-linsol"), &RunConfig::linsol},
              std::pair{std::string("b-jv"), &RunConfig::jv},
              std::pair{std::string("b-stats"), &RunConfig::stats}}) {
            if (cmp_cmd->count("--" + get) > 0) b.*set = cmp_b_overrides.*set;
        }
        if (cmp_cmd->count("--b-nx")) b.nx = cmp_b_overrides.nx;
        if (cmp_cmd->count("--b-ny")) b.ny = cmp_b_overrides.ny;
        if (cmp_cmd->count("--b-blocks")) b.blocks = cmp_b_overrides.blocks;
        if (cmp_cmd->count("--b-rtol")) b.rtol = cmp_b_overrides.rtol;
        if (cmp_cmd->count("--b-atol")) b.atol = cmp_b_overrides.atol;
        if (cmp_cmd->count("--b-tf")) b.tf = cmp_b_overrides.tf;
        if (cmp_cmd->count("--b-maxl")) b.maxl = cmp_b_overrides.maxl;
        if (cmp_cmd->count("--b-fused")) b.fused = cmp_b_overrides.fused;

        if (cmp_dry) {
            std::fputs("# A\n", stdout);
            std::fputs(
                odekit::harness::format_dry_run(odekit::harness::resolve(cmp_a)).c_str(),
                stdout);
            std::fputs("# B\n", stdout);
            std::fputs(
                odekit::harness::format_dry_run(odekit::harness::resolve(b)).c_str(),
                stdout);
            return 0;
        }
        const auto cr = odekit::harness::compare(cmp_a, b);
        std::fputs(odekit::harness::format_compare(cr).c_str(), stdout);
        return cr.a.solved && cr.b.solved ? 0 : 3;
    } catch (const odekit::config_error& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const odekit::shape_error& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 3;
    }
}
