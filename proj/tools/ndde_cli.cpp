// Command-line front end: check | envelope | solve | verify | region.

#include <iostream>

#include <CLI11.hpp>

#include "ndde/cli.hpp"

int main(int argc, char** argv) {
    namespace cli = ndde::cli;
    CLI::App app{"Stability certificates and simulation for scalar linear neutral delay equations"};
    app.require_subcommand(1);
    // "-h" is taken by the solver step.
    app.set_help_flag("--help", "Print this help message and exit");

    cli::Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", opt.config, "Problem file")->required();
        sub->add_option("--window", opt.window, "Norm window width");
        sub->add_option("--step", opt.step, "Norm sampling step");
    };
    auto add_solver = [&](CLI::App* sub) {
        sub->add_option("--h", opt.h, "Solver step");
        sub->add_option("--t-end", opt.t_end, "Integration end time");
    };

    auto* check = app.add_subcommand("check", "Evaluate every stability criterion");
    add_common(check);

    auto* envelope = app.add_subcommand("envelope", "Build an exponential envelope certificate");
    add_common(envelope);
    envelope->add_option("--lambda", opt.lambda, "Decay rate to certify (optimized when omitted)");
    envelope->add_option("--out", opt.out, "CSV of envelope samples");
    envelope->add_option("--t-end", opt.t_end, "End of the sampled envelope");

    auto* solve = app.add_subcommand("solve", "Integrate the initial value problem");
    add_common(solve);
    add_solver(solve);
    solve->add_option("--out", opt.out, "Trajectory CSV (stdout when omitted)");

    auto* verify = app.add_subcommand("verify", "Check that the envelope dominates the numerical solution");
    add_common(verify);
    add_solver(verify);
    verify->add_option("--lambda", opt.lambda, "Decay rate");
    verify->add_option("--C", opt.C, "Envelope constant override (needs --lambda)");
    verify->add_option("--out", opt.out, "CSV of t, x, envelope");

    auto* region = app.add_subcommand("region", "Sweep a [params] entry and tabulate verdicts");
    add_common(region);
    region->add_option("--param", opt.param, "Parameter name")->required();
    region->add_option("--from", opt.from, "First value")->required();
    region->add_option("--to", opt.to, "Last value")->required();
    region->add_option("--points", opt.points, "Number of values")->default_val(101);
    region->add_option("--out", opt.out, "CSV output (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitInputError;
    }

    if (*check) return cli::cmd_check(opt, std::cout, std::cerr);
    if (*envelope) return cli::cmd_envelope(opt, std::cout, std::cerr);
    if (*solve) return cli::cmd_solve(opt, std::cout, std::cerr);
    if (*verify) return cli::cmd_verify(opt, std::cout, std::cerr);
    return cli::cmd_region(opt, std::cout, std::cerr);
}
