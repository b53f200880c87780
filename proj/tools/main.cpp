#include <iostream>
#include <map>

#include "CLI11.hpp"

#include "cli_core.hpp"

int main(int argc, char** argv)
{
    using namespace esov::cli;
    CLI::App app{"Elliptic separation of variables: verification suites and solvers"};
    app.require_subcommand(1);

    RunOptions opt;
    std::uint64_t seed = 0;
    double tol = 0.0;
    std::string command;

    const std::map<std::string, std::vector<std::pair<std::string, std::string>>> groups{
        {"theta", {{"eval", "theta and derived functions, quasi-periodicity checks"}}},
        {"gaudin",
         {{"check", "commuting Hamiltonians and generating operator"}, {"bethe", "Bethe equations and vectors"}}},
        {"eqg", {{"rll-check", "RLL relations and supporting identities"}, {"hw-check", "highest weight vector"}}},
        {"irf",
         {{"build", "transfer matrix from weights and from difference operators"},
          {"spectrum", "spectral certificates"},
          {"partition", "partition function"},
          {"bethe", "Bethe ansatz for the continuous difference operator"}}},
    };
    std::vector<CLI::Option*> seed_opts, tol_opts;
    for (const auto& [group, subs] : groups) {
        CLI::App* g = app.add_subcommand(group, group + " tasks");
        g->require_subcommand(1);
        for (const auto& [name, help] : subs) {
            CLI::App* s = g->add_subcommand(name, help);
            s->add_option("--config", opt.config_path, "model configuration (JSON)")->required();
            s->add_option("--out", opt.out_path, "report path (default stdout)");
            seed_opts.push_back(s->add_option("--seed", seed, "override the config seed"));
            tol_opts.push_back(s->add_option("--tol", tol, "override tolerances.residual_tol"));
            s->add_option("--emit-csv", opt.csv_dir, "directory for CSV curves");
            s->callback([&command, group = group, name = name] { command = group + " " + name; });
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }
    for (auto* o : seed_opts)
        if (o->count())
            opt.seed = seed;
    for (auto* o : tol_opts)
        if (o->count())
            opt.tol = tol;
    return run(command, opt, std::cout, std::cerr);
}
