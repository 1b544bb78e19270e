#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <thread>

#include "runner.hpp"

namespace {

using cascadecomp::cli::Command;

unsigned thread_cap() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CASCADECOMP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            n = static_cast<unsigned>(v);
        } else {
            std::cerr << "warning: ignoring CASCADECOMP_THREADS='" << env << "' (expected a positive integer)\n";
        }
    }
    return n;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compensator synthesis, verification and simulation for cascade systems"};
    app.require_subcommand(1);

    std::vector<std::string> configs;
    std::string out;
    bool batch = false;

    const std::vector<std::pair<Command, const char*>> commands = {
        {Command::synthesize, "Compute compensator gains and write <name>_gains.csv"},
        {Command::verify, "Check every design invariant; nonzero exit if any fails"},
        {Command::simulate, "Simulate the loop, write CSVs and gnuplot scripts"},
        {Command::spectrum, "List the closed-loop (or Galerkin) eigenvalues"},
    };
    const char* names[] = {"synthesize", "verify", "simulate", "spectrum"};
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        CLI::App* sub = app.add_subcommand(names[i], commands[i].second);
        sub->add_option("-c,--config", configs, "Scenario file (YAML); repeat with --batch")->required()->check(
            CLI::ExistingFile);
        sub->add_option("-o,--out", out, "Output directory (overrides the config's 'output')");
        sub->add_flag("--batch", batch, "Run all configs concurrently (CASCADECOMP_THREADS caps workers)");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cascadecomp::cli::exit_validation;
    }

    Command cmd = Command::synthesize;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (subs[i]->parsed()) {
            cmd = commands[i].first;
        }
    }
    if (configs.size() > 1 && !batch) {
        std::cerr << "error: several --config files need --batch\n";
        return cascadecomp::cli::exit_validation;
    }
    const std::optional<std::filesystem::path> out_dir =
        out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out);
    const std::vector<std::filesystem::path> paths(configs.begin(), configs.end());

    int worst = 0;
    for (const auto& r : cascadecomp::cli::run_batch(cmd, paths, out_dir, batch ? thread_cap() : 1)) {
        (r.exit_code == 0 ? std::cout : std::cerr) << r.report;
        worst = std::max(worst, r.exit_code);
    }
    return worst;
}
