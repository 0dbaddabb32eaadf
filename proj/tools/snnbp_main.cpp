#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "snnbp/dispatch.hpp"

namespace {

std::string command_list() {
    std::string out;
    for (const auto& name : snnbp::known_commands()) {
        if (!out.empty()) out += ", ";
        out += name;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sample-wise back-propagation for stochastic neural networks"};
    app.footer("commands: " + command_list());

    std::string command;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    bool plots = true;

    app.add_option("command", command, "experiment to run")->required();
    app.add_option("--config", config_path, "config file (sectioned key = value text)")
        ->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override a config key (KEY=VALUE, repeatable)");
    const auto* output_opt = app.add_option("--output", output_dir, "output directory");
    const auto* seed_opt = app.add_option("--seed", seed, "run seed");
    const auto* threads_opt = app.add_option("--threads", threads, "worker thread cap");
    const auto* plots_opt = app.add_flag("--plots,!--no-plots", plots, "emit SVG plots");

    CLI11_PARSE(app, argc, argv);

    const auto& commands = snnbp::known_commands();
    if (std::find(commands.begin(), commands.end(), command) == commands.end()) {
        std::cerr << "error: unknown command '" << command << "'\n"
                  << "usage: snnbp COMMAND [--config PATH] [--set KEY=VALUE]... [--output DIR]"
                  << " [--seed U64] [--threads N] [--plots|--no-plots]\n"
                  << "commands: " << command_list() << "\n";
        return 2;
    }

    // dedicated flags take precedence over --set, which takes precedence over
    // the config file
    if (output_opt->count() > 0) overrides.push_back("run.output=" + output_dir);
    if (seed_opt->count() > 0) overrides.push_back("run.seed=" + std::to_string(seed));
    if (threads_opt->count() > 0) overrides.push_back("run.threads=" + std::to_string(threads));
    if (plots_opt->count() > 0) overrides.push_back(std::string("run.plots=") +
                                                    (plots ? "true" : "false"));

    try {
        const auto rc = snnbp::parse_config(command, config_path, overrides);
        return snnbp::dispatch(rc);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
