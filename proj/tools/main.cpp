#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "rydsuper/errors.hpp"
#include "rydsuper/tasks.hpp"

// Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure.
int main(int argc, char** argv)
{
    CLI::App app{"Rydberg superheterodyne receiver simulator"};
    app.require_subcommand(1);

    rydsuper::TaskOptions options;
    for (const std::string& name : rydsuper::known_subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", options.config_path, "key/value config file");
        sub->add_option("--set", options.overrides, "override: section.key=value")
            ->take_all();
        sub->add_option("--output", [&options](const std::vector<std::string>& v) {
            options.output_path = v.back();
            return true;
        }, "output file path");
        sub->add_option("--format", [&options](const std::vector<std::string>& v) {
            options.format = v.back();
            return true;
        }, "csv or json");
        sub->add_option("--seed", [&options](const std::vector<std::string>& v) {
            options.seed = std::stoull(v.back());
            return true;
        }, "random seed (oracle-check)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    options.subcommand = app.get_subcommands().front()->get_name();
    try {
        rydsuper::run_task(options);
    } catch (const rydsuper::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const rydsuper::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failure: %s\n", e.what());
        return 3;
    }
    return 0;
}
