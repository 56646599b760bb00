#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rydsuper {

struct TaskOptions {
    std::string subcommand;
    std::string config_path;
    std::vector<std::string> overrides; // --set section.key=value
    std::optional<std::string> output_path;
    std::optional<std::string> format; // csv | json
    std::optional<std::uint64_t> seed;
};

// Executes one subcommand: resolves the config, computes, writes the primary
// artifact plus a <path>.meta.json sidecar (resolved config, constants
// version, timing). Throws ValidationError/ConfigError for bad input and
// NumericalError for computation failures.
void run_task(const TaskOptions& options);

// Exposed for tests: formats a double with the shortest round-trip decimal.
std::string format_double(double value);

const std::vector<std::string>& known_subcommands();

} // namespace rydsuper
