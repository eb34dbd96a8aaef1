#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gaussalloc::cli {

enum class Format { json, csv };

struct CliConfig {
    std::string subcommand;
    std::string target;  // family, algorithm or sweep name
    std::optional<std::string> instance_path;
    std::optional<std::string> allocation_instance_path;
    std::optional<double> eps;
    std::optional<double> grid_step;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> mc_samples;
    std::optional<std::string> method;
    std::optional<std::string> output_path;
    Format format = Format::json;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command. `args` excludes the program name. Results go to `out`
/// (or the --out file); diagnostics go to `err`, errors prefixed "error:".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gaussalloc::cli
