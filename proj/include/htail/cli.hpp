#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace htail::cli {

inline constexpr const char* kCommands[] = {"diagnose", "construct-h", "equivalence", "shift-check", "ruin"};

struct RunConfig {
    std::string command;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;     // overrides "seed" in the config
    std::optional<std::uint64_t> samples;  // overrides "samples" in the config
    unsigned workers = 1;                  // never affects outputs
    std::optional<double> tolerance;       // overrides "tolerance" in the config
};

struct RunResult {
    int exit_code = 0;  // 0 ok, 1 error, 2 negative verdict
    std::vector<std::string> artifacts;
    std::string message;
};

/// Config problem located by JSON pointer (and by line once the file is known).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string pointer, const std::string& what)
        : std::runtime_error(what), pointer_(std::move(pointer)) {}
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

RunResult run(const RunConfig& config);

/// 64-bit FNV-1a, used for artifact names.
std::uint64_t fnv1a64(const std::string& bytes);

/// argv front end: parses flags, runs, prints the outcome, returns the exit code.
int main(int argc, char** argv);

const char* version();

}  // namespace htail::cli
