#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ifslab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key = value text document; '#' starts a comment.  Keys:
//   command   audit | simulate | decay | sigma | qvar | lil | oracle | full
//   model     builtin name or "oracle-2state" (canonical kernel embedded)
//   n, replicas, seed_count, seed, threads, chi_tol, out
struct ExperimentConfig {
    std::string command = "audit";
    std::string model = "exp-contraction";
    long n = 10000;
    int replicas = 32;
    int seed_count = 8;
    std::uint64_t master_seed = 1;
    int threads = 0;  // 0 = auto
    double chi_tol = 0.02;
    std::string out_dir = "out";

    static ExperimentConfig parse(const std::string& text);  // throws ConfigError
    std::string serialize() const;  // canonical echo; parse(serialize()) == *this
    std::string echo() const;       // serialize with threads/out pinned to defaults
    bool operator==(const ExperimentConfig&) const = default;
};

// Exit codes: 0 success, 2 invalid config, 3 audit failure, 4 degenerate fit.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitAuditFailure = 3;
inline constexpr int kExitDegenerateFit = 4;

// Executes the configured pipeline, writes reports plus manifest.json into
// out_dir, returns an exit code.
int run(const ExperimentConfig& config);

}  // namespace ifslab
