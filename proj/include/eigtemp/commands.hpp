#pragma once

#include "eigtemp/hamiltonian.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eigtemp {

struct RunConfig {
    int n = 6;
    int m = 11;
    double v = 0.1;
    SpectrumMode spectrum = SpectrumMode::random;
    std::uint64_t seed = 1;
    std::filesystem::path out = "eigtemp-out";
    int threads = 0;

    // analyze
    std::vector<double> window_energies; // empty: one window at the DOS center
    std::size_t window_size = 20;
    bool single = false;        // window size 1
    bool full_spectrum = false; // shift overlay over both halves

    // ensemble
    std::size_t realizations = 20;
    bool full_size = false;     // allow ensembles above kEnsembleDimensionGate states
    std::size_t group_size = 20;
    bool vary_spectrum = false; // redraw single-particle energies per realization

    // report
    std::vector<std::filesystem::path> inputs; // empty: `out`

    std::size_t effective_window() const { return single ? 1 : window_size; }
};

/// Ensembles with more basis states than this need full_size.
inline constexpr std::size_t kEnsembleDimensionGate = 2000;

/// Throws DomainError naming the offending field.
void validate(const RunConfig& cfg);

/// Applies `key = value` lines ('#' starts a comment) on top of cfg.
/// Keys use the long flag names (n, m, v, spectrum, seed, out, threads,
/// window-energy, window-size, single, full-spectrum, realizations,
/// full-size, group-size, vary-spectrum, input). Errors carry source:line.
RunConfig apply_config_text(RunConfig cfg, std::string_view text, const std::string& source);
RunConfig apply_config_file(RunConfig cfg, const std::filesystem::path& path);

/// Each writes its files plus manifest-<command>.json into cfg.out and
/// returns the written paths (manifest last).
std::vector<std::filesystem::path> cmd_generate(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_analyze(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_ensemble(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_report(const RunConfig& cfg);

inline constexpr std::string_view kToolVersion = "1.0.0";

} // namespace eigtemp
