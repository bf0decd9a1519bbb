#pragma once

#include "eigtemp/spectral.hpp"

#include <filesystem>

namespace eigtemp {

/// Everything needed to rebuild one realization and its eigendata without
/// re-diagonalizing. The matrix itself is not stored: it is reassembled
/// from the spectrum and coupling draws (bit-identical).
struct CachedRun {
    int particles = 0;
    int levels = 0;
    double strength = 0.0;
    SingleParticleSpectrum spectrum;
    std::uint64_t coupling_seed = 0;
    std::vector<double> unit_draws;
    EigenDecomposition eigen;

    HamiltonianBundle rebuild() const;
};

void write_cache(const std::filesystem::path& path, const HamiltonianBundle& bundle, const EigenDecomposition& d);

/// Throws IntegrityError on a bad magic/version, truncation or size mismatch.
CachedRun read_cache(const std::filesystem::path& path);

} // namespace eigtemp
