#pragma once

#include "eigtemp/basis.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace eigtemp {

enum class SpectrumMode { deterministic, random };

std::string to_string(SpectrumMode mode);
SpectrumMode parse_spectrum_mode(const std::string& text);

/// Single-particle energies eps_1 < ... < eps_M with unit mean spacing.
struct SingleParticleSpectrum {
    std::vector<double> energies;
    SpectrumMode mode = SpectrumMode::deterministic;
    std::uint64_t seed = 0;

    int levels() const { return static_cast<int>(energies.size()); }
};

/// Deterministic: eps_s = s (zero-based). Random: eps_0 = 0 and i.i.d.
/// spacings uniform on [0.5, 1.5].
SingleParticleSpectrum sample_spectrum(int levels, SpectrumMode mode, std::uint64_t seed);

/// Two-body couplings V_{s1 s2 s3 s4}, stored once per unordered pair of
/// unordered pairs. Every index permutation that swaps within a pair or
/// swaps the two pairs aliases the same entry.
class CouplingTensor {
public:
    CouplingTensor() = default;
    /// unit_draws are standard-normal samples in canonical key order
    /// ((a<=b),(c<=d)) with pair(a,b) <= pair(c,d) lexicographically.
    CouplingTensor(int levels, double strength, std::uint64_t seed, std::vector<double> unit_draws);

    int levels() const { return m_; }
    double strength() const { return strength_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t pair_count() const { return pairs_; }

    double operator()(int s1, int s2, int s3, int s4) const
    {
        return table_[pair_index(s1, s2) * pairs_ + pair_index(s3, s4)];
    }

    /// Index of the unordered pair {a, b} in lexicographic order of (min, max).
    std::size_t pair_index(int a, int b) const
    {
        if (a > b)
            std::swap(a, b);
        return static_cast<std::size_t>(a) * m_ - static_cast<std::size_t>(a) * (a - 1) / 2 + (b - a);
    }

    /// Independent entries (strength * draw) in canonical key order.
    std::vector<double> canonical_entries() const;
    std::span<const double> unit_draws() const { return draws_; }

    /// Same draws, strength multiplied by factor.
    CouplingTensor scaled(double factor) const;

private:
    void build_table();

    int m_ = 0;
    std::size_t pairs_ = 0;
    double strength_ = 0.0;
    std::uint64_t seed_ = 0;
    std::vector<double> draws_;
    std::vector<double> table_; // pairs_ x pairs_, symmetric
};

/// One Gaussian(0, strength^2) draw per canonical key.
CouplingTensor sample_couplings(int levels, double strength, std::uint64_t seed);

/// Prefactor kappa(N, M) multiplying the two-body sum
/// sum_{s1 s2 s3 s4} V_{s1 s2 s3 s4} a+ a+ a a.
///
/// Chosen so that, averaged over coupling draws, the mean square of the
/// non-zero off-diagonal many-body elements <j|V|k> equals strength^2; the
/// strength V is then the typical many-body coupling that competes with
/// the local spacing d_loc. Depends only on the basis; memoized per (N, M).
double interaction_normalization(const BasisTable& basis);

/// H = H0 + V on the full Fock basis, dense and exactly symmetric.
struct HamiltonianBundle {
    BasisTable basis;
    SingleParticleSpectrum spectrum;
    CouplingTensor couplings;
    double interaction_scale = 1.0; // kappa(N, M)
    std::vector<double> e0;
    Eigen::MatrixXd matrix;

    std::size_t dimension() const { return basis.dimension(); }
};

std::vector<double> build_h0(const BasisTable& basis, const SingleParticleSpectrum& spectrum);

/// Parallel over basis states. Interaction contributions to H_kk are
/// dropped so that H_kk = E0_k exactly; throws IntegrityError if the
/// accumulated matrix is asymmetric beyond 1e-10 of the largest
/// off-diagonal magnitude.
HamiltonianBundle assemble(const BasisTable& basis, const SingleParticleSpectrum& spectrum,
                           const CouplingTensor& couplings);

namespace serial {
/// Single-threaded reference for assemble(); produces bit-identical output.
HamiltonianBundle assemble(const BasisTable& basis, const SingleParticleSpectrum& spectrum,
                           const CouplingTensor& couplings);
} // namespace serial

/// Largest |H_ij - H_ji| divided by the largest off-diagonal magnitude
/// (0 when the matrix is diagonal).
double relative_asymmetry(const Eigen::MatrixXd& matrix);

} // namespace eigtemp
