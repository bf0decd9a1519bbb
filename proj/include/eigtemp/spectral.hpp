#pragma once

#include "eigtemp/hamiltonian.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace eigtemp {

/// Ascending eigenvalues E^alpha; column alpha of `vectors` holds C^alpha_k.
struct EigenDecomposition {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;

    std::size_t dimension() const { return static_cast<std::size_t>(values.size()); }
    std::span<const double> component(std::size_t alpha) const
    {
        return {vectors.col(static_cast<Eigen::Index>(alpha)).data(), static_cast<std::size_t>(vectors.rows())};
    }
};

/// Full dense symmetric eigendecomposition (LAPACK dsyevd). Throws
/// ConvergenceError carrying (N, M, V, seed) if the solver fails or the
/// spot-checked residuals/norms are off.
EigenDecomposition diagonalize(const HamiltonianBundle& bundle);
EigenDecomposition diagonalize(const Eigen::MatrixXd& symmetric);

/// 1 / sum_k |C_k|^4.
double participation_ratio(std::span<const double> c);

/// Spread of H0 inside the state: sqrt(<H0^2> - <H0>^2).
double unperturbed_width(std::span<const double> c, std::span<const double> e0);

enum class ProfileKind { f_function, strength_function };

/// Histogram of |C|^2 weights; edges.size() == weights.size() + 1.
struct SpectralProfile {
    std::vector<double> edges;
    std::vector<double> weights;
    ProfileKind kind = ProfileKind::f_function;

    double center(std::size_t bin) const { return 0.5 * (edges[bin] + edges[bin + 1]); }
};

inline constexpr int kDefaultBins = 50;

/// F_k(E): basis state k spread over the exact eigenvalues.
SpectralProfile strength_function(const EigenDecomposition& d, std::size_t k, int bins = kDefaultBins);
/// F^alpha(E): eigenstate alpha spread over the unperturbed energies.
SpectralProfile f_function(const EigenDecomposition& d, std::span<const double> e0, std::size_t alpha,
                           int bins = kDefaultBins);

struct SmoothedEnvelope {
    std::vector<double> energies; // E0 sorted ascending
    std::vector<double> values;   // centered window mean of |C|^2
};

/// Sliding mean of weights over all points with |E0_j - E0_i| <= width/2,
/// evaluated at each E0_i (points ordered by energy).
SmoothedEnvelope moving_window_average(std::span<const double> e0, std::span<const double> weights,
                                       double width);

enum class DosKind { perturbed, unperturbed };

struct DosSummary {
    double center = 0.0;
    double variance = 0.0; // population convention
    DosKind kind = DosKind::unperturbed;
};

DosSummary dos_moments(std::span<const double> values, DosKind kind);

/// Per-row Sigma_{j != k} H_kj^2, the second moment of each strength function.
std::vector<double> sf_variances(const Eigen::MatrixXd& h);

/// (1/N_H) Sigma_n Sigma_{k != n} H_nk^2, straight from the matrix.
double mean_sf_variance(const HamiltonianBundle& bundle);

struct EigenstateRecord {
    std::size_t alpha = 0;
    double energy = 0.0;
    double npc = 0.0;
    double delta0 = 0.0;
    double dloc = 0.0;
    double e_dres = 0.0;
    double delta_alpha = 0.0;
    std::vector<double> ond;
};

EigenstateRecord build_record(const EigenDecomposition& d, const HamiltonianBundle& bundle, std::size_t alpha);

/// All records, parallel over alpha, ordered by alpha.
std::vector<EigenstateRecord> build_records(const EigenDecomposition& d, const HamiltonianBundle& bundle);

/// Residuals of the exact moment identities. Relative errors use the
/// right-hand side as denominator, floored at 1 energy unit for first
/// moments (E0_k can be zero).
struct IdentityReport {
    double trace_rel = 0.0;          // mean E vs mean E0
    double variance_rel = 0.0;       // sigma_E^2 vs sigma_0^2 + mean SF variance
    double first_moment_rel = 0.0;   // max_k over Sigma_a E^a |C|^2 vs E0_k
    double second_moment_rel = 0.0;  // max_k over SF second moment vs Sigma_{j!=k} H_kj^2
    double completeness_abs = 0.0;   // max_k |Sigma_a |C^a_k|^2 - 1|
    double orthonormality_abs = 0.0; // max_alpha | ||C^a|| - 1 |
    double sigma0_sq = 0.0;
    double sigma_e_sq = 0.0;
    double mean_sf_var = 0.0;
    double e_center = 0.0;
};

IdentityReport check_moment_identities(const HamiltonianBundle& bundle, const EigenDecomposition& d);

namespace serial {
double mean_sf_variance(const HamiltonianBundle& bundle);
std::vector<EigenstateRecord> build_records(const EigenDecomposition& d, const HamiltonianBundle& bundle);
} // namespace serial

} // namespace eigtemp
