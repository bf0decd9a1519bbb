#pragma once

#include "eigtemp/bed.hpp"
#include "eigtemp/spectral.hpp"

#include <span>
#include <string>
#include <vector>

namespace eigtemp {

/// Spectrum-level inputs of the Gaussian shift and temperature estimates.
struct ScalingInputs {
    double sigma0_sq = 0.0;   // variance of the unperturbed DOS
    double mean_sf_var = 0.0; // mean strength-function variance
    double e_center = 0.0;    // common center of both DOS
};

/// Both variances straight from the matrix; no diagonalization.
ScalingInputs scaling_inputs(const HamiltonianBundle& bundle);

/// One side (bare or dressed) of a temperature assignment. Energies outside
/// the feasibility domain, or solver failures, leave `feasible` false with
/// the reason in `note`.
struct BedSide {
    bool feasible = false;
    BedSolution solution;
    std::string note;
};

struct ThermalRecord {
    EigenstateRecord record;
    BedSide bare;    // at E^alpha
    BedSide dressed; // at E^dres = E^alpha + Delta_alpha
    double delta_alpha_analytic = 0.0;
    double dt_over_t = 0.0; // T_dres / T_bare - 1, NaN unless both sides have beta != 0
    double dt_over_t_analytic = 0.0;
    bool chaotic = false;
};

BedSide bed_side(int particles, double energy, const SingleParticleSpectrum& spectrum);

/// (bare, dressed) BED solves for one eigenstate.
std::pair<BedSide, BedSide> dressed_bed(const EigenstateRecord& record, const SingleParticleSpectrum& spectrum,
                                        int particles);

/// Gaussian DOS/LDOS estimate of Delta_alpha:
/// dE2 / (dE2 + sigma0^2) * (E_c - E^alpha).
double delta_alpha_analytic(double e_alpha, const ScalingInputs& in);

/// Relative temperature increase dE2 / sigma0^2 (independent of energy).
double temperature_shift_analytic(const ScalingInputs& in);

/// T = sigma^2 / (E_c - E) of a Gaussian DOS, with sigma^2 = sigma0^2
/// (unperturbed) or sigma0^2 + dE2 (perturbed). Throws at E = E_c.
double gaussian_dos_temperature(double energy, const ScalingInputs& in, DosKind which);

/// Chaotic (thermal candidate) iff V > d_loc.
inline bool classify(const EigenstateRecord& record, double strength) { return strength > record.dloc; }

ThermalRecord thermal_record(const EigenstateRecord& record, const SingleParticleSpectrum& spectrum, int particles,
                             const ScalingInputs& in, double strength);

/// Parallel over records; output order follows input order.
std::vector<ThermalRecord> thermal_records(std::span<const EigenstateRecord> records,
                                           const SingleParticleSpectrum& spectrum, int particles,
                                           const ScalingInputs& in, double strength);

namespace serial {
std::vector<ThermalRecord> thermal_records(std::span<const EigenstateRecord> records,
                                           const SingleParticleSpectrum& spectrum, int particles,
                                           const ScalingInputs& in, double strength);
}

/// Positions (into `records`) of the `count` records closest in energy to
/// `target`, returned in ascending energy order. Ties go to the lower index.
std::vector<std::size_t> closest_in_energy(std::span<const EigenstateRecord> records, double target,
                                           std::size_t count);

/// Per-level mean and (population) standard deviation of the OND over a
/// window of eigenstates.
struct WindowOnd {
    double target = 0.0;
    std::vector<std::size_t> members; // positions into the record list
    std::vector<double> mean;
    std::vector<double> stddev;
    double mean_energy = 0.0;
    double mean_e_dres = 0.0;
    bool short_window = false; // fewer than the requested count were available
};

WindowOnd window_average_ond(std::span<const EigenstateRecord> records, double target, std::size_t count);

/// Summed squared deviation sum_s (a_s - b_s)^2.
double ond_deviation(std::span<const double> a, std::span<const double> b);

struct BedCurvePoint {
    double energy = 0.0;
    double beta = 0.0;
    double z = 0.0;
};

/// beta(E), z(E) at fixed N over the given energies (skipping infeasible ones).
std::vector<BedCurvePoint> bed_curve(int particles, const SingleParticleSpectrum& spectrum,
                                     std::span<const double> energies);

} // namespace eigtemp
