#pragma once

#include "eigtemp/errors.hpp"
#include "eigtemp/hamiltonian.hpp"

#include <string>
#include <vector>

namespace eigtemp {

enum class BedBranch { positive_beta, infinite_temperature, negative_beta };

std::string to_string(BedBranch b);

/// Finite-N Bose-Einstein parameters reproducing a prescribed (N, E).
///
/// At beta = 0 the chemical potential diverges (to -inf from above, +inf
/// from below) and `mu` is NaN; `log_z` = beta*mu stays finite on every
/// branch and is what occupations() uses.
struct BedSolution {
    double beta = 0.0;
    double mu = 0.0;
    double z = 0.0;
    double log_z = 0.0;
    double target_energy = 0.0;
    double residual_particles = 0.0; // sum n_s - N
    double residual_energy = 0.0;    // sum eps_s n_s - E
    int iterations = 0;
    BedBranch branch = BedBranch::infinite_temperature;

    /// 1/beta; +inf on the infinite-temperature branch.
    double temperature() const;
};

/// Carries the last iterate when the solver runs out of budget.
class BedFailure : public ConvergenceError {
public:
    BedFailure(const std::string& what, BedSolution last) : ConvergenceError(what), last_(last) {}
    const BedSolution& last_iterate() const { return last_; }

private:
    BedSolution last_;
};

/// Feasibility landmarks of the (N, E) constraint pair.
struct EnergyDomain {
    double e_min = 0.0;     // N * eps_1
    double e_uniform = 0.0; // N * mean(eps)
    double e_max = 0.0;     // N * eps_M

    bool contains(double e) const { return e > e_min && e < e_max; }
};

EnergyDomain energy_domain(int particles, const SingleParticleSpectrum& spectrum);

/// n_s = 1 / (exp(beta (eps_s - mu)) - 1). Requires beta (eps_s - mu) > 0
/// for every level; throws DomainError at or across the pole.
std::vector<double> occupations_bed(double beta, double mu, const SingleParticleSpectrum& spectrum);

/// beta = 0 limit: every level holds z / (1 - z).
std::vector<double> occupations_uniform(double z, int levels);

/// Occupations of a solved distribution, valid on all three branches.
std::vector<double> occupations(const BedSolution& sol, const SingleParticleSpectrum& spectrum);

/// The unique admissible mu with sum_s n_s = N at fixed beta != 0
/// (mu < eps_1 for beta > 0, mu > eps_M for beta < 0), to 1e-10 in N.
double solve_mu_given_beta(double beta, int particles, const SingleParticleSpectrum& spectrum);

/// Solve sum n_s = N, sum eps_s n_s = E for (beta, mu).
///
/// Outer bisection on beta (E is strictly decreasing in beta), inner
/// monotone root for the chemical potential, then a damped 2-D Newton
/// polish. Branch by sign of e_uniform - E. Residual targets: 1e-8 in N,
/// 1e-8 * max(1, |E|) in E. Throws DomainError outside (e_min, e_max) and
/// BedFailure on budget exhaustion.
BedSolution solve_bed(int particles, double energy, const SingleParticleSpectrum& spectrum);

} // namespace eigtemp
