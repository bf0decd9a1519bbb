#include "eigtemp/bed.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace eigtemp {

namespace {

constexpr int kMaxBisections = 200;
constexpr int kMaxPolishSteps = 50;
constexpr int kMaxBracketDoublings = 2000;
constexpr double kParticleTarget = 1e-8;
constexpr double kEnergyTarget = 1e-8;
constexpr double kInnerTarget = 1e-10;

// Occupations are parameterized by t = beta (eps_ref - mu) > 0 where
// eps_ref is the lowest level for beta > 0 and the highest for beta < 0.
// Then beta (eps_s - mu) = beta (eps_s - eps_ref) + t with both terms >= 0,
// and n_s = 1 / expm1(.) never touches the pole.
struct Shifted {
    const std::vector<double>& eps;
    double beta;
    double ref;

    Shifted(const SingleParticleSpectrum& sp, double b)
        : eps(sp.energies), beta(b), ref(b >= 0.0 ? sp.energies.front() : sp.energies.back())
    {
    }

    double arg(std::size_t s, double t) const { return beta * (eps[s] - ref) + t; }

    // sum n_s and sum n_s (1 + n_s)
    std::pair<double, double> count(double t) const
    {
        double n = 0.0;
        double g = 0.0;
        for (std::size_t s = 0; s < eps.size(); ++s) {
            const double ns = 1.0 / std::expm1(arg(s, t));
            n += ns;
            g += ns * (1.0 + ns);
        }
        return {n, g};
    }

    double energy(double t) const
    {
        double e = 0.0;
        for (std::size_t s = 0; s < eps.size(); ++s)
            e += eps[s] / std::expm1(arg(s, t));
        return e;
    }
};

// Sum n_s is strictly decreasing in t. Since n_ref = 1/expm1(t) is the
// largest occupation, [log1p(1/N), log1p(M/N)] always brackets the root.
double solve_shift(const Shifted& f, int particles)
{
    const double target = particles;
    const double levels = static_cast<double>(f.eps.size());
    double lo = std::log1p(1.0 / target);
    double hi = std::log1p(levels / target);
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const auto [n, g] = f.count(t);
        const double r = n - target;
        if (std::abs(r) <= 0.01 * kInnerTarget * target)
            return t;
        if (r > 0.0)
            lo = t;
        else
            hi = t;
        double next = t + r / g; // Newton: dN/dt = -g
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (next == t || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi)
            return next;
        t = next;
    }
    return t;
}

double energy_at_beta(const SingleParticleSpectrum& sp, int particles, double beta, double* shift = nullptr)
{
    const Shifted f(sp, beta);
    const double t = solve_shift(f, particles);
    if (shift)
        *shift = t;
    return f.energy(t);
}

BedSolution finalize(const SingleParticleSpectrum& sp, int particles, double energy, double beta, double t,
                     int iterations)
{
    BedSolution sol;
    sol.beta = beta;
    sol.target_energy = energy;
    sol.iterations = iterations;
    sol.branch = beta > 0.0 ? BedBranch::positive_beta : BedBranch::negative_beta;
    const double ref = beta > 0.0 ? sp.energies.front() : sp.energies.back();
    sol.mu = ref - t / beta;
    sol.log_z = beta * ref - t;
    sol.z = std::exp(sol.log_z);
    const auto n = occupations(sol, sp);
    double np = 0.0;
    double e = 0.0;
    for (std::size_t s = 0; s < n.size(); ++s) {
        np += n[s];
        e += sp.energies[s] * n[s];
    }
    sol.residual_particles = np - particles;
    sol.residual_energy = e - energy;
    return sol;
}

bool converged(const BedSolution& s, int particles)
{
    (void)particles;
    return std::abs(s.residual_particles) <= kParticleTarget &&
           std::abs(s.residual_energy) <= kEnergyTarget * std::max(1.0, std::abs(s.target_energy));
}

// Damped Newton on (beta, t) for both constraints. Steps that change the
// sign of beta, make t non-positive or fail to reduce the scaled residual
// are halved.
void polish(const SingleParticleSpectrum& sp, int particles, double energy, double& beta, double& t, int& iters)
{
    const auto& eps = sp.energies;
    const double escale = std::max(1.0, std::abs(energy));
    auto residual = [&](double b, double tt, double* jac) {
        const Shifted f(sp, b);
        double rn = -particles;
        double re = -energy;
        double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
        for (std::size_t s = 0; s < eps.size(); ++s) {
            const double ns = 1.0 / std::expm1(f.arg(s, tt));
            const double g = ns * (1.0 + ns);
            const double dx = eps[s] - f.ref;
            rn += ns;
            re += eps[s] * ns;
            a11 -= g;
            a12 -= dx * g;
            a21 -= eps[s] * g;
            a22 -= eps[s] * dx * g;
        }
        if (jac) {
            jac[0] = a11;
            jac[1] = a12;
            jac[2] = a21;
            jac[3] = a22;
        }
        return std::array<double, 2>{rn, re};
    };
    auto norm = [&](const std::array<double, 2>& r) { return std::hypot(r[0], r[1] / escale); };

    double jac[4];
    auto r = residual(beta, t, jac);
    for (int step = 0; step < kMaxPolishSteps; ++step) {
        if (std::abs(r[0]) <= 1e-3 * kParticleTarget && std::abs(r[1]) <= 1e-3 * kEnergyTarget * escale)
            return;
        ++iters;
        // J [dt, dbeta]^T = -r
        const double det = jac[0] * jac[3] - jac[1] * jac[2];
        if (det == 0.0 || !std::isfinite(det))
            return;
        const double dt = (-r[0] * jac[3] + r[1] * jac[1]) / det;
        const double db = (-r[1] * jac[0] + r[0] * jac[2]) / det;
        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h < 40; ++h, lambda *= 0.5) {
            const double nb = beta + lambda * db;
            const double nt = t + lambda * dt;
            if (nt <= 0.0 || (nb > 0.0) != (beta > 0.0) || nb == 0.0)
                continue;
            double nj[4];
            const auto nr = residual(nb, nt, nj);
            if (norm(nr) < norm(r)) {
                beta = nb;
                t = nt;
                r = nr;
                std::copy(nj, nj + 4, jac);
                accepted = true;
                break;
            }
        }
        if (!accepted)
            return;
    }
}

} // namespace

std::string to_string(BedBranch b)
{
    switch (b) {
    case BedBranch::positive_beta:
        return "positive_beta";
    case BedBranch::infinite_temperature:
        return "infinite_temperature";
    case BedBranch::negative_beta:
        return "negative_beta";
    }
    return "unknown";
}

double BedSolution::temperature() const
{
    return beta == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / beta;
}

EnergyDomain energy_domain(int particles, const SingleParticleSpectrum& sp)
{
    if (sp.energies.size() < 2)
        throw DomainError("energy_domain: spectrum needs at least 2 levels");
    const double mean = std::accumulate(sp.energies.begin(), sp.energies.end(), 0.0) / sp.levels();
    return {particles * sp.energies.front(), particles * mean, particles * sp.energies.back()};
}

std::vector<double> occupations_bed(double beta, double mu, const SingleParticleSpectrum& sp)
{
    std::vector<double> n(sp.energies.size());
    for (std::size_t s = 0; s < n.size(); ++s) {
        const double x = beta * (sp.energies[s] - mu);
        if (!(x > 0.0))
            throw DomainError("occupations_bed: beta*(eps_s - mu) must be > 0 at every level");
        n[s] = 1.0 / std::expm1(x);
    }
    return n;
}

std::vector<double> occupations_uniform(double z, int levels)
{
    if (!(z > 0.0 && z < 1.0))
        throw DomainError("occupations_uniform: fugacity must lie in (0, 1)");
    return std::vector<double>(levels, z / (1.0 - z));
}

std::vector<double> occupations(const BedSolution& sol, const SingleParticleSpectrum& sp)
{
    if (sol.beta == 0.0)
        return occupations_uniform(sol.z, sp.levels());
    std::vector<double> n(sp.energies.size());
    for (std::size_t s = 0; s < n.size(); ++s) {
        const double x = sol.beta * sp.energies[s] - sol.log_z;
        if (!(x > 0.0))
            throw DomainError("occupations: solution sits on a pole");
        n[s] = 1.0 / std::expm1(x);
    }
    return n;
}

double solve_mu_given_beta(double beta, int particles, const SingleParticleSpectrum& sp)
{
    if (beta == 0.0)
        throw DomainError("solve_mu_given_beta: beta must be non-zero");
    if (particles < 1)
        throw DomainError("solve_mu_given_beta: need at least one particle");
    const Shifted f(sp, beta);
    const double t = solve_shift(f, particles);
    return f.ref - t / beta;
}

BedSolution solve_bed(int particles, double energy, const SingleParticleSpectrum& sp)
{
    if (particles < 1)
        throw DomainError("solve_bed: need at least one particle");
    const EnergyDomain dom = energy_domain(particles, sp);
    if (!dom.contains(energy))
        throw DomainError("solve_bed: energy " + std::to_string(energy) + " outside (" +
                          std::to_string(dom.e_min) + ", " + std::to_string(dom.e_max) + ")");

    if (energy == dom.e_uniform) {
        BedSolution sol;
        sol.branch = BedBranch::infinite_temperature;
        sol.target_energy = energy;
        sol.z = static_cast<double>(particles) / (particles + sp.levels());
        sol.log_z = std::log(sol.z);
        sol.mu = std::numeric_limits<double>::quiet_NaN();
        const auto n = occupations_uniform(sol.z, sp.levels());
        double np = 0.0, e = 0.0;
        for (std::size_t s = 0; s < n.size(); ++s) {
            np += n[s];
            e += sp.energies[s] * n[s];
        }
        sol.residual_particles = np - particles;
        sol.residual_energy = e - energy;
        return sol;
    }

    // g(beta) = E(beta) - energy is strictly decreasing; bracket on the
    // branch side by doubling away from zero.
    const double sign = energy < dom.e_uniform ? 1.0 : -1.0;
    const double width = sp.energies.back() - sp.energies.front();
    double inner = 0.0; // g has the sign of `sign` here
    double outer = sign / width;
    int iters = 0;
    for (int k = 0;; ++k) {
        const double g = energy_at_beta(sp, particles, outer) - energy;
        ++iters;
        if (sign * g < 0.0)
            break;
        if (k == kMaxBracketDoublings || !std::isfinite(outer))
            throw BedFailure("solve_bed: could not bracket beta", BedSolution{});
        inner = outer;
        outer *= 2.0;
    }

    const double escale = std::max(1.0, std::abs(energy));
    double beta = 0.5 * (inner + outer);
    double t = 0.0;
    for (int it = 0; it < kMaxBisections; ++it) {
        beta = 0.5 * (inner + outer);
        const double g = energy_at_beta(sp, particles, beta, &t) - energy;
        ++iters;
        if (std::abs(g) <= 1e-6 * escale || beta == inner || beta == outer)
            break;
        if (sign * g > 0.0)
            inner = beta;
        else
            outer = beta;
    }

    polish(sp, particles, energy, beta, t, iters);
    BedSolution sol = finalize(sp, particles, energy, beta, t, iters);
    if (!converged(sol, particles))
        throw BedFailure("solve_bed: residuals above target at E=" + std::to_string(energy), sol);
    return sol;
}

} // namespace eigtemp
