#include <doctest.h>

#include "eigtemp/bed.hpp"

#include "oracle.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using namespace eigtemp;

namespace {

void check_closure(const BedSolution& s, int n, double e, const SingleParticleSpectrum& sp)
{
    CHECK(std::abs(s.residual_particles) <= 1e-8 * n);
    CHECK(std::abs(s.residual_energy) <= 1e-8 * std::max(1.0, std::abs(e)));
    const auto occ = occupations(s, sp);
    double cn = 0.0, ce = 0.0;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        CHECK(occ[i] > 0.0);
        cn += occ[i];
        ce += occ[i] * sp.energies[i];
    }
    CHECK(std::abs(cn - n) <= 1e-8 * n);
    CHECK(std::abs(ce - e) <= 1e-8 * std::max(1.0, std::abs(e)));
    CHECK(s.target_energy == e);
}

} // namespace

TEST_CASE("infinite temperature point")
{
    const auto sp = sample_spectrum(11, SpectrumMode::deterministic, 0);
    const auto dom = energy_domain(6, sp);
    CHECK(dom.e_min == 0.0);
    CHECK(dom.e_uniform == 30.0);
    CHECK(dom.e_max == 60.0);
    const auto s = solve_bed(6, 30.0, sp);
    CHECK(s.beta == 0.0);
    CHECK(s.branch == BedBranch::infinite_temperature);
    CHECK(std::abs(s.z - 6.0 / 17.0) <= 1e-12);
    CHECK(std::isnan(s.mu));
    CHECK(std::isinf(s.temperature()));
    for (double x : occupations(s, sp))
        CHECK(x == doctest::Approx(6.0 / 11.0).epsilon(1e-14));
}

TEST_CASE("closure over random energies, deterministic spectrum")
{
    const auto sp = sample_spectrum(11, SpectrumMode::deterministic, 0);
    const auto dom = energy_domain(6, sp);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(dom.e_min, dom.e_max);
    for (int i = 0; i < 100; ++i) {
        double e = u(rng);
        while (!dom.contains(e))
            e = u(rng);
        const auto s = solve_bed(6, e, sp);
        check_closure(s, 6, e, sp);
        CHECK((s.beta > 0.0) == (e < dom.e_uniform));
    }
}

TEST_CASE("closure near the edges and near the center")
{
    for (auto mode : {SpectrumMode::deterministic, SpectrumMode::random}) {
        const auto sp = sample_spectrum(9, mode, 5);
        const auto dom = energy_domain(5, sp);
        const double w = dom.e_max - dom.e_min;
        for (double f : {1e-6, 1e-3, 0.05, 0.4999, 0.5001, 0.95, 1 - 1e-3, 1 - 1e-6}) {
            const double e = dom.e_min + f * w;
            check_closure(solve_bed(5, e, sp), 5, e, sp);
        }
        const double tiny = dom.e_uniform + 1e-9;
        check_closure(solve_bed(5, tiny, sp), 5, tiny, sp);
    }
}

TEST_CASE("solutions match a 2-D grid-refinement search to 4 significant digits")
{
    const auto sp = sample_spectrum(11, SpectrumMode::deterministic, 0);
    for (double e : {4.0, 9.0, 15.0, 22.0, 26.0, 34.0, 45.0, 55.0}) {
        const auto s = solve_bed(6, e, sp);
        const bool positive = e < 30.0;
        const auto o = oracle::grid_oracle(6, e, sp.energies, positive ? 0.0L : -4.0L, positive ? 4.0L : 0.0L, 0.0L, 8.0L);
        REQUIRE(o.cost < 1e-20L);
        const double beta = static_cast<double>(o.beta);
        const double ref = positive ? sp.energies.front() : sp.energies.back();
        const double log_z = static_cast<double>(o.beta * ref - o.w);
        CHECK(std::abs(s.beta - beta) <= 1e-4 * std::abs(beta));
        CHECK(std::abs(s.log_z - log_z) <= 1e-4 * std::abs(log_z));
        CHECK(std::abs(s.z - std::exp(log_z)) <= 1e-4 * std::exp(log_z));
    }
}

TEST_CASE("beta decreases with energy")
{
    const auto sp = sample_spectrum(11, SpectrumMode::random, 3);
    const auto dom = energy_domain(6, sp);
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i < 60; ++i) {
        const double e = dom.e_min + (dom.e_max - dom.e_min) * i / 60.0;
        const double b = solve_bed(6, e, sp).beta;
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("chemical potential at fixed beta")
{
    const auto sp = sample_spectrum(7, SpectrumMode::random, 4);
    for (double beta : {-1.5, -0.2, 0.3, 2.0}) {
        const double mu = solve_mu_given_beta(beta, 4, sp);
        if (beta > 0)
            CHECK(mu < sp.energies.front());
        else
            CHECK(mu > sp.energies.back());
        const auto occ = occupations_bed(beta, mu, sp);
        CHECK(std::accumulate(occ.begin(), occ.end(), 0.0) == doctest::Approx(4.0).epsilon(1e-10));
    }
}

TEST_CASE("domain errors")
{
    const auto sp = sample_spectrum(5, SpectrumMode::deterministic, 0);
    const auto dom = energy_domain(3, sp);
    CHECK_THROWS_AS(solve_bed(3, dom.e_min, sp), DomainError);
    CHECK_THROWS_AS(solve_bed(3, dom.e_max, sp), DomainError);
    CHECK_THROWS_AS(solve_bed(3, dom.e_max + 1.0, sp), DomainError);
    CHECK_THROWS_AS(solve_bed(0, 3.0, sp), DomainError);
    CHECK_THROWS_AS(occupations_bed(1.0, 0.0, sp), DomainError); // mu at eps_1: pole
    CHECK_THROWS_AS(occupations_bed(-1.0, 3.0, sp), DomainError);
    CHECK_THROWS_AS(occupations_uniform(1.0, 5), DomainError);
}

TEST_CASE("branch names")
{
    CHECK(to_string(BedBranch::negative_beta) == "negative_beta");
}
