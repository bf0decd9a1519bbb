#include <doctest.h>

#include "eigtemp/errors.hpp"
#include "eigtemp/hamiltonian.hpp"
#include "oracle.hpp"

#include <cmath>
#include <map>
#include <set>

using namespace eigtemp;

namespace {

std::vector<std::vector<int>> states_of(const BasisTable& t)
{
    std::vector<std::vector<int>> s;
    for (std::size_t i = 0; i < t.dimension(); ++i) {
        const auto st = t.state(i);
        s.emplace_back(st.begin(), st.end());
    }
    return s;
}

// Interaction operator sum V_{s1s2s3s4} a+ a+ a a on the product space,
// restricted to the N-particle states (no prefactor).
Eigen::MatrixXd brute_interaction(const BasisTable& t, const CouplingTensor& v)
{
    const int m = t.levels();
    const oracle::ProductSpace ps(t.particles(), m);
    std::vector<Eigen::MatrixXd> a;
    for (int s = 0; s < m; ++s)
        a.push_back(ps.annihilate(s));
    Eigen::MatrixXd op = Eigen::MatrixXd::Zero(ps.dimension(), ps.dimension());
    for (int s1 = 0; s1 < m; ++s1)
        for (int s2 = 0; s2 < m; ++s2)
            for (int s3 = 0; s3 < m; ++s3)
                for (int s4 = 0; s4 < m; ++s4)
                    op += v(s1, s2, s3, s4) * (a[s1].transpose() * a[s2].transpose() * a[s3] * a[s4]);
    return ps.restrict(op, states_of(t));
}

} // namespace

TEST_CASE("deterministic spectrum is eps_s = s")
{
    const auto sp = sample_spectrum(11, SpectrumMode::deterministic, 99);
    for (int s = 0; s < 11; ++s)
        CHECK(sp.energies[s] == s);
}

TEST_CASE("random spectrum: increasing, mean spacing near 1 over an ensemble")
{
    double total = 0.0;
    int count = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        const auto sp = sample_spectrum(11, SpectrumMode::random, seed);
        for (int s = 1; s < 11; ++s) {
            const double d = sp.energies[s] - sp.energies[s - 1];
            CHECK(d >= 0.5);
            CHECK(d <= 1.5);
            total += d;
            ++count;
        }
    }
    CHECK(std::abs(total / count - 1.0) < 0.02);
    const auto a = sample_spectrum(11, SpectrumMode::random, 3);
    const auto b = sample_spectrum(11, SpectrumMode::random, 3);
    CHECK(a.energies == b.energies);
    CHECK_THROWS_AS(sample_spectrum(0, SpectrumMode::random, 1), DomainError);
}

TEST_CASE("coupling tensor symmetries")
{
    const auto v = sample_couplings(5, 0.3, 17);
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
            for (int c = 0; c < 5; ++c)
                for (int d = 0; d < 5; ++d) {
                    const double x = v(a, b, c, d);
                    CHECK(v(b, a, c, d) == x);
                    CHECK(v(a, b, d, c) == x);
                    CHECK(v(c, d, a, b) == x);
                    CHECK(v(d, c, b, a) == x);
                }
}

TEST_CASE("coupling draws: one per unordered pair of pairs, zero mean, width V")
{
    const double strength = 0.4;
    const auto v = sample_couplings(11, strength, 3);
    const auto e = v.canonical_entries();
    CHECK(e.size() == 66 * 67 / 2);
    std::set<double> distinct(e.begin(), e.end());
    CHECK(distinct.size() == e.size());
    double mean = 0.0, sq = 0.0;
    for (double x : e) {
        mean += x;
        sq += x * x;
    }
    mean /= e.size();
    const double sd = std::sqrt(sq / e.size() - mean * mean);
    CHECK(std::abs(mean) < 4 * strength / std::sqrt(e.size()));
    CHECK(std::abs(sd / strength - 1.0) < 0.05);

    const auto w = v.scaled(0.25);
    CHECK(w.strength() == doctest::Approx(0.1));
    for (std::size_t i = 0; i < e.size(); ++i)
        CHECK(w.unit_draws()[i] == v.unit_draws()[i]);
}

TEST_CASE("unperturbed energies")
{
    const BasisTable t(3, 4);
    const auto sp = sample_spectrum(4, SpectrumMode::random, 8);
    const auto e0 = build_h0(t, sp);
    for (std::size_t k = 0; k < t.dimension(); ++k) {
        double e = 0.0;
        for (int s = 0; s < 4; ++s)
            e += t.occupation(k, s) * sp.energies[s];
        CHECK(e0[k] == doctest::Approx(e).epsilon(1e-15));
    }
}

TEST_CASE("assembled matrix equals the tensor-product construction off the diagonal")
{
    for (auto [n, m] : {std::pair{2, 3}, {3, 4}, {4, 3}}) {
        const BasisTable t(n, m);
        const auto sp = sample_spectrum(m, SpectrumMode::random, 2);
        const auto v = sample_couplings(m, 0.7, 4);
        const auto h = assemble(t, sp, v);
        const Eigen::MatrixXd ref = h.interaction_scale * brute_interaction(t, v);
        for (std::size_t i = 0; i < t.dimension(); ++i)
            for (std::size_t j = 0; j < t.dimension(); ++j) {
                if (i == j)
                    CHECK(h.matrix(i, j) == h.e0[i]);
                else
                    CHECK(std::abs(h.matrix(i, j) - ref(i, j)) < 1e-12);
            }
    }
}

TEST_CASE("interaction prefactor makes V the rms off-diagonal element")
{
    // E[H_jk^2] over draws is kappa^2 V^2 sum_key c_key(j,k)^2 where c_key is
    // the matrix of one unit canonical coupling with its symmetry images.
    for (auto [n, m] : {std::pair{2, 3}, {3, 3}, {2, 4}}) {
        const BasisTable t(n, m);
        const std::size_t pairs = m * (m + 1) / 2;
        const std::size_t keys = pairs * (pairs + 1) / 2;
        const std::size_t d = t.dimension();
        Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(d, d);
        for (std::size_t key = 0; key < keys; ++key) {
            std::vector<double> unit(keys, 0.0);
            unit[key] = 1.0;
            const CouplingTensor v(m, 1.0, 0, unit);
            const Eigen::MatrixXd c = brute_interaction(t, v);
            sumsq += c.cwiseProduct(c);
        }
        double total = 0.0;
        int targets = 0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                if (i != j && sumsq(i, j) > 0.0) {
                    total += sumsq(i, j);
                    ++targets;
                }
        const double kappa = std::sqrt(targets / total);
        CHECK(interaction_normalization(t) == doctest::Approx(kappa).epsilon(1e-12));
    }
}

TEST_CASE("assembly properties")
{
    const BasisTable t(4, 6);
    const auto sp = sample_spectrum(6, SpectrumMode::random, 10);
    const auto v = sample_couplings(6, 0.4, 11);
    const auto h = assemble(t, sp, v);
    CHECK(relative_asymmetry(h.matrix) == 0.0);
    for (std::size_t k = 0; k < t.dimension(); ++k)
        CHECK(h.matrix(k, k) == h.e0[k]);

    const auto h0 = assemble(t, sp, v.scaled(0.0));
    CHECK(h0.matrix.isApprox(Eigen::MatrixXd(Eigen::VectorXd::Map(h0.e0.data(), h0.e0.size()).asDiagonal()), 0.0));

    SUBCASE("serial reference is bit-identical")
    {
        const auto r = serial::assemble(t, sp, v);
        CHECK((r.matrix.array() == h.matrix.array()).all());
        CHECK(r.e0 == h.e0);
        CHECK(r.interaction_scale == h.interaction_scale);
    }
    SUBCASE("mismatched level counts are rejected")
    {
        CHECK_THROWS_AS(assemble(t, sample_spectrum(5, SpectrumMode::random, 1), v), DomainError);
    }
}

TEST_CASE("asymmetry detection")
{
    Eigen::MatrixXd a(3, 3);
    a << 1, 2, 3, 2, 1, 4, 3, 4, 1;
    CHECK(relative_asymmetry(a) == 0.0);
    a(0, 2) += 0.04;
    CHECK(relative_asymmetry(a) == doctest::Approx(0.01));
}

TEST_CASE("spectrum mode names")
{
    CHECK(parse_spectrum_mode("random") == SpectrumMode::random);
    CHECK(parse_spectrum_mode(to_string(SpectrumMode::deterministic)) == SpectrumMode::deterministic);
    CHECK_THROWS_AS(parse_spectrum_mode("gaussian"), DomainError);
}
