#include <doctest.h>

#include "eigtemp/fluct.hpp"
#include "eigtemp/parallel.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace eigtemp;

namespace {

EnsembleSpec small_spec(std::size_t r)
{
    EnsembleSpec s;
    s.particles = 4;
    s.levels = 7;
    s.strength = 0.4;
    s.realizations = r;
    s.master_seed = 77;
    s.windows = {{12.0, 20}, {6.0, 10}};
    return s;
}

bool same_records(const EnsembleResult& a, const EnsembleResult& b)
{
    if (a.realizations.size() != b.realizations.size())
        return false;
    for (std::size_t i = 0; i < a.realizations.size(); ++i) {
        const auto& x = a.realizations[i];
        const auto& y = b.realizations[i];
        if (x.realization != y.realization || x.windows != y.windows || x.records.size() != y.records.size())
            return false;
        for (std::size_t j = 0; j < x.records.size(); ++j)
            if (x.records[j].energy != y.records[j].energy || x.records[j].ond != y.records[j].ond ||
                x.records[j].npc != y.records[j].npc)
                return false;
        for (std::size_t w = 0; w < x.thermal.size(); ++w)
            for (std::size_t j = 0; j < x.thermal[w].size(); ++j)
                if (x.thermal[w][j].bare.solution.beta != y.thermal[w][j].bare.solution.beta)
                    return false;
    }
    return true;
}

EigenstateRecord fake(std::vector<double> ond, double npc = 10.0)
{
    EigenstateRecord r;
    r.ond = std::move(ond);
    r.npc = npc;
    return r;
}

} // namespace

TEST_CASE("seed derivation")
{
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t m = 0; m < 20; ++m)
        for (std::uint64_t i = 0; i < 50; ++i)
            seen.insert(derive_seed(m, i));
    CHECK(seen.size() == 1000);
    const auto a = realization_seeds(5, 3);
    const auto b = realization_seeds(5, 0);
    CHECK(a.spectrum == b.spectrum);
    CHECK(a.couplings != b.couplings);
    CHECK(realization_seeds(5, 3, true).spectrum != b.spectrum);
}

TEST_CASE("ensemble counting, determinism and the serial reference")
{
    const auto spec = small_spec(100);
    const auto res = run_ensemble(spec);
    CHECK(res.failures.empty());
    REQUIRE(res.realizations.size() == 100);
    std::size_t w0 = 0, w1 = 0;
    for (std::size_t i = 0; i < res.realizations.size(); ++i) {
        const auto& r = res.realizations[i];
        CHECK(r.realization == i);
        w0 += r.windows[0].size();
        w1 += r.windows[1].size();
        CHECK(r.thermal[0].size() == r.windows[0].size());
    }
    CHECK(w0 == 100 * 20);
    CHECK(w1 == 100 * 10);

    const auto again = run_ensemble(spec);
    CHECK(same_records(res, again));
    auto short_spec = spec;
    short_spec.realizations = 10;
    CHECK(same_records(serial::run_ensemble(short_spec), run_ensemble(short_spec)));
}

TEST_CASE("one realization reproduces the single-run pipeline")
{
    auto spec = small_spec(1);
    spec.retain_all = true;
    const auto res = run_ensemble(spec);
    const BasisTable t(4, 7);
    const auto b = build_realization(t, 0.4, spec.mode, realization_seeds(spec.master_seed, 0));
    const auto recs = build_records(diagonalize(b), b);
    REQUIRE(res.realizations[0].records.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(res.realizations[0].records[i].energy == recs[i].energy);
        CHECK(res.realizations[0].records[i].ond == recs[i].ond);
    }
}

TEST_CASE("ensemble validation and memory budget")
{
    auto spec = small_spec(3);
    spec.realizations = 0;
    CHECK_THROWS_AS(run_ensemble(spec), DomainError);
    spec = small_spec(3);
    spec.windows.clear();
    CHECK_THROWS_AS(run_ensemble(spec), DomainError);
    spec = small_spec(3);
    spec.memory_budget = 1000;
    CHECK_THROWS_AS(run_ensemble(spec), DomainError);
    CHECK(ensemble_footprint(small_spec(3)) > 4 * 210 * 210 * sizeof(double));
}

TEST_CASE("relative fluctuations")
{
    const std::vector<EigenstateRecord> same = {fake({1, 2, 0}), fake({1, 2, 0}), fake({1, 2, 0})};
    const auto z = relative_fluctuations(same);
    CHECK(z.excluded_levels == std::vector<int>{2});
    CHECK(z.samples.size() == 6);
    for (const auto& s : z.samples)
        CHECK(s.value == 0.0);

    const std::vector<EigenstateRecord> w = {fake({1.0, 2.0, 3.0}), fake({1.5, 1.0, 3.5}), fake({0.5, 3.0, 2.5}),
                                             fake({1.2, 2.2, 2.6})};
    const auto f = relative_fluctuations(w, 9);
    for (int s = 0; s < 3; ++s) {
        const auto v = f.level_values(s);
        REQUIRE(v.size() == 4);
        double mean = 0.0;
        for (double x : v)
            mean += x;
        CHECK(std::abs(mean / 4) < 1e-12);
    }
    CHECK(f.samples[0].realization == 9);
    CHECK(f.level_values(0)[1] == doctest::Approx(1.5 / 1.05 - 1.0));
    CHECK_THROWS_AS(relative_fluctuations(std::vector<EigenstateRecord>{fake({1, 2})}), DomainError);
}

TEST_CASE("pooled and disorder fluctuations")
{
    const auto res = run_ensemble(small_spec(30));
    const auto pooled = pooled_window_fluctuations(res, 0);
    CHECK(pooled.excluded_levels.empty());
    CHECK(pooled.samples.size() == 30 * 20 * 7);
    const auto dis = disorder_fluctuations(res, 0);
    CHECK(dis.samples.size() == 30 * 7);
    std::set<std::size_t> reals;
    for (const auto& s : dis.samples)
        reals.insert(s.realization);
    CHECK(reals.size() == 30);
}

TEST_CASE("Gaussian fit on synthetic samples")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 0.1);
    std::vector<double> x(10000);
    for (auto& v : x)
        v = g(rng);
    const auto f = gaussian_fit(x);
    REQUIRE(f.fitted);
    CHECK(std::abs(f.mean) < 0.03 * 0.1);
    CHECK(std::abs(f.sigma / 0.1 - 1.0) < 0.03);
    CHECK(f.goodness < 2.0);
    CHECK(gaussian_fit(x, BinRule::square_root).goodness < 2.0);

    const double half = 0.1 * std::sqrt(3.0);
    std::uniform_real_distribution<double> u(-half, half);
    std::vector<double> y(10000);
    for (auto& v : y)
        v = u(rng);
    const auto fu = gaussian_fit(y);
    CHECK(fu.goodness > f.goodness);
    CHECK(fu.goodness > 2.0);
    CHECK(gaussian_fit(y, BinRule::square_root).goodness > 2.0);

    CHECK(gaussian_fit(std::vector<double>(50, 1.0)).degenerate);
    CHECK_THROWS_AS(gaussian_fit(std::vector<double>(29, 1.0)), DomainError);
}

TEST_CASE("bin rule does not flip the verdict at desk-scale sizes")
{
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t n : {1000u, 4000u}) {
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = g(rng);
            b[i] = u(rng);
        }
        CHECK((gaussian_fit(a).goodness < 2.0) == (gaussian_fit(a, BinRule::square_root).goodness < 2.0));
        CHECK((gaussian_fit(b).goodness < 2.0) == (gaussian_fit(b, BinRule::square_root).goodness < 2.0));
    }
}

TEST_CASE("critical N_pc on a synthetic cloud")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(std::log(1.0), std::log(1000.0));
    std::vector<double> npc, dloc;
    const double c = 3.0;
    for (int i = 0; i < 5000; ++i) {
        npc.push_back(std::exp(u(rng)));
        dloc.push_back(c / npc.back());
    }
    const auto a = critical_npc(npc, dloc, 0.1);
    CHECK(a.n_cr == doctest::Approx(c / 0.1).epsilon(1e-10));
    const auto b = critical_npc(npc, dloc, 0.4);
    CHECK(b.n_cr == doctest::Approx(c / 0.4).epsilon(1e-10));
    CHECK(b.n_cr < a.n_cr);
    CHECK_THROWS_AS(critical_npc(npc, dloc, 100.0), ConvergenceError);
    CHECK_THROWS_AS(critical_npc(npc, std::vector<double>{1.0}, 0.1), DomainError);
}

TEST_CASE("scaling curve on synthetic groups")
{
    std::vector<FluctuationGroup> g;
    for (int i = 0; i < 400; ++i) {
        const double npc = std::exp(std::log(2.0) + i * (std::log(2000.0) - std::log(2.0)) / 399.0);
        g.push_back({npc, 2.0 / std::sqrt(npc), 0.0});
    }
    const auto rep = scaling_curve(g, 20.0);
    REQUIRE(rep.fitted);
    CHECK(rep.exponent == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(rep.amplitude == doctest::Approx(2.0).epsilon(1e-10));
    for (std::size_t i = 1; i < rep.bins.size(); ++i)
        CHECK(rep.bins[i].npc_over_ncr > rep.bins[i - 1].npc_over_ncr);

    // flat below N_cr, decaying above
    std::vector<FluctuationGroup> h;
    for (int i = 0; i < 400; ++i) {
        const double npc = std::exp(std::log(2.0) + i * (std::log(2000.0) - std::log(2.0)) / 399.0);
        h.push_back({npc, npc < 20.0 ? 2.0 / std::sqrt(20.0) : 2.0 / std::sqrt(npc), 0.0});
    }
    const auto p = scaling_curve(h, 20.0);
    CHECK(p.plateau_ratio == doctest::Approx(1.0));
    CHECK(p.exponent < -0.4);

    const std::vector<FluctuationGroup> few = {{1.0, 0.5, 0.0}, {30.0, 0.2, 0.0}};
    CHECK_FALSE(scaling_curve(few, 20.0, 4).fitted);
}

TEST_CASE("fluctuation groups need the full spectrum")
{
    CHECK_THROWS_AS(fluctuation_groups(run_ensemble(small_spec(1))), DomainError);
    auto spec = small_spec(2);
    spec.retain_all = true;
    const auto g = fluctuation_groups(run_ensemble(spec), 20);
    CHECK(g.size() == 2 * (210 / 20));
    for (const auto& x : g)
        CHECK(x.fluct > 0.0);
}

TEST_CASE("Kolmogorov-Smirnov two-sample statistic")
{
    const std::vector<double> a = {1, 2, 3, 4};
    CHECK(ks_two_sample(a, a).statistic == 0.0);
    CHECK(ks_two_sample(a, std::vector<double>{10, 11}).statistic == 1.0);
    CHECK(ks_two_sample(a, std::vector<double>{2.5}).statistic == doctest::Approx(0.5));

    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x(3000), y(3000), z(3000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = g(rng);
        y[i] = g(rng);
        z[i] = g(rng) + 0.3;
    }
    CHECK(ks_two_sample(x, y).same);
    CHECK_FALSE(ks_two_sample(x, z).same);
    CHECK(ks_two_sample(x, y).critical == doctest::Approx(1.628 * std::sqrt(2.0 / 3000.0)));
}
