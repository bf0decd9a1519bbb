#include "eigtemp/fluct.hpp"

#include "eigtemp/errors.hpp"
#include "eigtemp/parallel.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace eigtemp {

RealizationSeeds realization_seeds(std::uint64_t master, std::size_t realization, bool vary_spectrum)
{
    return {derive_seed(master, vary_spectrum ? 2 * realization : 0), derive_seed(master, 2 * realization + 1)};
}

HamiltonianBundle build_realization(const BasisTable& basis, double strength, SpectrumMode mode,
                                    const RealizationSeeds& seeds)
{
    const auto sp = sample_spectrum(basis.levels(), mode, seeds.spectrum);
    const auto v = sample_couplings(basis.levels(), strength, seeds.couplings);
    return assemble(basis, sp, v);
}

void validate(const EnsembleSpec& spec)
{
    if (spec.particles < 1 || spec.levels < 1)
        throw DomainError("ensemble: N and M must be >= 1");
    if (!(spec.strength >= 0.0) || !std::isfinite(spec.strength))
        throw DomainError("ensemble: V must be finite and >= 0");
    if (spec.realizations < 1)
        throw DomainError("ensemble: realization count must be >= 1");
    for (const auto& w : spec.windows)
        if (w.count < 1 || !std::isfinite(w.energy))
            throw DomainError("ensemble: windows need a finite energy and count >= 1");
    if (spec.windows.empty() && !spec.retain_all)
        throw DomainError("ensemble: nothing to retain (no windows and retain_all off)");
}

std::size_t ensemble_footprint(const EnsembleSpec& spec)
{
    const std::size_t n = basis_dimension(spec.particles, spec.levels);
    // matrix, eigenvectors and the divide-and-conquer workspace
    const std::size_t per_run = 4 * n * n * sizeof(double);
    std::size_t kept = 0;
    for (const auto& w : spec.windows)
        kept += w.count;
    if (spec.retain_all)
        kept = n + kept;
    const std::size_t per_state = sizeof(EigenstateRecord) + spec.levels * sizeof(double) + sizeof(ThermalRecord);
    const std::size_t concurrent = std::min<std::size_t>(spec.realizations, std::max(1, thread_count()));
    return concurrent * per_run + spec.realizations * kept * per_state;
}

namespace {

std::size_t default_budget()
{
    const long pages = ::sysconf(_SC_PHYS_PAGES);
    const long size = ::sysconf(_SC_PAGE_SIZE);
    if (pages <= 0 || size <= 0)
        return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(0.8 * static_cast<double>(pages) * static_cast<double>(size));
}

void check_budget(const EnsembleSpec& spec)
{
    const std::size_t budget = spec.memory_budget ? spec.memory_budget : default_budget();
    const std::size_t need = ensemble_footprint(spec);
    if (need > budget) {
        std::ostringstream os;
        os << "ensemble: estimated footprint " << need << " bytes exceeds budget " << budget;
        throw DomainError(os.str());
    }
}

RealizationResult run_one(const EnsembleSpec& spec, const BasisTable& basis, std::size_t r, bool reference)
{
    RealizationResult out;
    out.realization = r;
    out.seeds = realization_seeds(spec.master_seed, r, spec.vary_spectrum);
    const auto sp = sample_spectrum(basis.levels(), spec.mode, out.seeds.spectrum);
    const auto v = sample_couplings(basis.levels(), spec.strength, out.seeds.couplings);
    const auto bundle = reference ? serial::assemble(basis, sp, v) : assemble(basis, sp, v);
    const auto d = diagonalize(bundle);
    auto all = reference ? serial::build_records(d, bundle) : build_records(d, bundle);
    const auto dos0 = dos_moments(bundle.e0, DosKind::unperturbed);
    out.inputs = {dos0.variance, reference ? serial::mean_sf_variance(bundle) : mean_sf_variance(bundle),
                  dos0.center};

    std::vector<std::vector<std::size_t>> members;
    for (const auto& w : spec.windows)
        members.push_back(closest_in_energy(all, w.energy, w.count));

    if (spec.retain_all) {
        out.records = std::move(all);
        out.windows = std::move(members);
    } else {
        std::vector<std::size_t> keep;
        for (const auto& m : members)
            keep.insert(keep.end(), m.begin(), m.end());
        std::sort(keep.begin(), keep.end());
        keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
        for (std::size_t i : keep)
            out.records.push_back(std::move(all[i]));
        for (auto& m : members)
            for (auto& i : m)
                i = static_cast<std::size_t>(std::lower_bound(keep.begin(), keep.end(), i) - keep.begin());
        out.windows = std::move(members);
    }

    for (const auto& m : out.windows) {
        std::vector<EigenstateRecord> sel;
        sel.reserve(m.size());
        for (std::size_t i : m)
            sel.push_back(out.records[i]);
        out.thermal.push_back(reference ? serial::thermal_records(sel, sp, spec.particles, out.inputs, spec.strength)
                                        : thermal_records(sel, sp, spec.particles, out.inputs, spec.strength));
    }
    return out;
}

void finish(EnsembleResult& res)
{
    std::sort(res.realizations.begin(), res.realizations.end(),
              [](const auto& a, const auto& b) { return a.realization < b.realization; });
    std::sort(res.failures.begin(), res.failures.end(),
              [](const auto& a, const auto& b) { return a.realization < b.realization; });
    if (static_cast<double>(res.failures.size()) > 0.05 * static_cast<double>(res.spec.realizations)) {
        std::ostringstream os;
        os << "ensemble: " << res.failures.size() << " of " << res.spec.realizations
           << " realizations failed; first: #" << res.failures.front().realization << ": "
           << res.failures.front().message;
        throw ConvergenceError(os.str());
    }
}

} // namespace

EnsembleResult run_ensemble(const EnsembleSpec& spec)
{
    validate(spec);
    check_budget(spec);
    EnsembleResult res;
    res.spec = spec;
    const BasisTable basis(spec.particles, spec.levels);
    const auto count = static_cast<std::ptrdiff_t>(spec.realizations);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t r = 0; r < count; ++r) {
        try {
            auto one = run_one(spec, basis, static_cast<std::size_t>(r), false);
#pragma omp critical(eigtemp_ensemble_collect)
            res.realizations.push_back(std::move(one));
        } catch (const std::exception& e) {
#pragma omp critical(eigtemp_ensemble_collect)
            res.failures.push_back({static_cast<std::size_t>(r), e.what()});
        }
    }
    finish(res);
    return res;
}

namespace serial {
EnsembleResult run_ensemble(const EnsembleSpec& spec)
{
    validate(spec);
    check_budget(spec);
    EnsembleResult res;
    res.spec = spec;
    const BasisTable basis(spec.particles, spec.levels);
    for (std::size_t r = 0; r < spec.realizations; ++r) {
        try {
            res.realizations.push_back(run_one(spec, basis, r, true));
        } catch (const std::exception& e) {
            res.failures.push_back({r, e.what()});
        }
    }
    finish(res);
    return res;
}
} // namespace serial

std::vector<double> FluctuationSamples::level_values(int level) const
{
    std::vector<double> v;
    for (const auto& s : samples)
        if (s.level == level)
            v.push_back(s.value);
    return v;
}

std::vector<double> FluctuationSamples::values() const
{
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples)
        v.push_back(s.value);
    return v;
}

void FluctuationSamples::append(const FluctuationSamples& other)
{
    samples.insert(samples.end(), other.samples.begin(), other.samples.end());
    for (int l : other.excluded_levels)
        if (std::find(excluded_levels.begin(), excluded_levels.end(), l) == excluded_levels.end())
            excluded_levels.push_back(l);
    std::sort(excluded_levels.begin(), excluded_levels.end());
}

namespace {

constexpr double kMeanFloor = 1e-12;

FluctuationSamples relative_to_mean(std::span<const EigenstateRecord* const> recs,
                                    std::span<const std::size_t> realization)
{
    if (recs.size() < 2)
        throw DomainError("relative_fluctuations: need at least 2 records");
    const std::size_t m = recs.front()->ond.size();
    std::vector<double> mean(m, 0.0);
    for (const auto* r : recs)
        for (std::size_t s = 0; s < m; ++s)
            mean[s] += r->ond[s];
    for (double& x : mean)
        x /= static_cast<double>(recs.size());
    FluctuationSamples out;
    for (std::size_t s = 0; s < m; ++s) {
        if (mean[s] < kMeanFloor) {
            out.excluded_levels.push_back(static_cast<int>(s));
            continue;
        }
        for (std::size_t i = 0; i < recs.size(); ++i)
            out.samples.push_back({static_cast<int>(s), (recs[i]->ond[s] - mean[s]) / mean[s], realization[i],
                                   recs[i]->alpha, recs[i]->energy, recs[i]->npc});
    }
    return out;
}

} // namespace

FluctuationSamples relative_fluctuations(std::span<const EigenstateRecord> window, std::size_t realization)
{
    std::vector<const EigenstateRecord*> p;
    for (const auto& r : window)
        p.push_back(&r);
    const std::vector<std::size_t> id(p.size(), realization);
    return relative_to_mean(p, id);
}

FluctuationSamples pooled_window_fluctuations(const EnsembleResult& result, std::size_t window)
{
    FluctuationSamples out;
    for (const auto& r : result.realizations) {
        if (window >= r.windows.size())
            throw DomainError("pooled_window_fluctuations: no such window");
        std::vector<const EigenstateRecord*> p;
        for (std::size_t i : r.windows[window])
            p.push_back(&r.records[i]);
        const std::vector<std::size_t> id(p.size(), r.realization);
        out.append(relative_to_mean(p, id));
    }
    return out;
}

FluctuationSamples disorder_fluctuations(const EnsembleResult& result, std::size_t window)
{
    if (window >= result.spec.windows.size())
        throw DomainError("disorder_fluctuations: no such window");
    const double target = result.spec.windows[window].energy;
    std::vector<const EigenstateRecord*> p;
    std::vector<std::size_t> id;
    for (const auto& r : result.realizations) {
        const EigenstateRecord* best = nullptr;
        for (std::size_t i : r.windows[window])
            if (!best || std::abs(r.records[i].energy - target) < std::abs(best->energy - target))
                best = &r.records[i];
        if (best) {
            p.push_back(best);
            id.push_back(r.realization);
        }
    }
    return relative_to_mean(p, id);
}

GaussianFit gaussian_fit(std::span<const double> samples, BinRule rule)
{
    GaussianFit f;
    f.samples = samples.size();
    if (samples.size() < 30)
        throw DomainError("gaussian_fit: need at least 30 samples");
    const double n = static_cast<double>(samples.size());
    f.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double var = 0.0;
    for (double x : samples)
        var += (x - f.mean) * (x - f.mean);
    f.sigma = std::sqrt(var / n);
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(f.sigma > 0.0) || hi == lo) {
        f.degenerate = true;
        f.goodness = std::numeric_limits<double>::quiet_NaN();
        return f;
    }

    const int k = rule == BinRule::sturges ? static_cast<int>(std::ceil(std::log2(n))) + 1
                                           : static_cast<int>(std::ceil(std::sqrt(n)));
    const double width = (hi - lo) / k;
    std::vector<double> observed(k, 0.0);
    for (double x : samples)
        observed[std::min(k - 1, static_cast<int>((x - lo) / width))] += 1.0;
    auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - f.mean) / (f.sigma * std::sqrt(2.0))); };
    std::vector<double> expected(k);
    for (int i = 0; i < k; ++i) {
        const double a = i == 0 ? 0.0 : cdf(lo + i * width);
        const double b = i == k - 1 ? 1.0 : cdf(lo + (i + 1) * width);
        expected[i] = n * (b - a);
    }

    std::vector<std::pair<double, double>> groups; // (observed, expected)
    double o = 0.0, e = 0.0;
    for (int i = 0; i < k; ++i) {
        o += observed[i];
        e += expected[i];
        if (e >= 5.0) {
            groups.emplace_back(o, e);
            o = e = 0.0;
        }
    }
    if (e > 0.0 || o > 0.0) {
        if (groups.empty())
            groups.emplace_back(o, e);
        else {
            groups.back().first += o;
            groups.back().second += e;
        }
    }
    double chi2 = 0.0;
    for (const auto& [go, ge] : groups)
        chi2 += (go - ge) * (go - ge) / ge;
    f.bins = static_cast<int>(groups.size());
    f.dof = f.bins - 3;
    if (f.dof < 1) {
        f.goodness = std::numeric_limits<double>::quiet_NaN();
        return f;
    }
    f.goodness = chi2 / f.dof;
    f.fitted = true;
    return f;
}

namespace {

double median_positive(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1)
        return v[n / 2];
    return std::sqrt(v[n / 2 - 1] * v[n / 2]);
}

} // namespace

CriticalResult critical_npc(std::span<const double> npc, std::span<const double> dloc, double strength, int bins,
                            std::size_t min_count)
{
    if (npc.size() != dloc.size() || npc.empty())
        throw DomainError("critical_npc: need equally many N_pc and d_loc values");
    if (!(strength > 0.0))
        throw DomainError("critical_npc: V must be > 0");
    if (bins < 1)
        throw DomainError("critical_npc: bins must be >= 1");
    for (std::size_t i = 0; i < npc.size(); ++i)
        if (!(npc[i] > 0.0) || !(dloc[i] > 0.0))
            throw DomainError("critical_npc: N_pc and d_loc must be > 0");

    const auto [mn, mx] = std::minmax_element(npc.begin(), npc.end());
    const double llo = std::log(*mn);
    const double lhi = std::log(*mx);
    const double step = lhi > llo ? (lhi - llo) / bins : 1.0;
    std::vector<std::vector<double>> bn(bins), bd(bins);
    for (std::size_t i = 0; i < npc.size(); ++i) {
        const int b = std::min(bins - 1, static_cast<int>((std::log(npc[i]) - llo) / step));
        bn[b].push_back(npc[i]);
        bd[b].push_back(dloc[i]);
    }
    CriticalResult res;
    for (int b = 0; b < bins; ++b)
        if (bn[b].size() >= std::max<std::size_t>(min_count, 1))
            res.bins.push_back({median_positive(bn[b]), median_positive(bd[b]), bn[b].size()});

    for (std::size_t i = 0; i < res.bins.size(); ++i) {
        const auto& a = res.bins[i];
        if (a.dloc == strength) {
            res.n_cr = a.npc;
            return res;
        }
        if (i + 1 == res.bins.size())
            break;
        const auto& b = res.bins[i + 1];
        if ((a.dloc - strength) * (b.dloc - strength) < 0.0) {
            const double t = (std::log(strength) - std::log(a.dloc)) / (std::log(b.dloc) - std::log(a.dloc));
            res.n_cr = std::exp(std::log(a.npc) + t * (std::log(b.npc) - std::log(a.npc)));
            return res;
        }
    }
    std::ostringstream os;
    os << "critical_npc: median d_loc never crosses V=" << strength << "; bins (N_pc, median d_loc):";
    for (const auto& b : res.bins)
        os << " (" << b.npc << ", " << b.dloc << ")";
    throw ConvergenceError(os.str());
}

std::vector<FluctuationGroup> fluctuation_groups(const EnsembleResult& result, std::size_t group_size)
{
    if (!result.spec.retain_all)
        throw DomainError("fluctuation_groups: ensemble must retain all eigenstates");
    if (group_size < 2)
        throw DomainError("fluctuation_groups: group size must be >= 2");
    std::vector<FluctuationGroup> out;
    for (const auto& r : result.realizations) {
        const auto& rec = r.records;
        for (std::size_t start = 0; start + group_size <= rec.size(); start += group_size) {
            const std::size_t m = rec[start].ond.size();
            std::vector<double> mean(m, 0.0);
            FluctuationGroup g;
            for (std::size_t i = start; i < start + group_size; ++i) {
                g.npc += rec[i].npc / group_size;
                g.energy += rec[i].energy / group_size;
                for (std::size_t s = 0; s < m; ++s)
                    mean[s] += rec[i].ond[s] / group_size;
            }
            double sum = 0.0;
            std::size_t terms = 0;
            for (std::size_t s = 0; s < m; ++s) {
                if (mean[s] < kMeanFloor)
                    continue;
                for (std::size_t i = start; i < start + group_size; ++i)
                    sum += std::abs(rec[i].ond[s] - mean[s]) / mean[s];
                terms += group_size;
            }
            if (terms == 0)
                continue;
            g.fluct = sum / static_cast<double>(terms);
            out.push_back(g);
        }
    }
    return out;
}

ScalingReport scaling_curve(std::span<const FluctuationGroup> groups, double n_cr, int bins)
{
    if (!(n_cr > 0.0))
        throw DomainError("scaling_curve: N_cr must be > 0");
    if (bins < 1)
        throw DomainError("scaling_curve: bins must be >= 1");
    std::vector<std::pair<double, double>> pts; // (N_pc / N_cr, fluct)
    for (const auto& g : groups)
        if (g.npc > 0.0 && g.fluct > 0.0)
            pts.emplace_back(g.npc / n_cr, g.fluct);
    if (pts.empty())
        throw DomainError("scaling_curve: no usable groups");

    ScalingReport rep;
    rep.n_cr = n_cr;
    double llo = std::numeric_limits<double>::infinity();
    double lhi = -llo;
    for (const auto& p : pts) {
        llo = std::min(llo, std::log(p.first));
        lhi = std::max(lhi, std::log(p.first));
    }
    const double step = lhi > llo ? (lhi - llo) / bins : 1.0;
    std::vector<double> slx(bins, 0.0), sf(bins, 0.0), slf(bins, 0.0);
    std::vector<std::size_t> cnt(bins, 0);
    for (const auto& [x, f] : pts) {
        const int b = std::min(bins - 1, static_cast<int>((std::log(x) - llo) / step));
        slx[b] += std::log(x);
        sf[b] += f;
        slf[b] += std::log(f);
        ++cnt[b];
    }
    for (int b = 0; b < bins; ++b) {
        if (cnt[b] == 0)
            continue;
        const double c = static_cast<double>(cnt[b]);
        rep.bins.push_back({std::exp(slx[b] / c), sf[b] / c, std::exp(slf[b] / c), cnt[b]});
    }

    double sub_lo = std::numeric_limits<double>::infinity();
    double sub_hi = 0.0;
    std::size_t sub = 0;
    std::vector<double> xs, ys;
    for (const auto& b : rep.bins) {
        if (b.npc_over_ncr > 1.0) {
            xs.push_back(std::log(b.npc_over_ncr));
            ys.push_back(std::log(b.geo_mean_fluct));
        } else if (b.npc_over_ncr < 1.0) {
            sub_lo = std::min(sub_lo, b.mean_fluct);
            sub_hi = std::max(sub_hi, b.mean_fluct);
            ++sub;
        }
    }
    rep.plateau_ratio = sub >= 2 ? sub_hi / sub_lo : 0.0;
    rep.supercritical_bins = xs.size();
    if (xs.size() < 3)
        return rep;

    const double k = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    rep.exponent = sxy / sxx;
    const double intercept = my - rep.exponent * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - intercept - rep.exponent * xs[i];
        rss += r * r;
    }
    rep.exponent_error = xs.size() > 2 ? std::sqrt(rss / (k - 2.0) / sxx) : 0.0;
    // fluct = e^intercept (N_pc / N_cr)^p  =>  amplitude in units of N_pc
    rep.amplitude = std::exp(intercept) * std::pow(n_cr, -rep.exponent);
    rep.fitted = true;
    return rep;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty())
        throw DomainError("ks_two_sample: both samples must be non-empty");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v)
            ++i;
        while (j < y.size() && y[j] == v)
            ++j;
        d = std::max(d, std::abs(i / n - j / m));
    }
    KsResult r;
    r.statistic = d;
    r.critical = 1.628 * std::sqrt((n + m) / (n * m));
    r.same = d < r.critical;
    return r;
}

} // namespace eigtemp
