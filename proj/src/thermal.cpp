#include "eigtemp/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eigtemp {

ScalingInputs scaling_inputs(const HamiltonianBundle& bundle)
{
    const auto dos0 = dos_moments(bundle.e0, DosKind::unperturbed);
    return {dos0.variance, mean_sf_variance(bundle), dos0.center};
}

BedSide bed_side(int particles, double energy, const SingleParticleSpectrum& spectrum)
{
    BedSide side;
    const auto dom = energy_domain(particles, spectrum);
    if (!dom.contains(energy)) {
        side.note = "infeasible: energy outside (e_min, e_max)";
        return side;
    }
    try {
        side.solution = solve_bed(particles, energy, spectrum);
        side.feasible = true;
    } catch (const BedFailure& e) {
        side.solution = e.last_iterate();
        side.note = std::string("failed: ") + e.what();
    }
    return side;
}

std::pair<BedSide, BedSide> dressed_bed(const EigenstateRecord& record, const SingleParticleSpectrum& spectrum,
                                        int particles)
{
    return {bed_side(particles, record.energy, spectrum), bed_side(particles, record.e_dres, spectrum)};
}

double delta_alpha_analytic(double e_alpha, const ScalingInputs& in)
{
    const double denom = in.mean_sf_var + in.sigma0_sq;
    if (denom == 0.0)
        return 0.0;
    return in.mean_sf_var / denom * (in.e_center - e_alpha);
}

double temperature_shift_analytic(const ScalingInputs& in)
{
    if (!(in.sigma0_sq > 0.0))
        throw DomainError("temperature_shift_analytic: sigma0^2 must be > 0");
    return in.mean_sf_var / in.sigma0_sq;
}

double gaussian_dos_temperature(double energy, const ScalingInputs& in, DosKind which)
{
    if (energy == in.e_center)
        throw DomainError("gaussian_dos_temperature: infinite temperature at the DOS center");
    const double var = which == DosKind::perturbed ? in.sigma0_sq + in.mean_sf_var : in.sigma0_sq;
    return var / (in.e_center - energy);
}

ThermalRecord thermal_record(const EigenstateRecord& record, const SingleParticleSpectrum& spectrum, int particles,
                             const ScalingInputs& in, double strength)
{
    ThermalRecord t;
    t.record = record;
    std::tie(t.bare, t.dressed) = dressed_bed(record, spectrum, particles);
    t.delta_alpha_analytic = delta_alpha_analytic(record.energy, in);
    t.dt_over_t_analytic = in.sigma0_sq > 0.0 ? temperature_shift_analytic(in) : 0.0;
    t.dt_over_t = std::numeric_limits<double>::quiet_NaN();
    if (t.bare.feasible && t.dressed.feasible && t.bare.solution.beta != 0.0 && t.dressed.solution.beta != 0.0)
        t.dt_over_t = t.bare.solution.beta / t.dressed.solution.beta - 1.0;
    t.chaotic = classify(record, strength);
    return t;
}

std::vector<ThermalRecord> thermal_records(std::span<const EigenstateRecord> records,
                                           const SingleParticleSpectrum& spectrum, int particles,
                                           const ScalingInputs& in, double strength)
{
    const auto n = static_cast<std::ptrdiff_t>(records.size());
    std::vector<ThermalRecord> out(n);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[i] = thermal_record(records[i], spectrum, particles, in, strength);
    return out;
}

namespace serial {
std::vector<ThermalRecord> thermal_records(std::span<const EigenstateRecord> records,
                                           const SingleParticleSpectrum& spectrum, int particles,
                                           const ScalingInputs& in, double strength)
{
    std::vector<ThermalRecord> out;
    out.reserve(records.size());
    for (const auto& r : records)
        out.push_back(thermal_record(r, spectrum, particles, in, strength));
    return out;
}
} // namespace serial

std::vector<std::size_t> closest_in_energy(std::span<const EigenstateRecord> records, double target,
                                           std::size_t count)
{
    std::vector<std::size_t> idx(records.size());
    std::iota(idx.begin(), idx.end(), 0);
    count = std::min(count, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + count, idx.end(), [&](std::size_t a, std::size_t b) {
        const double da = std::abs(records[a].energy - target);
        const double db = std::abs(records[b].energy - target);
        return da < db || (da == db && a < b);
    });
    idx.resize(count);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return records[a].energy < records[b].energy || (records[a].energy == records[b].energy && a < b);
    });
    return idx;
}

WindowOnd window_average_ond(std::span<const EigenstateRecord> records, double target, std::size_t count)
{
    if (count < 1)
        throw DomainError("window_average_ond: window must hold at least one eigenstate");
    if (records.empty())
        throw DomainError("window_average_ond: no records");
    WindowOnd w;
    w.target = target;
    w.short_window = records.size() < count;
    w.members = closest_in_energy(records, target, count);
    const std::size_t m = records[w.members.front()].ond.size();
    const double k = static_cast<double>(w.members.size());
    w.mean.assign(m, 0.0);
    w.stddev.assign(m, 0.0);
    for (std::size_t i : w.members) {
        w.mean_energy += records[i].energy / k;
        w.mean_e_dres += records[i].e_dres / k;
        for (std::size_t s = 0; s < m; ++s)
            w.mean[s] += records[i].ond[s] / k;
    }
    for (std::size_t i : w.members)
        for (std::size_t s = 0; s < m; ++s) {
            const double d = records[i].ond[s] - w.mean[s];
            w.stddev[s] += d * d / k;
        }
    for (double& v : w.stddev)
        v = std::sqrt(v);
    return w;
}

double ond_deviation(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw DomainError("ond_deviation: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

std::vector<BedCurvePoint> bed_curve(int particles, const SingleParticleSpectrum& spectrum,
                                     std::span<const double> energies)
{
    std::vector<BedCurvePoint> out;
    const auto dom = energy_domain(particles, spectrum);
    for (double e : energies) {
        if (!dom.contains(e))
            continue;
        const auto sol = solve_bed(particles, e, spectrum);
        out.push_back({e, sol.beta, sol.z});
    }
    return out;
}

} // namespace eigtemp
