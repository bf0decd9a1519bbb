#include "eigtemp/spectral.hpp"

#include "eigtemp/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace eigtemp {

namespace {

constexpr double kNormTolerance = 1e-10;
constexpr double kResidualTolerance = 1e-8;
constexpr double kRadicandClamp = -1e-12;

std::string describe(const HamiltonianBundle& b)
{
    std::ostringstream os;
    os << "(N=" << b.basis.particles() << ", M=" << b.basis.levels() << ", V=" << b.couplings.strength()
       << ", seed=" << b.couplings.seed() << ")";
    return os.str();
}

EigenDecomposition run_dsyevd(const Eigen::MatrixXd& h)
{
    if (h.rows() != h.cols())
        throw DomainError("diagonalize: matrix is not square");
    EigenDecomposition d;
    const auto n = static_cast<lapack_int>(h.rows());
    d.vectors = h;
    d.values.resize(n);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, d.vectors.data(), n, d.values.data());
    if (info != 0)
        throw ConvergenceError("dsyevd failed with info=" + std::to_string(info));

    for (lapack_int a = 0; a < n; ++a)
        if (std::abs(d.vectors.col(a).norm() - 1.0) > kNormTolerance)
            throw ConvergenceError("eigenvector " + std::to_string(a) + " is not unit norm");

    // residual spot check on ~1% of the columns, deterministic selection
    const double hnorm = std::max(std::abs(d.values(0)), std::abs(d.values(n - 1)));
    const lapack_int checks = std::max<lapack_int>(1, n / 100);
    std::mt19937_64 pick(static_cast<std::uint64_t>(n));
    std::uniform_int_distribution<lapack_int> col(0, n - 1);
    for (lapack_int i = 0; i < checks; ++i) {
        const lapack_int a = col(pick);
        const double r = (h * d.vectors.col(a) - d.values(a) * d.vectors.col(a)).norm();
        if (r > kResidualTolerance * std::max(hnorm, 1.0))
            throw ConvergenceError("eigenpair " + std::to_string(a) + " residual " + std::to_string(r));
    }
    return d;
}

std::pair<double, double> axis_range(std::span<const double> x)
{
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    double a = *lo;
    double b = *hi;
    if (b <= a) {
        a -= 0.5;
        b += 0.5;
    }
    return {a, b};
}

SpectralProfile histogram(std::span<const double> axis, std::span<const double> c, int bins, ProfileKind kind)
{
    if (bins < 2)
        throw DomainError("profile: need at least 2 bins");
    SpectralProfile p;
    p.kind = kind;
    const auto [lo, hi] = axis_range(axis);
    p.edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i)
        p.edges[i] = lo + (hi - lo) * i / bins;
    p.weights.assign(bins, 0.0);
    const double scale = bins / (hi - lo);
    for (std::size_t i = 0; i < axis.size(); ++i) {
        int b = static_cast<int>((axis[i] - lo) * scale);
        b = std::clamp(b, 0, bins - 1);
        p.weights[b] += c[i] * c[i];
    }
    return p;
}

void fill_record(EigenstateRecord& r, const EigenDecomposition& d, const HamiltonianBundle& b, std::size_t alpha)
{
    const auto c = d.component(alpha);
    const int m = b.basis.levels();
    r.alpha = alpha;
    r.energy = d.values(static_cast<Eigen::Index>(alpha));
    r.npc = participation_ratio(c);
    r.delta0 = unperturbed_width(c, b.e0);
    r.dloc = r.delta0 / r.npc;
    double h0 = 0.0;
    r.ond.assign(m, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double w = c[k] * c[k];
        h0 += w * b.e0[k];
        const auto occ = b.basis.state(k);
        for (int s = 0; s < m; ++s)
            r.ond[s] += w * occ[s];
    }
    r.delta_alpha = h0 - r.energy;
    r.e_dres = r.energy + r.delta_alpha;
}

double column_offdiag_sq(const Eigen::MatrixXd& h, Eigen::Index k)
{
    const double* col = h.col(k).data();
    double s = 0.0;
    for (Eigen::Index j = 0; j < h.rows(); ++j)
        if (j != k)
            s += col[j] * col[j];
    return s;
}

} // namespace

EigenDecomposition diagonalize(const Eigen::MatrixXd& symmetric)
{
    return run_dsyevd(symmetric);
}

EigenDecomposition diagonalize(const HamiltonianBundle& bundle)
{
    try {
        return run_dsyevd(bundle.matrix);
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(std::string(e.what()) + " for " + describe(bundle));
    }
}

double participation_ratio(std::span<const double> c)
{
    double s = 0.0;
    for (double x : c) {
        const double p = x * x;
        s += p * p;
    }
    return 1.0 / s;
}

double unperturbed_width(std::span<const double> c, std::span<const double> e0)
{
    if (c.size() != e0.size())
        throw DomainError("unperturbed_width: length mismatch");
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double w = c[k] * c[k];
        m1 += w * e0[k];
        m2 += w * e0[k] * e0[k];
    }
    const double rad = m2 - m1 * m1;
    if (rad < kRadicandClamp)
        throw IntegrityError("unperturbed_width: negative radicand " + std::to_string(rad));
    return std::sqrt(std::max(rad, 0.0));
}

SpectralProfile strength_function(const EigenDecomposition& d, std::size_t k, int bins)
{
    if (k >= d.dimension())
        throw DomainError("strength_function: basis index out of range");
    const Eigen::VectorXd row = d.vectors.row(static_cast<Eigen::Index>(k));
    return histogram({d.values.data(), d.dimension()}, {row.data(), d.dimension()}, bins,
                     ProfileKind::strength_function);
}

SpectralProfile f_function(const EigenDecomposition& d, std::span<const double> e0, std::size_t alpha, int bins)
{
    if (alpha >= d.dimension())
        throw DomainError("f_function: eigenstate index out of range");
    if (e0.size() != d.dimension())
        throw DomainError("f_function: e0 length mismatch");
    return histogram(e0, d.component(alpha), bins, ProfileKind::f_function);
}

SmoothedEnvelope moving_window_average(std::span<const double> e0, std::span<const double> weights, double width)
{
    if (!(width > 0.0))
        throw DomainError("moving_window_average: window must be > 0");
    if (e0.size() != weights.size())
        throw DomainError("moving_window_average: length mismatch");
    const std::size_t n = e0.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return e0[a] < e0[b]; });

    SmoothedEnvelope out;
    out.energies.resize(n);
    out.values.resize(n);
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        out.energies[i] = e0[order[i]];
        prefix[i + 1] = prefix[i] + weights[order[i]];
    }
    const double half = 0.5 * width;
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = out.energies[i];
        while (out.energies[lo] < x - half)
            ++lo;
        while (hi < n && out.energies[hi] <= x + half)
            ++hi;
        out.values[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
    return out;
}

DosSummary dos_moments(std::span<const double> values, DosKind kind)
{
    if (values.empty())
        throw DomainError("dos_moments: empty input");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double var = 0.0;
    for (double v : values)
        var += (v - mean) * (v - mean);
    return {mean, var / n, kind};
}

std::vector<double> sf_variances(const Eigen::MatrixXd& h)
{
    const auto n = static_cast<std::ptrdiff_t>(h.rows());
    std::vector<double> out(n);
    // symmetric: column sums equal row sums
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k)
        out[k] = column_offdiag_sq(h, k);
    return out;
}

double mean_sf_variance(const HamiltonianBundle& bundle)
{
    const auto per_row = sf_variances(bundle.matrix);
    // serial reduction in index order: independent of thread count
    return std::accumulate(per_row.begin(), per_row.end(), 0.0) / static_cast<double>(per_row.size());
}

EigenstateRecord build_record(const EigenDecomposition& d, const HamiltonianBundle& bundle, std::size_t alpha)
{
    if (alpha >= d.dimension())
        throw DomainError("build_record: eigenstate index out of range");
    EigenstateRecord r;
    fill_record(r, d, bundle, alpha);
    return r;
}

std::vector<EigenstateRecord> build_records(const EigenDecomposition& d, const HamiltonianBundle& bundle)
{
    const auto n = static_cast<std::ptrdiff_t>(d.dimension());
    std::vector<EigenstateRecord> out(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t a = 0; a < n; ++a)
        fill_record(out[a], d, bundle, static_cast<std::size_t>(a));
    return out;
}

IdentityReport check_moment_identities(const HamiltonianBundle& b, const EigenDecomposition& d)
{
    const std::size_t n = d.dimension();
    if (n != b.dimension())
        throw DomainError("check_moment_identities: dimension mismatch");
    IdentityReport rep;
    const auto dos = dos_moments({d.values.data(), n}, DosKind::perturbed);
    const auto dos0 = dos_moments(b.e0, DosKind::unperturbed);
    const auto sfv = sf_variances(b.matrix);
    rep.mean_sf_var = std::accumulate(sfv.begin(), sfv.end(), 0.0) / static_cast<double>(n);
    rep.sigma0_sq = dos0.variance;
    rep.sigma_e_sq = dos.variance;
    rep.e_center = dos0.center;
    rep.trace_rel = std::abs(dos.center - dos0.center) / std::max(std::abs(dos0.center), 1.0);
    rep.variance_rel = std::abs(dos.variance - (dos0.variance + rep.mean_sf_var)) / dos.variance;

    std::vector<double> first(n, 0.0), second(n, 0.0), norm(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        const auto c = d.component(a);
        const double e = d.values(static_cast<Eigen::Index>(a));
        double col_norm = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double w = c[k] * c[k];
            const double de = e - b.e0[k];
            first[k] += e * w;
            second[k] += de * de * w;
            norm[k] += w;
            col_norm += w;
        }
        rep.orthonormality_abs = std::max(rep.orthonormality_abs, std::abs(std::sqrt(col_norm) - 1.0));
    }
    for (std::size_t k = 0; k < n; ++k) {
        rep.first_moment_rel =
            std::max(rep.first_moment_rel, std::abs(first[k] - b.e0[k]) / std::max(std::abs(b.e0[k]), 1.0));
        const double diff = std::abs(second[k] - sfv[k]);
        rep.second_moment_rel = std::max(rep.second_moment_rel, sfv[k] > 0.0 ? diff / sfv[k] : diff);
        rep.completeness_abs = std::max(rep.completeness_abs, std::abs(norm[k] - 1.0));
    }
    return rep;
}

namespace serial {

double mean_sf_variance(const HamiltonianBundle& bundle)
{
    const Eigen::MatrixXd& h = bundle.matrix;
    double total = 0.0;
    for (Eigen::Index k = 0; k < h.rows(); ++k)
        total += column_offdiag_sq(h, k);
    return total / static_cast<double>(h.rows());
}

std::vector<EigenstateRecord> build_records(const EigenDecomposition& d, const HamiltonianBundle& bundle)
{
    std::vector<EigenstateRecord> out(d.dimension());
    for (std::size_t a = 0; a < out.size(); ++a)
        fill_record(out[a], d, bundle, a);
    return out;
}

} // namespace serial
} // namespace eigtemp
