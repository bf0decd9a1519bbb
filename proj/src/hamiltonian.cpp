#include "eigtemp/hamiltonian.hpp"

#include "eigtemp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <tuple>

namespace eigtemp {

std::string to_string(SpectrumMode mode)
{
    return mode == SpectrumMode::deterministic ? "deterministic" : "random";
}

SpectrumMode parse_spectrum_mode(const std::string& text)
{
    if (text == "deterministic")
        return SpectrumMode::deterministic;
    if (text == "random")
        return SpectrumMode::random;
    throw DomainError("unknown spectrum mode '" + text + "' (expected deterministic|random)");
}

SingleParticleSpectrum sample_spectrum(int levels, SpectrumMode mode, std::uint64_t seed)
{
    if (levels < 2)
        throw DomainError("sample_spectrum: need at least 2 levels");
    SingleParticleSpectrum sp;
    sp.mode = mode;
    sp.seed = seed;
    sp.energies.resize(levels);
    if (mode == SpectrumMode::deterministic) {
        for (int s = 0; s < levels; ++s)
            sp.energies[s] = s;
        return sp;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> spacing(0.5, 1.5);
    sp.energies[0] = 0.0;
    for (int s = 1; s < levels; ++s)
        sp.energies[s] = sp.energies[s - 1] + spacing(rng);
    return sp;
}

CouplingTensor::CouplingTensor(int levels, double strength, std::uint64_t seed,
                               std::vector<double> unit_draws)
    : m_(levels), pairs_(static_cast<std::size_t>(levels) * (levels + 1) / 2), strength_(strength),
      seed_(seed), draws_(std::move(unit_draws))
{
    if (strength < 0.0)
        throw DomainError("couplings: strength must be >= 0");
    if (draws_.size() != pairs_ * (pairs_ + 1) / 2)
        throw DomainError("couplings: wrong number of canonical draws");
    build_table();
}

void CouplingTensor::build_table()
{
    table_.assign(pairs_ * pairs_, 0.0);
    std::size_t idx = 0;
    for (std::size_t p = 0; p < pairs_; ++p)
        for (std::size_t q = p; q < pairs_; ++q) {
            const double v = strength_ * draws_[idx++];
            table_[p * pairs_ + q] = v;
            table_[q * pairs_ + p] = v;
        }
}

std::vector<double> CouplingTensor::canonical_entries() const
{
    std::vector<double> out(draws_.size());
    for (std::size_t i = 0; i < draws_.size(); ++i)
        out[i] = strength_ * draws_[i];
    return out;
}

CouplingTensor CouplingTensor::scaled(double factor) const
{
    return CouplingTensor(m_, strength_ * factor, seed_, draws_);
}

CouplingTensor sample_couplings(int levels, double strength, std::uint64_t seed)
{
    if (levels < 1)
        throw DomainError("sample_couplings: need at least 1 level");
    const std::size_t pairs = static_cast<std::size_t>(levels) * (levels + 1) / 2;
    std::vector<double> draws(pairs * (pairs + 1) / 2);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& d : draws)
        d = gauss(rng);
    return CouplingTensor(levels, strength, seed, std::move(draws));
}

std::vector<double> build_h0(const BasisTable& basis, const SingleParticleSpectrum& spectrum)
{
    if (spectrum.levels() != basis.levels())
        throw DomainError("build_h0: spectrum and basis disagree on M");
    std::vector<double> e0(basis.dimension());
    for (std::size_t k = 0; k < e0.size(); ++k) {
        const auto occ = basis.state(k);
        double e = 0.0;
        for (int s = 0; s < basis.levels(); ++s)
            e += spectrum.energies[s] * occ[s];
        e0[k] = e;
    }
    return e0;
}

namespace {

struct Contribution {
    std::size_t target;
    std::size_t key;
    double coefficient;
};

// Sum of squared coefficients (per independent draw) and number of distinct
// off-diagonal targets reached from basis state k.
std::pair<double, std::size_t> column_coefficients(const BasisTable& basis, std::size_t k,
                                                   std::vector<int>& occ, std::vector<Contribution>& buf)
{
    const int m = basis.levels();
    const std::size_t pairs = static_cast<std::size_t>(m) * (m + 1) / 2;
    auto pair_index = [m](int a, int b) {
        if (a > b)
            std::swap(a, b);
        return static_cast<std::size_t>(a) * m - static_cast<std::size_t>(a) * (a - 1) / 2 + (b - a);
    };
    buf.clear();
    const auto src = basis.state(k);
    std::copy(src.begin(), src.end(), occ.begin());
    for (int s4 = 0; s4 < m; ++s4) {
        const int n4 = occ[s4];
        if (n4 == 0)
            continue;
        --occ[s4];
        for (int s3 = 0; s3 < m; ++s3) {
            const int n3 = occ[s3];
            if (n3 == 0)
                continue;
            --occ[s3];
            const std::size_t q = pair_index(s3, s4);
            for (int s2 = 0; s2 < m; ++s2) {
                const int n2 = ++occ[s2];
                for (int s1 = 0; s1 < m; ++s1) {
                    const int n1 = ++occ[s1];
                    const std::size_t j = basis.rank_unchecked(occ);
                    if (j != k) {
                        const std::size_t p = pair_index(s1, s2);
                        const double amp = std::sqrt(static_cast<double>(static_cast<long long>(n4) * n3 * n2 * n1));
                        buf.push_back({j, std::min(p, q) * pairs + std::max(p, q), amp});
                    }
                    --occ[s1];
                }
                --occ[s2];
            }
            ++occ[s3];
        }
        ++occ[s4];
    }
    std::sort(buf.begin(), buf.end(), [](const Contribution& a, const Contribution& b) {
        return std::tie(a.target, a.key) < std::tie(b.target, b.key);
    });
    double sum_sq = 0.0;
    std::size_t targets = 0;
    for (std::size_t i = 0; i < buf.size();) {
        std::size_t e = i;
        double c = 0.0;
        while (e < buf.size() && buf[e].target == buf[i].target && buf[e].key == buf[i].key)
            c += buf[e++].coefficient;
        sum_sq += c * c;
        if (i == 0 || buf[i - 1].target != buf[i].target)
            ++targets;
        i = e;
    }
    return {sum_sq, targets};
}

} // namespace

double interaction_normalization(const BasisTable& basis)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, double> memo;
    const auto key = std::make_pair(basis.particles(), basis.levels());
    {
        std::lock_guard lock(mutex);
        if (auto it = memo.find(key); it != memo.end())
            return it->second;
    }
    const auto n = static_cast<std::ptrdiff_t>(basis.dimension());
    std::vector<double> sum_sq(n);
    std::vector<std::size_t> targets(n);
#pragma omp parallel
    {
        std::vector<int> occ(basis.levels());
        std::vector<Contribution> buf;
#pragma omp for schedule(dynamic, 32)
        for (std::ptrdiff_t k = 0; k < n; ++k)
            std::tie(sum_sq[k], targets[k]) = column_coefficients(basis, k, occ, buf);
    }
    double total_sq = 0.0;
    double total_targets = 0.0;
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        total_sq += sum_sq[k];
        total_targets += static_cast<double>(targets[k]);
    }
    const double kappa = total_sq > 0.0 ? std::sqrt(total_targets / total_sq) : 1.0;
    std::lock_guard lock(mutex);
    memo.emplace(key, kappa);
    return kappa;
}

double relative_asymmetry(const Eigen::MatrixXd& h)
{
    const Eigen::Index n = h.rows();
    double max_off = 0.0;
    double max_asym = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) {
            max_off = std::max({max_off, std::abs(h(i, j)), std::abs(h(j, i))});
            max_asym = std::max(max_asym, std::abs(h(i, j) - h(j, i)));
        }
    return max_off > 0.0 ? max_asym / max_off : 0.0;
}

namespace {

constexpr double kAsymmetryTolerance = 1e-10;

// Column k of V: V|k> accumulated over every ordered (s1,s2,s3,s4), then
// multiplied by the interaction normalization.
void accumulate_column(const BasisTable& basis, const CouplingTensor& v, double kappa, std::size_t k,
                       std::vector<int>& occ, double* column)
{
    const int m = basis.levels();
    const auto src = basis.state(k);
    std::copy(src.begin(), src.end(), occ.begin());
    for (int s4 = 0; s4 < m; ++s4) {
        const int n4 = occ[s4];
        if (n4 == 0)
            continue;
        --occ[s4];
        for (int s3 = 0; s3 < m; ++s3) {
            const int n3 = occ[s3];
            if (n3 == 0)
                continue;
            --occ[s3];
            const long long ann = static_cast<long long>(n4) * n3;
            for (int s2 = 0; s2 < m; ++s2) {
                const int n2 = ++occ[s2];
                for (int s1 = 0; s1 < m; ++s1) {
                    const double c = v(s1, s2, s3, s4);
                    const int n1 = ++occ[s1];
                    if (c != 0.0) {
                        const double amp = std::sqrt(static_cast<double>(ann * n2 * n1));
                        column[basis.rank_unchecked(occ)] += amp * c;
                    }
                    --occ[s1];
                }
                --occ[s2];
            }
            ++occ[s3];
        }
        ++occ[s4];
    }
    for (std::size_t j = 0; j < basis.dimension(); ++j)
        column[j] *= kappa;
}

void finish(HamiltonianBundle& b)
{
    const Eigen::Index n = b.matrix.rows();
    for (Eigen::Index k = 0; k < n; ++k)
        b.matrix(k, k) = b.e0[k];
    const double asym = relative_asymmetry(b.matrix);
    if (asym > kAsymmetryTolerance)
        throw IntegrityError("assemble: relative asymmetry " + std::to_string(asym) +
                             " exceeds tolerance");
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double avg = 0.5 * (b.matrix(i, j) + b.matrix(j, i));
            b.matrix(i, j) = avg;
            b.matrix(j, i) = avg;
        }
}

HamiltonianBundle prepare(const BasisTable& basis, const SingleParticleSpectrum& spectrum,
                          const CouplingTensor& couplings)
{
    if (couplings.levels() != basis.levels())
        throw DomainError("assemble: couplings and basis disagree on M");
    HamiltonianBundle b{basis, spectrum, couplings, interaction_normalization(basis), build_h0(basis, spectrum), {}};
    const auto n = static_cast<Eigen::Index>(basis.dimension());
    b.matrix.setZero(n, n);
    return b;
}

} // namespace

HamiltonianBundle assemble(const BasisTable& basis, const SingleParticleSpectrum& spectrum,
                           const CouplingTensor& couplings)
{
    HamiltonianBundle b = prepare(basis, spectrum, couplings);
    const auto n = static_cast<std::ptrdiff_t>(basis.dimension());
#pragma omp parallel
    {
        std::vector<int> occ(basis.levels());
#pragma omp for schedule(dynamic, 32)
        for (std::ptrdiff_t k = 0; k < n; ++k)
            accumulate_column(basis, couplings, b.interaction_scale, k, occ, b.matrix.col(k).data());
    }
    finish(b);
    return b;
}

namespace serial {

HamiltonianBundle assemble(const BasisTable& basis, const SingleParticleSpectrum& spectrum,
                           const CouplingTensor& couplings)
{
    HamiltonianBundle b = prepare(basis, spectrum, couplings);
    std::vector<int> occ(basis.levels());
    for (std::size_t k = 0; k < basis.dimension(); ++k)
        accumulate_column(basis, couplings, b.interaction_scale, k, occ, b.matrix.col(k).data());
    finish(b);
    return b;
}

} // namespace serial
} // namespace eigtemp
