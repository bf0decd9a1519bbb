#include "eigtemp/basis.hpp"

#include "eigtemp/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace eigtemp {

FockState::FockState(std::vector<int> occupations) : occ_(std::move(occupations))
{
    for (int n : occ_)
        if (n < 0)
            throw DomainError("FockState: negative occupation");
}

int FockState::particles() const
{
    return std::accumulate(occ_.begin(), occ_.end(), 0);
}

namespace {

void check_sizes(int particles, int levels)
{
    if (particles < 1)
        throw DomainError("basis: particle count must be >= 1, got " + std::to_string(particles));
    if (levels < 1)
        throw DomainError("basis: level count must be >= 1, got " + std::to_string(levels));
}

// count(r, m) = C(r+m-1, m-1), built by count(r,m) = count(r,m-1) + count(r-1,m).
std::vector<std::uint64_t> composition_table(int n, int m)
{
    const int cols = m + 1;
    std::vector<std::uint64_t> c(static_cast<std::size_t>((n + 1) * cols), 0);
    c[0] = 1;
    for (int k = 1; k <= m; ++k) {
        for (int r = 0; r <= n; ++r) {
            std::uint64_t v = c[r * cols + k - 1];
            if (r > 0 && __builtin_add_overflow(v, c[(r - 1) * cols + k], &v))
                throw DomainError("basis: dimension overflows the index type");
            c[r * cols + k] = v;
        }
    }
    return c;
}

void fill_lexicographic(int level, int remaining, int m, std::vector<int>& cur, std::vector<int>& out)
{
    if (level == m - 1) {
        cur[level] = remaining;
        out.insert(out.end(), cur.begin(), cur.end());
        return;
    }
    for (int v = 0; v <= remaining; ++v) {
        cur[level] = v;
        fill_lexicographic(level + 1, remaining - v, m, cur, out);
    }
}

} // namespace

std::size_t basis_dimension(int particles, int levels)
{
    check_sizes(particles, levels);
    const auto table = composition_table(particles, levels);
    const std::uint64_t d = table[particles * (levels + 1) + levels];
    if (d > std::numeric_limits<std::size_t>::max())
        throw DomainError("basis: dimension overflows the index type");
    return static_cast<std::size_t>(d);
}

BasisTable::BasisTable(int particles, int levels) : n_(particles), m_(levels), dim_(0)
{
    check_sizes(particles, levels);
    count_ = composition_table(n_, m_);
    dim_ = static_cast<std::size_t>(compositions(n_, m_));
    std::size_t cells = 0;
    if (__builtin_mul_overflow(dim_, static_cast<std::size_t>(m_), &cells))
        throw DomainError("basis: state table size overflows");

    states_.reserve(cells);
    std::vector<int> cur(m_, 0);
    fill_lexicographic(0, n_, m_, cur, states_);
    if (states_.size() != cells)
        throw IntegrityError("basis: enumeration count disagrees with stars-and-bars formula");
}

std::size_t BasisTable::rank(std::span<const int> occ) const
{
    if (occ.size() != static_cast<std::size_t>(m_))
        throw DomainError("rank: state has " + std::to_string(occ.size()) + " levels, table has " +
                          std::to_string(m_));
    int total = 0;
    for (int v : occ) {
        if (v < 0 || v > n_)
            throw DomainError("rank: occupation out of range [0, N]");
        total += v;
    }
    if (total != n_)
        throw DomainError("rank: state holds " + std::to_string(total) + " particles, table has " +
                          std::to_string(n_));
    return rank_unchecked(occ);
}

FockState BasisTable::unrank(std::size_t index) const
{
    if (index >= dim_)
        throw DomainError("unrank: index " + std::to_string(index) + " out of range [0, " +
                          std::to_string(dim_) + ")");
    std::vector<int> occ(m_, 0);
    int r = n_;
    for (int s = 0; s + 1 < m_; ++s) {
        const int after = m_ - s - 1;
        int v = 0;
        for (;;) {
            const std::uint64_t block = compositions(r - v, after);
            if (index < block)
                break;
            index -= block;
            ++v;
        }
        occ[s] = v;
        r -= v;
    }
    occ[m_ - 1] = r;
    return FockState(std::move(occ));
}

BasisTable enumerate_basis(int particles, int levels)
{
    return BasisTable(particles, levels);
}

double apply_two_body_inplace(std::span<int> occ, int s1, int s2, int s3, int s4)
{
    // Amplitude is sqrt of an integer product so that a transition and its
    // reverse carry bit-identical amplitudes.
    long long prod = occ[s4]--;
    if (prod == 0)
        return 0.0;
    const int n3 = occ[s3]--;
    if (n3 == 0)
        return 0.0;
    prod *= n3;
    prod *= ++occ[s2];
    prod *= ++occ[s1];
    return std::sqrt(static_cast<double>(prod));
}

std::optional<std::pair<FockState, double>>
apply_two_body(const FockState& state, int s1, int s2, int s3, int s4)
{
    const int m = static_cast<int>(state.levels());
    for (int s : {s1, s2, s3, s4})
        if (s < 0 || s >= m)
            throw DomainError("apply_two_body: level index " + std::to_string(s) + " out of range");
    std::vector<int> occ(state.occupations().begin(), state.occupations().end());
    const double amp = apply_two_body_inplace(occ, s1, s2, s3, s4);
    if (amp == 0.0)
        return std::nullopt;
    return std::make_pair(FockState(std::move(occ)), amp);
}

} // namespace eigtemp
