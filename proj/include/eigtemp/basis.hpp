#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace eigtemp {

/// Occupation-number vector (n_1 ... n_M) of a bosonic Fock state.
/// Level indices are zero-based throughout the API.
class FockState {
public:
    FockState() = default;
    explicit FockState(std::vector<int> occupations);

    std::span<const int> occupations() const { return occ_; }
    int operator[](std::size_t level) const { return occ_[level]; }
    std::size_t levels() const { return occ_.size(); }
    int particles() const;

    friend bool operator==(const FockState&, const FockState&) = default;
    friend auto operator<=>(const FockState& a, const FockState& b) { return a.occ_ <=> b.occ_; }

private:
    std::vector<int> occ_;
};

/// All compositions of N bosons into M levels, in ascending lexicographic
/// order of the occupation vector (n_1 most significant).
///
/// rank/unrank use the combinatorial number system: the number of states
/// that share a prefix and carry a smaller occupation at level s is a
/// difference of two binomials, so rank is O(M) integer arithmetic.
class BasisTable {
public:
    BasisTable(int particles, int levels);

    int particles() const { return n_; }
    int levels() const { return m_; }
    std::size_t dimension() const { return dim_; }

    /// Occupations of the i-th basis state (no bounds check).
    std::span<const int> state(std::size_t i) const
    {
        return {states_.data() + i * static_cast<std::size_t>(m_), static_cast<std::size_t>(m_)};
    }
    int occupation(std::size_t i, int level) const { return states_[i * m_ + level]; }

    std::size_t rank(std::span<const int> occupations) const;
    std::size_t rank(const FockState& s) const { return rank(s.occupations()); }
    FockState unrank(std::size_t index) const;

    /// rank() without validation, for hot loops over states known to be valid.
    std::size_t rank_unchecked(std::span<const int> occ) const
    {
        std::size_t idx = 0;
        int r = n_;
        for (int s = 0; s + 1 < m_ && r > 0; ++s) {
            const int v = occ[s];
            idx += compositions(r, m_ - s) - compositions(r - v, m_ - s);
            r -= v;
        }
        return idx;
    }

    /// Number of compositions of r particles into m levels.
    std::uint64_t compositions(int r, int m) const { return count_[r * (m_ + 1) + m]; }

private:
    int n_;
    int m_;
    std::size_t dim_;
    std::vector<std::uint64_t> count_; // (N+1) x (M+1)
    std::vector<int> states_;          // dim x M, row-major
};

/// Stars-and-bars dimension C(N+M-1, N); throws on overflow of std::size_t.
std::size_t basis_dimension(int particles, int levels);

BasisTable enumerate_basis(int particles, int levels);

/// a+_{s1} a+_{s2} a_{s3} a_{s4} |state>, evaluated right to left.
/// Returns the image state and the product of ladder amplitudes, or nothing
/// when an annihilator hits an empty level.
std::optional<std::pair<FockState, double>>
apply_two_body(const FockState& state, int s1, int s2, int s3, int s4);

/// In-place variant used by assembly kernels: modifies occ and returns the
/// amplitude; returns 0 and leaves occ unspecified when the image vanishes.
double apply_two_body_inplace(std::span<int> occ, int s1, int s2, int s3, int s4);

} // namespace eigtemp
