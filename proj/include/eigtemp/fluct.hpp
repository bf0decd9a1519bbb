#pragma once

#include "eigtemp/thermal.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eigtemp {

struct RealizationSeeds {
    std::uint64_t spectrum = 0;
    std::uint64_t couplings = 0;
};

/// Seeds of realization r; realization 0 is what a single run uses.
/// Unless vary_spectrum is set, every realization shares realization 0's
/// spectrum seed and only the couplings change.
RealizationSeeds realization_seeds(std::uint64_t master, std::size_t realization, bool vary_spectrum = false);

HamiltonianBundle build_realization(const BasisTable& basis, double strength, SpectrumMode mode,
                                    const RealizationSeeds& seeds);

struct WindowSpec {
    double energy = 0.0;
    std::size_t count = 20;
};

struct EnsembleSpec {
    int particles = 5;
    int levels = 9;
    double strength = 0.4;
    std::size_t realizations = 1;
    std::uint64_t master_seed = 1;
    std::vector<WindowSpec> windows;
    SpectrumMode mode = SpectrumMode::random;
    bool retain_all = false;          // keep every eigenstate, not only window members
    bool vary_spectrum = false;       // redraw eps_s per realization; default keeps realization 0's
    std::size_t memory_budget = 0;    // bytes; 0 = 80% of physical memory
};

void validate(const EnsembleSpec& spec);

struct RealizationResult {
    std::size_t realization = 0;
    RealizationSeeds seeds;
    ScalingInputs inputs;
    std::vector<EigenstateRecord> records;          // retained, ascending alpha
    std::vector<std::vector<std::size_t>> windows;  // positions into records, per window spec
    std::vector<std::vector<ThermalRecord>> thermal; // per window, aligned with `windows`
};

struct RealizationFailure {
    std::size_t realization = 0;
    std::string message;
};

struct EnsembleResult {
    EnsembleSpec spec;
    std::vector<RealizationResult> realizations; // ascending realization id
    std::vector<RealizationFailure> failures;
};

/// Estimated peak bytes of one realization plus retained output for all.
std::size_t ensemble_footprint(const EnsembleSpec& spec);

/// Realizations run in parallel; throws ConvergenceError when more than 5%
/// of them fail and DomainError when the footprint exceeds the budget.
EnsembleResult run_ensemble(const EnsembleSpec& spec);

namespace serial {
EnsembleResult run_ensemble(const EnsembleSpec& spec);
}

struct FluctuationSample {
    int level = 0;
    double value = 0.0;
    std::size_t realization = 0;
    std::size_t alpha = 0;
    double energy = 0.0;
    double npc = 0.0;
};

struct FluctuationSamples {
    std::vector<FluctuationSample> samples;
    std::vector<int> excluded_levels; // window mean below 1e-12

    std::vector<double> level_values(int level) const;
    std::vector<double> values() const;
    void append(const FluctuationSamples& other);
};

/// (n_s - <n_s>) / <n_s> with <n_s> the mean over `window`.
FluctuationSamples relative_fluctuations(std::span<const EigenstateRecord> window, std::size_t realization = 0);

/// Close-eigenstate samples of one window pooled over realizations.
FluctuationSamples pooled_window_fluctuations(const EnsembleResult& result, std::size_t window);

/// Disorder samples: the member closest to the window energy from every
/// realization, relative to the mean over realizations.
FluctuationSamples disorder_fluctuations(const EnsembleResult& result, std::size_t window);

enum class BinRule { sturges, square_root };

struct GaussianFit {
    double mean = 0.0;
    double sigma = 0.0;   // maximum likelihood (population) estimate
    double goodness = 0.0; // chi^2 per degree of freedom
    std::size_t samples = 0;
    int bins = 0;          // after merging sparse bins
    int dof = 0;
    bool degenerate = false; // zero variance: no fit
    bool fitted = false;     // false if degenerate or no degree of freedom left
};

/// Histogram over [min, max] with the outer bins open to +-infinity;
/// adjacent bins are merged until every expected count is >= 5;
/// dof = bins - 3. Throws DomainError below 30 samples.
GaussianFit gaussian_fit(std::span<const double> samples, BinRule rule = BinRule::sturges);

struct CloudBin {
    double npc = 0.0;   // median N_pc of the bin
    double dloc = 0.0;  // median d_loc of the bin
    std::size_t count = 0;
};

struct CriticalResult {
    double n_cr = 0.0;
    std::vector<CloudBin> bins;
};

/// Logarithmic N_pc bins, median d_loc per bin, crossing median d_loc = V
/// interpolated linearly in log-log. Medians of even-sized bins are the
/// geometric mean of the two middle values. Throws ConvergenceError,
/// listing the bin medians, when there is no crossing.
CriticalResult critical_npc(std::span<const double> npc, std::span<const double> dloc, double strength,
                            int bins = 20, std::size_t min_count = 3);

/// One group of energy-adjacent eigenstates.
struct FluctuationGroup {
    double npc = 0.0;   // mean N_pc
    double fluct = 0.0; // mean |dn_s / n_s| over states and retained levels
    double energy = 0.0;
};

/// Splits each realization's retained records (ascending energy) into
/// consecutive groups of `group_size`; a short tail group is dropped.
std::vector<FluctuationGroup> fluctuation_groups(const EnsembleResult& result, std::size_t group_size = 20);

struct ScalingBin {
    double npc_over_ncr = 0.0; // geometric mean over the bin
    double mean_fluct = 0.0;
    double geo_mean_fluct = 0.0;
    std::size_t count = 0;
};

struct ScalingReport {
    double n_cr = 0.0;
    std::vector<ScalingBin> bins; // ascending, non-empty
    bool fitted = false;
    double exponent = 0.0;  // fluct ~ amplitude * N_pc^exponent on the supercritical side
    double amplitude = 0.0;
    double exponent_error = 0.0;
    std::size_t supercritical_bins = 0;
    double plateau_ratio = 0.0; // max / min subcritical bin mean (0 if < 2 bins)
};

/// Log bins of N_pc / N_cr; power-law fit (least squares on geometric bin
/// means) over bins with N_pc / N_cr > 1, requiring at least 3 of them.
ScalingReport scaling_curve(std::span<const FluctuationGroup> groups, double n_cr, int bins = 12);

struct KsResult {
    double statistic = 0.0;
    double critical = 0.0; // 1% level, asymptotic
    bool same = false;     // statistic < critical
};

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

} // namespace eigtemp
