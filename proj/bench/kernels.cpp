// Parallel kernels against their serial references.

#include "eigtemp/fluct.hpp"
#include "eigtemp/hamiltonian.hpp"
#include "eigtemp/parallel.hpp"
#include "eigtemp/spectral.hpp"
#include "eigtemp/thermal.hpp"

#include <benchmark/benchmark.h>

using namespace eigtemp;

namespace {

struct Fixture {
    BasisTable basis{5, 9};
    HamiltonianBundle bundle;
    EigenDecomposition eigen;
    std::vector<EigenstateRecord> records;
    ScalingInputs inputs;

    Fixture()
        : bundle(build_realization(basis, 0.4, SpectrumMode::random, realization_seeds(1, 0))),
          eigen(diagonalize(bundle)), records(build_records(eigen, bundle)), inputs(scaling_inputs(bundle))
    {
    }
};

const Fixture& fixture()
{
    static const Fixture f;
    return f;
}

void BM_assemble(benchmark::State& st)
{
    const auto& f = fixture();
    for (auto _ : st)
        benchmark::DoNotOptimize(assemble(f.basis, f.bundle.spectrum, f.bundle.couplings));
}

void BM_assemble_serial(benchmark::State& st)
{
    const auto& f = fixture();
    for (auto _ : st)
        benchmark::DoNotOptimize(serial::assemble(f.basis, f.bundle.spectrum, f.bundle.couplings));
}

void BM_build_records(benchmark::State& st)
{
    const auto& f = fixture();
    for (auto _ : st)
        benchmark::DoNotOptimize(build_records(f.eigen, f.bundle));
}

void BM_build_records_serial(benchmark::State& st)
{
    const auto& f = fixture();
    for (auto _ : st)
        benchmark::DoNotOptimize(serial::build_records(f.eigen, f.bundle));
}

void BM_thermal_records(benchmark::State& st)
{
    const auto& f = fixture();
    for (auto _ : st)
        benchmark::DoNotOptimize(thermal_records(f.records, f.bundle.spectrum, 5, f.inputs, 0.4));
}

void BM_thermal_records_serial(benchmark::State& st)
{
    const auto& f = fixture();
    for (auto _ : st)
        benchmark::DoNotOptimize(serial::thermal_records(f.records, f.bundle.spectrum, 5, f.inputs, 0.4));
}

EnsembleSpec small_ensemble()
{
    EnsembleSpec spec;
    spec.particles = 4;
    spec.levels = 7;
    spec.realizations = 32;
    spec.windows = {{8.0, 20}};
    return spec;
}

void BM_run_ensemble(benchmark::State& st)
{
    const auto spec = small_ensemble();
    for (auto _ : st)
        benchmark::DoNotOptimize(run_ensemble(spec));
}

void BM_run_ensemble_serial(benchmark::State& st)
{
    const auto spec = small_ensemble();
    for (auto _ : st)
        benchmark::DoNotOptimize(serial::run_ensemble(spec));
}

} // namespace

BENCHMARK(BM_assemble)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_assemble_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_build_records)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_build_records_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_thermal_records)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_thermal_records_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_run_ensemble)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_run_ensemble_serial)->Unit(benchmark::kMillisecond)->UseRealTime();

int main(int argc, char** argv)
{
    ensure_working_blas(argc, argv);
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv))
        return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
