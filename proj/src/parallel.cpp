#include "eigtemp/parallel.hpp"

#include "eigtemp/errors.hpp"

#include <cblas.h>
#include <lapacke.h>
#include <omp.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

namespace eigtemp {

void set_threads(int threads)
{
    if (threads < 0)
        throw DomainError("set_threads: thread count must be >= 0");
    if (threads == 0)
        return;
    omp_set_num_threads(threads);
    openblas_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(master) ^ (index + 0x632be59bd9b4e019ULL));
}

bool blas_is_sane()
{
    constexpr int n = 300;
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(n * n), c(n * n, 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i)
            a[i + j * n] = a[j + i * n] = u(rng);
    std::vector<double> b(a);
    std::vector<double> w(n);
    if (LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, b.data(), n, w.data()) != 0)
        return false;
    // residual of A V = V diag(w), checked with plain loops
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double av = 0.0;
            for (int k = 0; k < n; ++k)
                av += a[i + k * n] * b[k + j * n];
            worst = std::max(worst, std::abs(av - w[j] * b[i + j * n]));
        }
    cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, n, n, n, 1.0, a.data(), n, b.data(), n, 0.0, c.data(), n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(c[i + j * n] - w[j] * b[i + j * n]));
    return worst < 1e-9;
}

void ensure_working_blas(int argc, char** argv)
{
    (void)argc;
    if (blas_is_sane())
        return;
    if (std::getenv("OPENBLAS_CORETYPE") == nullptr) {
        ::setenv("OPENBLAS_CORETYPE", "Haswell", 1);
        ::execv("/proc/self/exe", argv);
    }
    throw IntegrityError("BLAS self-check failed: dgemm disagrees with a naive product");
}

} // namespace eigtemp
