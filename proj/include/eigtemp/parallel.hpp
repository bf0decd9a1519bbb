#pragma once

#include <cstdint>

namespace eigtemp {

/// Bound OpenMP and BLAS threads to `threads` (0 keeps the runtime default).
void set_threads(int threads);
int thread_count();

/// Per-realization seed from a master seed (splitmix64 finalizer over both).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Diagonalizes a random symmetric 300x300 matrix and checks the residual
/// with plain loops and with dgemm. Some OpenBLAS builds pick a broken
/// kernel at runtime for newer CPUs; eigensolvers then silently return
/// garbage.
bool blas_is_sane();

/// If the BLAS self-check fails and OPENBLAS_CORETYPE is unset, re-executes
/// the current program with OPENBLAS_CORETYPE=Haswell. Throws
/// IntegrityError if the check still fails. Call first thing in main().
void ensure_working_blas(int argc, char** argv);

} // namespace eigtemp
