#pragma once

// Dense f64 kernels behind the tensor library. Every entry point dispatches at
// runtime to the best backend the CPU supports (scalar is the reference; AVX2
// and NEON variants are equivalence-tested against it). The environment
// variable SAFETEXT_KERNELS=scalar|avx2|neon overrides autodetection.

#include <cstddef>
#include <string>

namespace safetext::kernels {

enum class Backend { scalar, avx2, neon };

// Backend currently in use (resolved on first kernel call or query).
Backend active_backend();

// Force a backend, e.g. for equivalence tests. Throws std::invalid_argument
// if the backend is not available on this machine.
void force_backend(Backend b);

// Re-run autodetection (honours SAFETEXT_KERNELS).
void reset_backend();

bool backend_available(Backend b);
const char* backend_name(Backend b);

// ---- level-1 style primitives -------------------------------------------

double dot(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

// x *= alpha
void scale(double alpha, double* x, std::size_t n);

// out = a + b / a - b / a * b (elementwise; out may alias a or b)
void vadd(const double* a, const double* b, double* out, std::size_t n);
void vsub(const double* a, const double* b, double* out, std::size_t n);
void vmul(const double* a, const double* b, double* out, std::size_t n);

double vsum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);

// ---- gemm ----------------------------------------------------------------
//
// C = alpha * op(A) * op(B) + beta * C, row-major with leading dimensions.
// op(A) is m x k, op(B) is k x n, C is m x n.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          double alpha, const double* a, std::size_t lda, const double* b,
          std::size_t ldb, double beta, double* c, std::size_t ldc);

}  // namespace safetext::kernels
