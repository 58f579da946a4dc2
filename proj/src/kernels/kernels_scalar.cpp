// Reference implementations. All other backends are tested against these.

#include "kernels_internal.hpp"

namespace safetext::kernels::detail {
namespace {

double s_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void s_axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void s_scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void s_vadd(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void s_vsub(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void s_vmul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

double s_vsum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double s_sumsq(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

// Naive triple loop, one branch per transpose combination. Kept deliberately
// plain: this is the oracle the SIMD gemm is checked against.
void s_gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
            std::size_t k, double alpha, const double* a, std::size_t lda,
            const double* b, std::size_t ldb, double beta, double* c,
            std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = trans_a ? a[p * lda + i] : a[i * lda + p];
        const double bv = trans_b ? b[j * ldb + p] : b[p * ldb + j];
        acc += av * bv;
      }
      double* cv = &c[i * ldc + j];
      *cv = alpha * acc + (beta == 0.0 ? 0.0 : beta * *cv);
    }
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{s_dot, s_axpy, s_scale, s_vadd, s_vsub,
                             s_vmul, s_vsum, s_sumsq, s_gemm};
  return t;
}

}  // namespace safetext::kernels::detail
