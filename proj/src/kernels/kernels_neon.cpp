// NEON backend (aarch64 float64x2). Same structure as the AVX2 variant.

#include "kernels_internal.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace safetext::kernels::detail {
namespace {

double n_dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void n_axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void n_scale(double alpha, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void n_vadd(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void n_vsub(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void n_vmul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

double n_vsum(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double n_sumsq(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    acc = vaddq_f64(acc, vmulq_f64(v, v));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

void scale_rows(double beta, double* c, std::size_t m, std::size_t n,
                std::size_t ldc) {
  if (beta == 1.0) return;
  for (std::size_t i = 0; i < m; ++i) {
    if (beta == 0.0) {
      for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] = 0.0;
    } else {
      n_scale(beta, c + i * ldc, n);
    }
  }
}

void n_gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
            std::size_t k, double alpha, const double* a, std::size_t lda,
            const double* b, std::size_t ldb, double beta, double* c,
            std::size_t ldc) {
  if (!trans_a && !trans_b) {
    scale_rows(beta, c, m, n, ldc);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double av = alpha * a[i * lda + p];
        if (av != 0.0) n_axpy(av, b + p * ldb, c + i * ldc, n);
      }
    }
  } else if (!trans_a && trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double acc = n_dot(a + i * lda, b + j * ldb, k);
        double* cv = &c[i * ldc + j];
        *cv = alpha * acc + (beta == 0.0 ? 0.0 : beta * *cv);
      }
    }
  } else if (trans_a && !trans_b) {
    scale_rows(beta, c, m, n, ldc);
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t i = 0; i < m; ++i) {
        const double av = alpha * a[p * lda + i];
        if (av != 0.0) n_axpy(av, b + p * ldb, c + i * ldc, n);
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += a[p * lda + i] * b[j * ldb + p];
        double* cv = &c[i * ldc + j];
        *cv = alpha * acc + (beta == 0.0 ? 0.0 : beta * *cv);
      }
    }
  }
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable t{n_dot, n_axpy, n_scale, n_vadd, n_vsub,
                             n_vmul, n_vsum, n_sumsq, n_gemm};
  return &t;
}

}  // namespace safetext::kernels::detail

#else

namespace safetext::kernels::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace safetext::kernels::detail

#endif
