// AVX2 backend. Compiled with -mavx2 in its own translation unit; the table is
// only reachable through runtime dispatch, so the rest of the library stays
// baseline-ISA clean.

#include "kernels_internal.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace safetext::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double a_dot(const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                             _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4),
                                             _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                             _mm256_loadu_pd(b + i)));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void a_axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void a_scale(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

void a_vadd(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void a_vsub(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void a_vmul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

double a_vsum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double a_sumsq(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  double s = hsum(acc);
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
      a_scale(beta, c + i * ldc, n);
    }
  }
}

// NN and TN run in axpy form (accumulate scaled B rows into C rows); NT runs
// in dot form. TT falls back to a plain loop, it is not on any hot path.
void a_gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
            std::size_t k, double alpha, const double* a, std::size_t lda,
            const double* b, std::size_t ldb, double beta, double* c,
            std::size_t ldc) {
  if (!trans_a && !trans_b) {
    scale_rows(beta, c, m, n, ldc);
    for (std::size_t i = 0; i < m; ++i) {
      double* crow = c + i * ldc;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = alpha * a[i * lda + p];
        if (av != 0.0) a_axpy(av, b + p * ldb, crow, n);
      }
    }
  } else if (!trans_a && trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double acc = a_dot(a + i * lda, b + j * ldb, k);
        double* cv = &c[i * ldc + j];
        *cv = alpha * acc + (beta == 0.0 ? 0.0 : beta * *cv);
      }
    }
  } else if (trans_a && !trans_b) {
    scale_rows(beta, c, m, n, ldc);
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * ldb;
      for (std::size_t i = 0; i < m; ++i) {
        const double av = alpha * a[p * lda + i];
        if (av != 0.0) a_axpy(av, brow, c + i * ldc, n);
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

const KernelTable* avx2_table() {
  static const KernelTable t{a_dot, a_axpy, a_scale, a_vadd, a_vsub,
                             a_vmul, a_vsum, a_sumsq, a_gemm};
  return &t;
}

}  // namespace safetext::kernels::detail

#else

namespace safetext::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace safetext::kernels::detail

#endif
